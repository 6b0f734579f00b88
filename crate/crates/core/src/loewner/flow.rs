use num_complex::Complex64;

use super::{DrivingPath, EngineError};

/// Trajectories closer than this to the driving singularity are declared
/// swallowed; prevents overflow in the ODE right-hand side.
pub(crate) const SWALLOW_EPS: f64 = 1e-12;

/// Outcome of pushing a point through the forward flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwardPoint {
    Mapped(Complex64),
    /// The trajectory reached the singularity before the target time;
    /// the point belongs to the hull. Carries the (approximate) swallowing
    /// time.
    Swallowed { time: f64 },
}

impl ForwardPoint {
    pub fn mapped(self) -> Option<Complex64> {
        match self {
            ForwardPoint::Mapped(z) => Some(z),
            ForwardPoint::Swallowed { .. } => None,
        }
    }

    pub fn is_swallowed(self) -> bool {
        matches!(self, ForwardPoint::Swallowed { .. })
    }
}

pub(crate) enum StepOutcome {
    Done(Complex64),
    Singular { time: f64 },
}

fn rhs(g: Complex64, u: Complex64) -> Complex64 {
    g * (u + g) / (u - g)
}

/// Fixed-step RK4 with step halving near the singularity.
///
/// Integrates `dz/ds = sign * z (u(s) + z)/(u(s) - z)` from `s = 0` to
/// `s = t_total`. The base step is `dt_grid`; whenever the distance to the
/// singularity falls under `10 * h * |rhs|` the local step is halved (the
/// ODE is stiff only near the driving point). A step that underflows the
/// time accumulator means the trajectory has collapsed onto the
/// singularity.
pub(crate) fn integrate<U: Fn(f64) -> Complex64>(
    z0: Complex64,
    t_total: f64,
    dt_grid: f64,
    sign: f64,
    u_of: U,
) -> StepOutcome {
    let mut z = z0;
    let mut s = 0.0;
    let mut h = dt_grid;
    while s < t_total {
        let u = u_of(s);
        let gap = (z - u).norm();
        if gap < SWALLOW_EPS {
            return StepOutcome::Singular { time: s };
        }
        let k1 = sign * rhs(z, u);
        let mut hh = h.min(t_total - s);
        let speed = k1.norm();
        while gap < 10.0 * hh * speed {
            hh *= 0.5;
            if s + hh == s {
                return StepOutcome::Singular { time: s };
            }
        }
        let um = u_of(s + 0.5 * hh);
        let ue = u_of(s + hh);
        let k2 = sign * rhs(z + 0.5 * hh * k1, um);
        let k3 = sign * rhs(z + 0.5 * hh * k2, um);
        let k4 = sign * rhs(z + hh * k3, ue);
        z += (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += hh;
        // Let the step recover once the singularity is cleared.
        h = (hh * 2.0).min(dt_grid);
    }
    StepOutcome::Done(z)
}

/// Forward Loewner flow state: a driving path together with the number of
/// capacity steps applied so far. The composed map has capacity
/// `step_index * dt`, i.e. derivative modulus `e^{step_index * dt}` at 0.
#[derive(Debug, Clone)]
pub struct LoewnerState<'a> {
    pub driving: &'a DrivingPath,
    pub step_index: usize,
}

impl<'a> LoewnerState<'a> {
    pub fn new(driving: &'a DrivingPath) -> Self {
        LoewnerState {
            driving,
            step_index: 0,
        }
    }

    pub fn at_step(driving: &'a DrivingPath, step_index: usize) -> Result<Self, EngineError> {
        if step_index >= driving.values.len() {
            return Err(EngineError::TimeOutOfRange {
                t: step_index as f64 * driving.dt,
                horizon: driving.horizon(),
            });
        }
        Ok(LoewnerState {
            driving,
            step_index,
        })
    }

    /// Capacity of the composed map (capacity time == Loewner time).
    pub fn capacity(&self) -> f64 {
        self.step_index as f64 * self.driving.dt
    }
}

/// Applies the forward map `g_t` (t = state capacity) to a point of the
/// closed unit disc, reporting swallowed status for points of the hull.
pub fn forward_map_apply(state: &LoewnerState<'_>, z: Complex64) -> ForwardPoint {
    if z == Complex64::new(0.0, 0.0) {
        // 0 is a fixed point of the flow.
        return ForwardPoint::Mapped(z);
    }
    let t = state.capacity();
    match integrate(z, t, state.driving.dt, 1.0, |s| {
        Complex64::from_polar(1.0, state.driving.at(s))
    }) {
        StepOutcome::Done(g) => ForwardPoint::Mapped(g),
        StepOutcome::Singular { time } => ForwardPoint::Swallowed { time },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loewner::sample_driving;

    #[test]
    fn identity_at_time_zero() {
        let d = sample_driving(2.0, 1.0, 0.01, 3).unwrap();
        let state = LoewnerState::new(&d);
        let z = Complex64::new(0.3, 0.4);
        match forward_map_apply(&state, z) {
            ForwardPoint::Mapped(g) => assert!((g - z).norm() < 1e-15),
            _ => panic!("swallowed at t=0"),
        }
    }

    #[test]
    fn zero_is_fixed() {
        let d = sample_driving(4.0, 2.0, 0.001, 9).unwrap();
        let state = LoewnerState::at_step(&d, d.values.len() - 1).unwrap();
        match forward_map_apply(&state, Complex64::new(0.0, 0.0)) {
            ForwardPoint::Mapped(g) => assert_eq!(g, Complex64::new(0.0, 0.0)),
            _ => panic!("0 swallowed"),
        }
    }

    #[test]
    fn capacity_law_finite_difference() {
        // |g_t'(0)| = e^t; finite difference at a small offset.
        let d = sample_driving(2.0, 1.0, 1e-3, 11).unwrap();
        for &t_steps in &[250usize, 500, 1000] {
            let state = LoewnerState::at_step(&d, t_steps).unwrap();
            let t = state.capacity();
            let h = 1e-7;
            let g = forward_map_apply(&state, Complex64::new(h, 0.0))
                .mapped()
                .expect("interior point near 0 not swallowed");
            let deriv = g.norm() / h;
            assert!(
                (deriv - t.exp()).abs() / t.exp() < 1e-4,
                "t={t}: deriv {deriv} vs {}",
                t.exp()
            );
        }
    }

    #[test]
    fn swallowed_points_stay_swallowed() {
        // Hulls increase: once a point is reported swallowed it must remain
        // so at every later capacity step. Constant driving grows a radial
        // slit from 1, so points on the positive real axis are eventually
        // swallowed while off-axis points never are.
        let d = DrivingPath::constant_zero(2.0, 5e-3).unwrap();
        let z = Complex64::new(0.9, 0.0);
        let mut seen_swallowed = false;
        for step in (0..d.values.len()).step_by(10) {
            let state = LoewnerState::at_step(&d, step).unwrap();
            let swallowed = forward_map_apply(&state, z).is_swallowed();
            if seen_swallowed {
                assert!(swallowed, "point resurfaced at step {step}");
            }
            seen_swallowed |= swallowed;
        }
        assert!(seen_swallowed, "slit point was never swallowed");

        let off = Complex64::new(0.0, 0.9);
        let last = LoewnerState::at_step(&d, d.values.len() - 1).unwrap();
        assert!(!forward_map_apply(&last, off).is_swallowed());
    }
}
