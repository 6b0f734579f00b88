use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use super::flow::{integrate, StepOutcome};
use super::{DrivingPath, EngineConfig, EngineError, WholePlaneConfig};

/// Polyline approximation of an SLE curve.
///
/// `times[j] = j * dt` where `dt` is the spacing of the stored polyline (the
/// engine may integrate on a finer grid); `horizon` is the last stored time.
/// For radial traces all points lie in the closed unit disc and
/// `points[0] = 1`; the whole-plane approximant is scaled by its disc radius.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub points: Vec<Complex64>,
    pub times: Vec<f64>,
    pub kappa: f64,
    pub dt: f64,
    pub seed: u64,
    pub horizon: f64,
}

/// Evaluates the trace at capacity time `t` by integrating the time-reversed
/// flow started at `(1 - epsilon) e^{i lambda(t)}` with the driving read
/// backwards.
pub fn trace_point(driving: &DrivingPath, t: f64, epsilon: f64) -> Result<Complex64, EngineError> {
    if !(epsilon > 0.0 && epsilon < 0.1) {
        return Err(EngineError::BadEpsilon(epsilon));
    }
    if t < 0.0 || t > driving.horizon() + 1e-12 {
        return Err(EngineError::TimeOutOfRange {
            t,
            horizon: driving.horizon(),
        });
    }
    let start = Complex64::from_polar(1.0 - epsilon, driving.at(t));
    if t == 0.0 {
        return Ok(start);
    }
    let z = match integrate(start, t, driving.dt, -1.0, |s| {
        Complex64::from_polar(1.0, driving.at(t - s))
    }) {
        StepOutcome::Done(z) => z,
        // The reverse flow moves into the disc; a singular hit means the
        // stepping broke down, not a swallowed point.
        StepOutcome::Singular { time } => {
            return Err(EngineError::BackwardFlowDiverged {
                t: time,
                modulus: f64::NAN,
            })
        }
    };
    let modulus = z.norm();
    if modulus > 1.0 + 1e-6 {
        return Err(EngineError::BackwardFlowDiverged { t, modulus });
    }
    // Clamp roundoff excursions back onto the closed disc.
    if modulus > 1.0 {
        return Ok(z / modulus);
    }
    Ok(z)
}

fn trace_from_driving(
    driving: &DrivingPath,
    cfg: &EngineConfig,
    seed: u64,
) -> Result<Trace, EngineError> {
    let stride = cfg.stride.max(1);
    let n_steps = driving.values.len() - 1;
    let indices: Vec<usize> = (0..=n_steps).step_by(stride).collect();
    let mut points: Vec<Complex64> = indices
        .par_iter()
        .map(|&j| trace_point(driving, j as f64 * driving.dt, cfg.epsilon))
        .collect::<Result<_, _>>()?;
    points[0] = Complex64::new(1.0, 0.0);
    let times: Vec<f64> = indices.iter().map(|&j| j as f64 * driving.dt).collect();
    let horizon = *times.last().unwrap();
    Ok(Trace {
        points,
        times,
        kappa: driving.kappa,
        dt: stride as f64 * driving.dt,
        seed,
        horizon,
    })
}

/// Simulates a radial SLE_kappa trace in the unit disc from 1 to 0,
/// reproducible from `seed`.
pub fn simulate_radial_trace(
    kappa: f64,
    cfg: &EngineConfig,
    seed: u64,
) -> Result<Trace, EngineError> {
    cfg.validate()?;
    let driving = super::sample_driving(kappa, cfg.horizon, cfg.dt, seed)?;
    trace_from_driving(&driving, cfg, seed)
}

/// Deterministic `lambda == 0` regression mode: the trace is the real
/// segment growing from 1 toward 0.
pub fn simulate_deterministic_trace(cfg: &EngineConfig) -> Result<Trace, EngineError> {
    cfg.validate()?;
    let driving = DrivingPath::constant_zero(cfg.horizon, cfg.dt)?;
    trace_from_driving(&driving, cfg, 0)
}

/// Combined rotation and scaling applied to the unit-disc trace by the
/// whole-plane approximant for a given seed. The angle uses a stream
/// separate from the Brownian driving so rotations do not perturb the
/// increments.
pub fn whole_plane_scale(disc_radius: f64, seed: u64) -> Complex64 {
    let mut angle_rng = ChaCha12Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let theta: f64 = angle_rng.gen::<f64>() * std::f64::consts::TAU;
    Complex64::from_polar(disc_radius, theta)
}

/// Whole-plane approximant via the large-disc construction: a standard
/// radial trace in the unit disc, rotated by a uniform boundary angle drawn
/// independently of the Brownian driving, and scaled by the disc radius N.
pub fn simulate_whole_plane_approx(
    wp: &WholePlaneConfig,
    cfg: &EngineConfig,
    seed: u64,
) -> Result<Trace, EngineError> {
    cfg.validate()?;
    let rotation = whole_plane_scale(wp.disc_radius, seed);
    let mut trace = simulate_radial_trace(wp.kappa, cfg, seed)?;
    for p in &mut trace.points {
        *p *= rotation;
    }
    Ok(trace)
}

/// Densifies a trace polyline near query balls by bisection in capacity
/// time. A segment is split whenever it passes within `r + margin +
/// segment length` of some ball `(z, r)`, so extra evaluations concentrate
/// where they can change a hit verdict; elsewhere the coarse polyline is
/// kept. Bisection continues below the driving grid (the driving function
/// is interpolated) until the segment is shorter than a quarter of the
/// smallest query radius or the time gap falls under `dt / 64`. Evaluation failures abort refinement of
/// that interval only, so the result is never worse than the input.
///
/// `scale` maps raw unit-disc trace points to the stored frame (identity
/// for radial traces, `N e^{i theta}` for the whole-plane approximant).
pub fn refine_trace_near(
    trace: &Trace,
    driving: &DrivingPath,
    epsilon: f64,
    scale: Complex64,
    targets: &[(Complex64, f64)],
    margin: f64,
) -> Trace {
    let min_gap = driving.dt / 64.0;
    let len_target = targets
        .iter()
        .map(|&(_, r)| r)
        .fold(f64::INFINITY, f64::min)
        / 4.0;
    let near = |a: Complex64, b: Complex64| {
        let seg = (b - a).norm();
        targets
            .iter()
            .any(|&(z, r)| point_segment_distance(z, a, b) < r + margin + seg)
    };
    let mut out: Vec<(f64, Complex64)> =
        trace.times.iter().copied().zip(trace.points.iter().copied()).collect();
    let mut extra: Vec<(f64, Complex64)> = Vec::new();
    let mut frontier: Vec<(f64, Complex64, f64, Complex64)> = out
        .windows(2)
        .map(|w| (w[0].0, w[0].1, w[1].0, w[1].1))
        .collect();
    while let Some((t0, p0, t1, p1)) = frontier.pop() {
        if t1 - t0 <= min_gap || (p1 - p0).norm() <= len_target || !near(p0, p1) {
            continue;
        }
        let tm = 0.5 * (t0 + t1);
        let pm = match trace_point(driving, tm, epsilon) {
            Ok(p) => p * scale,
            Err(_) => continue,
        };
        extra.push((tm, pm));
        frontier.push((t0, p0, tm, pm));
        frontier.push((tm, pm, t1, p1));
    }
    out.extend(extra);
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Trace {
        times: out.iter().map(|&(t, _)| t).collect(),
        points: out.iter().map(|&(_, p)| p).collect(),
        ..trace.clone()
    }
}

/// Minimum Euclidean distance from `z` to the trace polyline (distance to
/// segments, not just vertices).
pub fn dist_to_trace(trace: &Trace, z: Complex64) -> f64 {
    let mut best = f64::INFINITY;
    for w in trace.points.windows(2) {
        best = best.min(point_segment_distance(z, w[0], w[1]));
    }
    if trace.points.len() == 1 {
        best = (z - trace.points[0]).norm();
    }
    best
}

/// Like [`dist_to_trace`], but also reports the length of the polyline
/// segment achieving the minimum. That length bounds how far the sampled
/// polyline can deviate from the underlying curve near the closest approach,
/// so it serves as a resolution estimate for the distance measurement.
pub fn dist_to_trace_with_resolution(trace: &Trace, z: Complex64) -> (f64, f64) {
    let mut best = f64::INFINITY;
    let mut best_len = 0.0;
    for w in trace.points.windows(2) {
        let d = point_segment_distance(z, w[0], w[1]);
        if d < best {
            best = d;
            best_len = (w[1] - w[0]).norm();
        }
    }
    if trace.points.len() == 1 {
        best = (z - trace.points[0]).norm();
    }
    (best, best_len)
}

pub(crate) fn point_segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}
