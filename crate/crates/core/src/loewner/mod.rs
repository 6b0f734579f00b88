//! Numerical radial Loewner engine.
//!
//! The forward flow integrates `dg/dt = g (u + g)/(u - g)` with
//! `u = e^{i lambda(t)}`; the trace is recovered by running the
//! time-reversed flow from a point lifted slightly off the driving
//! singularity. The whole-plane approximant rescales a radial trace in a
//! large disc with a uniformly random starting angle.

mod driving;
mod flow;
mod serialize;
mod trace;

pub use driving::{sample_driving, DrivingPath};
pub use flow::{forward_map_apply, ForwardPoint, LoewnerState};
pub use trace::{
    dist_to_trace, dist_to_trace_with_resolution, refine_trace_near,
    simulate_deterministic_trace, simulate_radial_trace, simulate_whole_plane_approx,
    trace_point, whole_plane_scale, Trace,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("kappa must lie in (0, 8), got {0}")]
    KappaOutOfRange(f64),
    #[error("horizon must be positive, got {0}")]
    BadHorizon(f64),
    #[error("dt must satisfy 0 < dt <= horizon, got dt={dt}, horizon={horizon}")]
    BadStep { dt: f64, horizon: f64 },
    #[error("epsilon must be positive and small, got {0}")]
    BadEpsilon(f64),
    #[error("time {t} outside driving horizon {horizon}")]
    TimeOutOfRange { t: f64, horizon: f64 },
    #[error("backward flow left the unit disc (|z| = {modulus}) at trace time {t}; step size too coarse")]
    BackwardFlowDiverged { t: f64, modulus: f64 },
    #[error("whole-plane disc radius {disc_radius} must be at least 4x the query radius {target_points_radius}")]
    DiscTooSmall {
        disc_radius: f64,
        target_points_radius: f64,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed trace file: {0}")]
    MalformedTrace(String),
}

/// Integration parameters shared by every simulation entry point.
///
/// `dt` is the capacity-time step of the driving grid, `stride` the number of
/// driving steps between consecutive stored trace points, and `epsilon` the
/// lift-off offset of the reverse flow (a convergence knob; acceptance runs
/// an epsilon-halving consistency check).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EngineConfig {
    pub dt: f64,
    pub horizon: f64,
    pub epsilon: f64,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    1
}

impl EngineConfig {
    pub fn new(dt: f64, horizon: f64, epsilon: f64) -> Result<Self, EngineError> {
        let cfg = EngineConfig {
            dt,
            horizon,
            epsilon,
            stride: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if !(self.horizon > 0.0) {
            return Err(EngineError::BadHorizon(self.horizon));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(EngineError::BadStep {
                dt: self.dt,
                horizon: self.horizon,
            });
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.1) {
            return Err(EngineError::BadEpsilon(self.epsilon));
        }
        Ok(())
    }

    /// Horizon that lets the trace approach the target well below the
    /// smallest query radius: conformal radius decays like e^{-t}.
    pub fn default_horizon(disc_radius: f64, r_min: f64) -> f64 {
        (disc_radius / r_min).ln() + 6.0
    }
}

/// Configuration of the large-disc whole-plane approximant.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct WholePlaneConfig {
    /// Radius N of the approximating disc.
    pub disc_radius: f64,
    /// Largest |z_k| among the query points; must satisfy N >= 4 R.
    pub target_points_radius: f64,
    pub kappa: f64,
}

impl WholePlaneConfig {
    pub fn new(disc_radius: f64, target_points_radius: f64, kappa: f64) -> Result<Self, EngineError> {
        if !(kappa > 0.0 && kappa < 8.0) {
            return Err(EngineError::KappaOutOfRange(kappa));
        }
        if !(disc_radius >= 4.0 * target_points_radius && target_points_radius > 0.0) {
            return Err(EngineError::DiscTooSmall {
                disc_radius,
                target_points_radius,
            });
        }
        Ok(WholePlaneConfig {
            disc_radius,
            target_points_radius,
            kappa,
        })
    }
}
