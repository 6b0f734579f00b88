//! Monte Carlo estimation layer: hit-probability campaigns, circle-crossing
//! extraction, Minkowski content, exponent regression, and a resumable
//! on-disk campaign store.

mod boundary;
mod campaign;
mod crossings;
mod hits;
mod minkowski;
mod stats;

pub use boundary::{boundary_min_distance, estimate_boundary_distances, BoundaryDistanceResult};
pub use campaign::{run_campaign, CampaignAggregate, CampaignPlan, CampaignReport, PartialAgg};
pub use crossings::{
    crossing_times, event_occurs, ordered_event_frequency, CircleHit, CrossingRecord, EventSpec,
};
pub use hits::{estimate_hit_probability, estimate_hit_probability_refined, HitResult};
pub use minkowski::{minkowski_content, minkowski_moments, MinkowskiEstimate, MomentEntry, MomentTable, Region};
pub use stats::{bootstrap_mean_interval, fit_exponent, wilson_interval, ExponentFit};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{BoundsError, Mode};
use crate::loewner::{
    simulate_radial_trace, simulate_whole_plane_approx, EngineConfig, EngineError, Trace,
    WholePlaneConfig,
};

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error("at least one sample is required")]
    NoSamples,
    #[error("{failed} of {total} samples failed; first at index {first_index}: {first_error}")]
    SampleFailures {
        failed: usize,
        total: usize,
        first_index: u64,
        first_error: String,
    },
    #[error("regression needs at least 3 points with distinct radii and positive probabilities")]
    DegenerateFit,
    #[error("grid pitch {grid_h} exceeds the resolution floor r/4 = {limit}")]
    GridTooCoarse { grid_h: f64, limit: f64 },
    #[error("moment order {0} exceeds the supported maximum of 4")]
    MomentOrderTooHigh(usize),
    #[error("event shape invalid: {0}")]
    BadEventShape(String),
    #[error("whole-plane sampling requires a disc radius")]
    MissingDiscRadius,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("campaign store mismatch: {0}")]
    StoreMismatch(String),
}

/// splitmix64 finalizer; decorrelates consecutive sample indices.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-sample seed schedule: independent of execution order,
/// so campaigns can be parallelized, sharded, and resumed.
pub fn sample_seed(master_seed: u64, index: u64) -> u64 {
    mix(master_seed ^ mix(index))
}

/// Everything needed to draw one independent trace sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePlan {
    pub mode: Mode,
    pub kappa: f64,
    pub engine: EngineConfig,
    #[serde(default)]
    pub disc_radius: Option<f64>,
}

impl TracePlan {
    pub fn simulate(&self, seed: u64) -> Result<Trace, McError> {
        match self.mode {
            // kappa = 0 is the driving-free regression mode: the trace is a
            // deterministic real segment, independent of the seed.
            Mode::Radial if self.kappa == 0.0 => {
                Ok(crate::loewner::simulate_deterministic_trace(&self.engine)?)
            }
            Mode::Radial => Ok(simulate_radial_trace(self.kappa, &self.engine, seed)?),
            Mode::WholePlane => {
                let n = self.disc_radius.ok_or(McError::MissingDiscRadius)?;
                let wp = WholePlaneConfig::new(n, n / 4.0, self.kappa)?;
                Ok(simulate_whole_plane_approx(&wp, &self.engine, seed)?)
            }
        }
    }

    /// Best-effort densification of a simulated trace near the query balls
    /// (see [`crate::loewner::refine_trace_near`]). Reconstructs the driving
    /// path and frame transform from the trace's own seed, so it applies to
    /// any trace previously produced by [`TracePlan::simulate`].
    pub fn refine_near(
        &self,
        trace: &Trace,
        targets: &[(num_complex::Complex64, f64)],
        margin: f64,
    ) -> Result<Trace, McError> {
        use num_complex::Complex64;
        let scale = match self.mode {
            Mode::Radial => Complex64::new(1.0, 0.0),
            Mode::WholePlane => {
                let n = self.disc_radius.ok_or(McError::MissingDiscRadius)?;
                crate::loewner::whole_plane_scale(n, trace.seed)
            }
        };
        let driving = if self.mode == Mode::Radial && self.kappa == 0.0 {
            crate::loewner::DrivingPath::constant_zero(self.engine.horizon, self.engine.dt)?
        } else {
            crate::loewner::sample_driving(
                self.kappa,
                self.engine.horizon,
                self.engine.dt,
                trace.seed,
            )?
        };
        Ok(crate::loewner::refine_trace_near(
            trace,
            &driving,
            self.engine.epsilon,
            scale,
            targets,
            margin,
        ))
    }
}

/// Runs `samples` independent trace computations in parallel and returns
/// per-sample statistics in index order. Failures are aggregated into a
/// single error listing the first failed index.
pub(crate) fn run_samples<T, F>(
    plan: &TracePlan,
    samples: usize,
    master_seed: u64,
    stat: F,
) -> Result<Vec<T>, McError>
where
    T: Send,
    F: Fn(&Trace) -> T + Sync,
{
    use rayon::prelude::*;
    if samples == 0 {
        return Err(McError::NoSamples);
    }
    let results: Vec<Result<T, McError>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| plan.simulate(sample_seed(master_seed, i)).map(|tr| stat(&tr)))
        .collect();
    let mut out = Vec::with_capacity(samples);
    let mut failed = 0usize;
    let mut first: Option<(u64, String)> = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => {
                failed += 1;
                if first.is_none() {
                    first = Some((i as u64, e.to_string()));
                }
            }
        }
    }
    if let Some((first_index, first_error)) = first {
        return Err(McError::SampleFailures {
            failed,
            total: samples,
            first_index,
            first_error,
        });
    }
    Ok(out)
}
