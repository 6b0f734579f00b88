//! Hit-probability estimation: per-sample minimum distances from the trace
//! to each query point, retained so any radius set can be evaluated from
//! one campaign.

use serde::{Deserialize, Serialize};

use super::stats::wilson_interval;
use super::{run_samples, McError, TracePlan};
use crate::bounds::PointSpec;
use crate::loewner::dist_to_trace_with_resolution;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HitResult {
    /// `min_distances[i][k]` = distance from sample i's trace to point k.
    pub min_distances: Vec<Vec<f64>>,
    /// `min_resolutions[i][k]` = length of the polyline segment achieving
    /// that minimum; bounds the measurement error of the distance.
    pub min_resolutions: Vec<Vec<f64>>,
    pub samples: usize,
    /// Joint hit count at the radii carried by the input specs.
    pub hit_count: usize,
    pub p_hat: f64,
    pub wilson: (f64, f64),
}

impl HitResult {
    /// Joint hit count for an alternative radius set over the same samples.
    pub fn count_for_radii(&self, radii: &[f64]) -> usize {
        assert_eq!(radii.len(), self.min_distances.first().map_or(0, Vec::len));
        self.min_distances
            .iter()
            .filter(|d| d.iter().zip(radii).all(|(di, ri)| di < ri))
            .count()
    }

    /// Probability estimate and Wilson interval for an alternative radius set.
    pub fn estimate_for_radii(&self, radii: &[f64]) -> (f64, (f64, f64)) {
        let k = self.count_for_radii(radii);
        (k as f64 / self.samples as f64, wilson_interval(k, self.samples))
    }

    /// Marginal hit count for a single point.
    pub fn marginal_count(&self, point_index: usize, radius: f64) -> usize {
        self.min_distances
            .iter()
            .filter(|d| d[point_index] < radius)
            .count()
    }

    /// Marginal hit counts with each distance perturbed by its measurement
    /// resolution: `(conservative, optimistic)` counts, i.e. samples whose
    /// distance stays below `radius` even after adding the resolution, and
    /// samples that reach `radius` once the resolution is subtracted. The
    /// spread brackets the discretization uncertainty of the estimate.
    pub fn marginal_count_bracket(&self, point_index: usize, radius: f64) -> (usize, usize) {
        let mut low = 0;
        let mut high = 0;
        for (d, s) in self.min_distances.iter().zip(&self.min_resolutions) {
            let di = d[point_index];
            let si = s[point_index];
            if di + si < radius {
                low += 1;
            }
            if di - si < radius {
                high += 1;
            }
        }
        (low, high)
    }
}

/// Estimates `P[dist(trace, z_k) < r_k for all k]` over independent samples.
pub fn estimate_hit_probability(
    plan: &TracePlan,
    specs: &[PointSpec],
    samples: usize,
    master_seed: u64,
) -> Result<HitResult, McError> {
    estimate_hits(plan, specs, samples, master_seed, None)
}

/// Like [`estimate_hit_probability`], but densifies each polyline near the
/// query balls before measuring distances (see [`TracePlan::refine_near`]).
/// Capacity-uniform polylines badly under-resolve brief close approaches —
/// especially boundary excursions — so the unrefined estimator is biased
/// low at radii below the polyline spacing; refinement removes most of that
/// bias at a cost concentrated near the query points. `margin` sets how far
/// outside each ball densification still applies.
pub fn estimate_hit_probability_refined(
    plan: &TracePlan,
    specs: &[PointSpec],
    samples: usize,
    master_seed: u64,
    margin: f64,
) -> Result<HitResult, McError> {
    estimate_hits(plan, specs, samples, master_seed, Some(margin))
}

fn estimate_hits(
    plan: &TracePlan,
    specs: &[PointSpec],
    samples: usize,
    master_seed: u64,
    refine_margin: Option<f64>,
) -> Result<HitResult, McError> {
    let targets: Vec<(num_complex::Complex64, f64)> =
        specs.iter().map(|s| (s.z, s.r)).collect();
    let per_sample = run_samples(plan, samples, master_seed, |trace| {
        let refined = refine_margin
            .and_then(|m| plan.refine_near(trace, &targets, m).ok());
        let t = refined.as_ref().unwrap_or(trace);
        specs
            .iter()
            .map(|s| dist_to_trace_with_resolution(t, s.z))
            .collect::<Vec<(f64, f64)>>()
    })?;
    let min_distances: Vec<Vec<f64>> = per_sample
        .iter()
        .map(|row| row.iter().map(|&(d, _)| d).collect())
        .collect();
    let min_resolutions: Vec<Vec<f64>> = per_sample
        .iter()
        .map(|row| row.iter().map(|&(_, s)| s).collect())
        .collect();
    let radii: Vec<f64> = specs.iter().map(|s| s.r).collect();
    let hit_count = min_distances
        .iter()
        .filter(|d| d.iter().zip(&radii).all(|(di, ri)| di < ri))
        .count();
    let p_hat = hit_count as f64 / samples as f64;
    let wilson = wilson_interval(hit_count, samples);
    Ok(HitResult {
        min_distances,
        min_resolutions,
        samples,
        hit_count,
        p_hat,
        wilson,
    })
}
