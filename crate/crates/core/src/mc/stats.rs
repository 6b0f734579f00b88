//! Interval and regression utilities shared by the estimation routines.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use super::McError;

/// 97.5th percentile of the standard normal, for 95% intervals.
const Z95: f64 = 1.959963984540054;

/// Wilson score interval for a binomial proportion at 95% confidence.
/// Valid for small counts, including 0 and n.
pub fn wilson_interval(successes: usize, n: usize) -> (f64, f64) {
    assert!(n > 0 && successes <= n);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    // Boundary cases are exact analytically; guard against rounding drift.
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == n {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

/// Weighted least-squares fit of `log p` against `log r` over a radius sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExponentFit {
    pub radii: Vec<f64>,
    pub log_p: Vec<f64>,
    pub log_p_stderr: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    /// Indices of sweep entries dropped because p = 0.
    pub dropped: Vec<usize>,
}

/// Fits `log p = intercept + slope * log r` by weighted least squares, with
/// weights `1/stderr_log^2` where `stderr_log = stderr/p` (delta method).
/// Entries with `p = 0` are dropped and flagged, never corrected.
pub fn fit_exponent(sweep: &[(f64, f64, f64)]) -> Result<ExponentFit, McError> {
    let mut radii = Vec::new();
    let mut log_p = Vec::new();
    let mut sig = Vec::new();
    let mut dropped = Vec::new();
    for (i, &(r, p, se)) in sweep.iter().enumerate() {
        if p <= 0.0 {
            dropped.push(i);
            continue;
        }
        if !(r > 0.0) {
            return Err(McError::DegenerateFit);
        }
        radii.push(r);
        log_p.push(p.ln());
        sig.push((se / p).max(1e-9));
    }
    let m = radii.len();
    if m < 3 {
        return Err(McError::DegenerateFit);
    }
    let w: Vec<f64> = sig.iter().map(|s| 1.0 / (s * s)).collect();
    let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let sw: f64 = w.iter().sum();
    let xbar: f64 = w.iter().zip(&x).map(|(wi, xi)| wi * xi).sum::<f64>() / sw;
    let ybar: f64 = w.iter().zip(&log_p).map(|(wi, yi)| wi * yi).sum::<f64>() / sw;
    let sxx: f64 = w.iter().zip(&x).map(|(wi, xi)| wi * (xi - xbar).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(McError::DegenerateFit);
    }
    let sxy: f64 = w
        .iter()
        .zip(&x)
        .zip(&log_p)
        .map(|((wi, xi), yi)| wi * (xi - xbar) * (yi - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    Ok(ExponentFit {
        radii,
        log_p,
        log_p_stderr: sig,
        slope,
        slope_stderr: (1.0 / sxx).sqrt(),
        intercept,
        dropped,
    })
}

/// Percentile bootstrap for a sample mean: returns (mean, lo, hi) at 95%,
/// reproducible from `seed`.
pub fn bootstrap_mean_interval(
    values: &[f64],
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64, f64), McError> {
    if values.is_empty() || resamples == 0 {
        return Err(McError::NoSamples);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut s = 0.0;
            for _ in 0..n {
                s += values[rng.gen_range(0..n)];
            }
            s / n as f64
        })
        .collect();
    means.sort_by(|a, b| a.total_cmp(b));
    let pick = |q: f64| means[((resamples - 1) as f64 * q).round() as usize];
    Ok((mean, pick(0.025), pick(0.975)))
}
