//! Multipoint upper-bound kernels with the unknown multiplicative constants
//! stripped: the artifact reports kernels, and the statistical layer fits a
//! single constant per experiment.

mod circle_family;

pub use circle_family::{
    build_circle_family, CircleFamily, CircleGroup, FamilyBuildMeta, FamilyError,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, SleParams};

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("duplicate or anchor-coincident point at index {0}: nearest distance would be 0")]
    DegeneratePoint(usize),
    #[error("radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("radial point must lie in the closed unit disc away from 0 and 1, got {0}")]
    BadRadialPoint(Complex64),
    #[error("whole-plane spec requires 0 < r < |z|, got z={z}, r={r}")]
    BadWholePlaneSpec { z: Complex64, r: f64 },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("unknown mode {0:?} (expected \"radial\" or \"whole-plane\")")]
    UnknownMode(String),
}

/// Geometry mode for point specs and campaigns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "radial")]
    Radial,
    #[serde(rename = "whole-plane")]
    WholePlane,
}

impl Mode {
    /// Anchor points entering the nearest-distance sequence: {0, 1} for
    /// radial, {0} for whole-plane.
    pub fn anchors(&self) -> &'static [Complex64] {
        const RADIAL: &[Complex64] = &[Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        const WHOLE_PLANE: &[Complex64] = &[Complex64::new(0.0, 0.0)];
        match self {
            Mode::Radial => RADIAL,
            Mode::WholePlane => WHOLE_PLANE,
        }
    }
}

/// A query point with its radius, boundary distance `y = 1 - |z|` (radial
/// mode), and nearest-distance `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSpec {
    pub z: Complex64,
    pub r: f64,
    pub y: f64,
    pub l: f64,
}

/// Order-dependent nearest-distance sequence:
/// `l_k = min dist(z_k, anchors ∪ {z_1..z_{k-1}})`.
pub fn l_sequence(points: &[Complex64], anchors: &[Complex64]) -> Result<Vec<f64>, BoundsError> {
    let mut out = Vec::with_capacity(points.len());
    for (k, z) in points.iter().enumerate() {
        let mut l = f64::INFINITY;
        for a in anchors.iter().chain(points[..k].iter()) {
            l = l.min((z - a).norm());
        }
        if l == 0.0 {
            return Err(BoundsError::DegeneratePoint(k));
        }
        out.push(l);
    }
    Ok(out)
}

/// Builds fully resolved point specs for one mode: validates the domain
/// constraints, fills `y` and `l`.
///
/// Whole-plane specs fix `y = 1` (deep interior) so shared code paths reuse
/// `P_y`; this is an internal convention, never exposed.
pub fn resolve_specs(
    mode: Mode,
    points: &[(Complex64, f64)],
) -> Result<Vec<PointSpec>, BoundsError> {
    let zs: Vec<Complex64> = points.iter().map(|(z, _)| *z).collect();
    let ls = l_sequence(&zs, mode.anchors())?;
    let mut specs = Vec::with_capacity(points.len());
    for (&(z, r), &l) in points.iter().zip(&ls) {
        if !(r > 0.0) {
            return Err(BoundsError::BadRadius(r));
        }
        let y = match mode {
            Mode::Radial => {
                let m = z.norm();
                if m > 1.0 + 1e-12 || z == Complex64::new(0.0, 0.0) || z == Complex64::new(1.0, 0.0)
                {
                    return Err(BoundsError::BadRadialPoint(z));
                }
                (1.0 - m).max(0.0)
            }
            Mode::WholePlane => {
                if !(r < z.norm()) {
                    return Err(BoundsError::BadWholePlaneSpec { z, r });
                }
                1.0
            }
        };
        specs.push(PointSpec { z, r, y, l });
    }
    Ok(specs)
}

/// Theorem 1.1 kernel: `prod_k P_{y_k}(r_k ∧ l_k) / P_{y_k}(l_k)`,
/// evaluated in log domain. Lies in (0, 1].
pub fn radial_bound_kernel(params: &SleParams, specs: &[PointSpec]) -> Result<f64, BoundsError> {
    let mut ln = 0.0;
    for s in specs {
        ln += params.ln_py(s.y, s.r.min(s.l))? - params.ln_py(s.y, s.l)?;
    }
    Ok(ln.exp())
}

/// Diagnostic only: the minimum of the radial kernel over all orderings of
/// the input points (the bound depends on the order through `l_k`). Feasible
/// for small n.
pub fn radial_bound_kernel_min_over_orders(
    params: &SleParams,
    points: &[(Complex64, f64)],
) -> Result<f64, BoundsError> {
    let n = points.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut order, 0, &mut |perm| {
        let reordered: Vec<(Complex64, f64)> = perm.iter().map(|&i| points[i]).collect();
        let specs = resolve_specs(Mode::Radial, &reordered)?;
        let k = radial_bound_kernel(params, &specs)?;
        if k < best {
            best = k;
        }
        Ok(())
    })?;
    Ok(best)
}

fn permute(
    order: &mut Vec<usize>,
    k: usize,
    f: &mut impl FnMut(&[usize]) -> Result<(), BoundsError>,
) -> Result<(), BoundsError> {
    if k == order.len() {
        return f(order);
    }
    for i in k..order.len() {
        order.swap(k, i);
        permute(order, k + 1, f)?;
        order.swap(k, i);
    }
    Ok(())
}

/// Theorem 1.2 kernel: `prod_k ((r_k ∧ l_k)/l_k)^{2-d}`.
pub fn whole_plane_bound_kernel(
    params: &SleParams,
    specs: &[PointSpec],
) -> Result<f64, BoundsError> {
    let e = params.interior_exponent();
    let mut ln = 0.0;
    for s in specs {
        if !(s.r < s.z.norm()) {
            return Err(BoundsError::BadWholePlaneSpec { z: s.z, r: s.r });
        }
        ln += e * (s.r.min(s.l) / s.l).ln();
    }
    Ok(ln.exp())
}

/// One-point kernel (Lemma 3.6 form): `P_{y0}(r)/P_{y0}(R)` for `0 < r < R`.
pub fn one_point_kernel(
    params: &SleParams,
    y0: f64,
    r: f64,
    big_r: f64,
) -> Result<f64, BoundsError> {
    if !(r > 0.0 && r < big_r) {
        return Err(BoundsError::BadRadius(r));
    }
    Ok(params.py_ratio(y0, r, big_r)?)
}

/// Theorem 4.1 ordered-crossing kernel:
/// `(r0/R0)^{alpha/4} prod_j P_{y_j}(r_j)/P_{y_j}(R_j)` (constants excluded).
pub fn ordered_crossing_kernel(
    params: &SleParams,
    r0: f64,
    big_r0: f64,
    rings: &[(f64, f64, f64)],
) -> Result<f64, BoundsError> {
    if !(r0 > 0.0 && r0 <= big_r0) {
        return Err(BoundsError::BadRadius(r0));
    }
    let mut ln = (params.alpha() / 4.0) * (r0 / big_r0).ln();
    for &(y, r, big_r) in rings {
        if !(r > 0.0 && r <= big_r) {
            return Err(BoundsError::BadRadius(r));
        }
        ln += params.ln_py(y, r)? - params.ln_py(y, big_r)?;
    }
    Ok(ln.exp())
}

/// Theorem 5.1 kernel over a validated concentric-circle family:
/// `prod_e P_{y_e}(r_e)/P_{y_e}(R_e)` with `r_e`/`R_e` the smallest/largest
/// radius of group `e`.
pub fn concentric_family_kernel(
    params: &SleParams,
    family: &CircleFamily,
) -> Result<f64, BoundsError> {
    family.validate()?;
    let mut ln = 0.0;
    for g in &family.groups {
        ln += params.ln_py(g.y, g.min_radius())? - params.ln_py(g.y, g.max_radius())?;
    }
    Ok(ln.exp())
}

/// JSON query format exposed to the CLI: kappa, mode, and point list.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelQuery {
    pub kappa: f64,
    pub mode: Mode,
    pub points: Vec<QueryPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryPoint {
    pub z: [f64; 2],
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelResponse {
    pub kernel: f64,
    pub l: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn evaluate_kernel_query(query: &KernelQuery) -> Result<KernelResponse, BoundsError> {
    let params = SleParams::new(query.kappa)?;
    let pts: Vec<(Complex64, f64)> = query
        .points
        .iter()
        .map(|p| (Complex64::new(p.z[0], p.z[1]), p.r))
        .collect();
    let specs = resolve_specs(query.mode, &pts)?;
    let kernel = match query.mode {
        Mode::Radial => radial_bound_kernel(&params, &specs)?,
        Mode::WholePlane => whole_plane_bound_kernel(&params, &specs)?,
    };
    Ok(KernelResponse {
        kernel,
        l: specs.iter().map(|s| s.l).collect(),
        y: specs.iter().map(|s| s.y).collect(),
    })
}
