//! Concentric-circle families: validation of the structural hypotheses and
//! construction of the pruned, partitioned family from a point list.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::PointSpec;

/// Relative tolerance for the geometric-ratio check.
const RATIO_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum FamilyError {
    #[error("group {group} is empty")]
    EmptyGroup { group: usize },
    #[error("group {group} has nonpositive radius at index {index}")]
    BadGroupRadius { group: usize, index: usize },
    #[error("group {group} radii ratio at index {index} is {ratio}, expected 1/4")]
    RatioNotQuarter {
        group: usize,
        index: usize,
        ratio: f64,
    },
    #[error("annuli of groups {group_a} and {group_b} overlap")]
    OverlappingAnnuli { group_a: usize, group_b: usize },
    #[error("circle {index} of group {group} passes through or encloses the anchor {anchor}")]
    CircleTouchesAnchor {
        group: usize,
        index: usize,
        anchor: Complex64,
    },
    #[error("points {0} and {1} coincide")]
    DuplicatePoints(usize, usize),
}

/// Concentric circles around one center, radii strictly descending with
/// common ratio 1/4.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleGroup {
    pub center: Complex64,
    pub y: f64,
    pub radii: Vec<f64>,
}

impl CircleGroup {
    /// Largest radius, the first circle a curve from outside can meet.
    pub fn max_radius(&self) -> f64 {
        self.radii[0]
    }

    /// Smallest radius, the innermost circle.
    pub fn min_radius(&self) -> f64 {
        *self.radii.last().unwrap()
    }
}

/// A partitioned family of circle groups. The structural hypotheses
/// (ratio 1/4 in each group, mutually disjoint closed annuli, no circle
/// touching 0 or 1) are checked by `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleFamily {
    pub groups: Vec<CircleGroup>,
}

impl CircleFamily {
    /// All circles as (group index, center, radius), outermost first within
    /// each group.
    pub fn circles(&self) -> impl Iterator<Item = (usize, Complex64, f64)> + '_ {
        self.groups
            .iter()
            .enumerate()
            .flat_map(|(gi, g)| g.radii.iter().map(move |&r| (gi, g.center, r)))
    }

    pub fn circle_count(&self) -> usize {
        self.groups.iter().map(|g| g.radii.len()).sum()
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        let anchors = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for (gi, g) in self.groups.iter().enumerate() {
            if g.radii.is_empty() {
                return Err(FamilyError::EmptyGroup { group: gi });
            }
            for (i, &r) in g.radii.iter().enumerate() {
                if !(r > 0.0) {
                    return Err(FamilyError::BadGroupRadius { group: gi, index: i });
                }
                for a in anchors {
                    if (g.center - a).norm() <= r {
                        return Err(FamilyError::CircleTouchesAnchor {
                            group: gi,
                            index: i,
                            anchor: a,
                        });
                    }
                }
            }
            for i in 1..g.radii.len() {
                let ratio = g.radii[i] / g.radii[i - 1];
                if (ratio - 0.25).abs() > RATIO_TOL {
                    return Err(FamilyError::RatioNotQuarter {
                        group: gi,
                        index: i,
                        ratio,
                    });
                }
            }
        }
        for a in 0..self.groups.len() {
            for b in (a + 1)..self.groups.len() {
                let (ga, gb) = (&self.groups[a], &self.groups[b]);
                if !annuli_disjoint(
                    ga.center,
                    ga.min_radius(),
                    ga.max_radius(),
                    gb.center,
                    gb.min_radius(),
                    gb.max_radius(),
                ) {
                    return Err(FamilyError::OverlappingAnnuli {
                        group_a: a,
                        group_b: b,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Closed annuli {a1 <= |z-c1| <= b1} and {a2 <= |z-c2| <= b2} are disjoint
/// iff the outer discs are disjoint or one annulus sits in the other's hole.
fn annuli_disjoint(c1: Complex64, a1: f64, b1: f64, c2: Complex64, a2: f64, b2: f64) -> bool {
    let d = (c1 - c2).norm();
    d > b1 + b2 || d + b2 < a1 || d + b1 < a2
}

/// Circle {|z-c1| = a} meets the closed disc {|z-c2| <= b}.
fn circle_meets_disc(c1: Complex64, a: f64, c2: Complex64, b: f64) -> bool {
    ((c1 - c2).norm() - a).abs() <= b
}

/// Closed annulus {rin <= |z-c1| <= rout} meets the closed disc {|z-c2| <= b}.
fn annulus_meets_disc(c1: Complex64, rin: f64, rout: f64, c2: Complex64, b: f64) -> bool {
    let d = (c1 - c2).norm();
    d - b <= rout && d + b >= rin
}

/// Construction metadata: per point, the circle-column height, the factor by
/// which the radius was snapped up, and the pruning tally.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyBuildMeta {
    pub heights: Vec<usize>,
    pub snap_factors: Vec<f64>,
    pub pruned_circles: Vec<usize>,
    pub groups_per_point: Vec<usize>,
}

/// Builds the pruned, partitioned circle family for a point list.
///
/// For each point j, circles of radius `l_j/4^s` for `s = 1..=h_j`, where
/// `h_j` snaps `r_j` up to `l_j/4^{h_j}` by a factor < 4. Circles meeting a
/// later disc `D_k = {|z-z_k| <= l_k/4}` are removed, and a column is split
/// into maximal runs whose in-between annuli avoid every later disc. The
/// result satisfies the `CircleFamily` invariants by construction, with
/// group count at most `n + 3n(n-1)/2`.
pub fn build_circle_family(
    specs: &[PointSpec],
) -> Result<(CircleFamily, FamilyBuildMeta), FamilyError> {
    let n = specs.len();
    for j in 0..n {
        for k in (j + 1)..n {
            if specs[j].z == specs[k].z {
                return Err(FamilyError::DuplicatePoints(j, k));
            }
        }
    }

    let mut heights = Vec::with_capacity(n);
    let mut snap_factors = Vec::with_capacity(n);
    for s in specs {
        // Largest h with l/4^h >= r; points with r > l/4 contribute no circles.
        let mut h = (s.l / s.r).ln() / 4f64.ln();
        if h < 0.0 {
            h = 0.0;
        }
        let mut h = h.floor() as usize;
        while h > 0 && s.l * 0.25f64.powi(h as i32) < s.r {
            h -= 1;
        }
        heights.push(h);
        snap_factors.push(if h == 0 {
            1.0
        } else {
            s.l * 0.25f64.powi(h as i32) / s.r
        });
    }

    let later_discs = |j: usize| {
        specs[j + 1..]
            .iter()
            .map(|s| (s.z, s.l / 4.0))
            .collect::<Vec<_>>()
    };

    let mut groups = Vec::new();
    let mut pruned_circles = vec![0usize; n];
    let mut groups_per_point = vec![0usize; n];
    for (j, spec) in specs.iter().enumerate() {
        let discs = later_discs(j);
        let radius = |s: usize| spec.l * 0.25f64.powi(s as i32);
        let survives = |s: usize| {
            !discs
                .iter()
                .any(|&(c, b)| circle_meets_disc(spec.z, radius(s), c, b))
        };
        let gap_clear = |s: usize| {
            // Annulus between circles s and s+1 avoids every later disc.
            !discs
                .iter()
                .any(|&(c, b)| annulus_meets_disc(spec.z, radius(s + 1), radius(s), c, b))
        };

        let mut run: Vec<f64> = Vec::new();
        let mut flush = |run: &mut Vec<f64>, groups: &mut Vec<CircleGroup>| {
            if !run.is_empty() {
                groups.push(CircleGroup {
                    center: spec.z,
                    y: spec.y,
                    radii: std::mem::take(run),
                });
                groups_per_point[j] += 1;
            }
        };
        for s in 1..=heights[j] {
            if !survives(s) {
                pruned_circles[j] += 1;
                flush(&mut run, &mut groups);
                continue;
            }
            if !run.is_empty() && !gap_clear(s - 1) {
                flush(&mut run, &mut groups);
            }
            run.push(radius(s));
        }
        flush(&mut run, &mut groups);
    }

    Ok((
        CircleFamily { groups },
        FamilyBuildMeta {
            heights,
            snap_factors,
            pruned_circles,
            groups_per_point,
        },
    ))
}
