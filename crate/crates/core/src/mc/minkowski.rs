//! Grid-based Minkowski content: `r^{d-2}` times the area of the
//! r-neighborhood of a trace, with rigorous cell-count brackets and a
//! spatial bucket index that prunes segment distance queries exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::bootstrap_mean_interval;
use super::{run_samples, McError, TracePlan};
use crate::loewner::Trace;

/// Region over which the neighborhood area is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Disc { center: [f64; 2], radius: f64 },
    Rect { min: [f64; 2], max: [f64; 2] },
}

impl Region {
    fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Region::Disc { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Region::Rect { min, max } => (min, max),
        }
    }

    fn contains(&self, p: Complex64) -> bool {
        match *self {
            Region::Disc { center, radius } => {
                (p - Complex64::new(center[0], center[1])).norm() <= radius
            }
            Region::Rect { min, max } => {
                p.re >= min[0] && p.re <= max[0] && p.im >= min[1] && p.im <= max[1]
            }
        }
    }

    /// The full unit disc, the default radial-mode region.
    pub fn unit_disc() -> Region {
        Region::Disc {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinkowskiEstimate {
    pub r: f64,
    pub grid_h: f64,
    /// `r^{d-2} * area`.
    pub content: f64,
    pub content_lower: f64,
    pub content_upper: f64,
    /// Cell-count area estimate and its certain brackets: cells entirely
    /// within the neighborhood vs cells possibly meeting it.
    pub area: f64,
    pub area_lower: f64,
    pub area_upper: f64,
    pub cell_count: u64,
}

/// Uniform bucket grid over polyline segments. Queries return the exact
/// minimum distance whenever it is at most `cutoff`; buckets only prune
/// segments that are certainly farther away.
struct SegmentIndex<'a> {
    points: &'a [Complex64],
    cell: f64,
    min: (f64, f64),
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> SegmentIndex<'a> {
    fn build(points: &'a [Complex64], cell: f64) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in points {
            x0 = x0.min(p.re);
            y0 = y0.min(p.im);
            x1 = x1.max(p.re);
            y1 = y1.max(p.im);
        }
        let cols = (((x1 - x0) / cell).floor() as usize + 1).max(1);
        let rows = (((y1 - y0) / cell).floor() as usize + 1).max(1);
        let mut buckets = vec![Vec::new(); cols * rows];
        for (i, w) in points.windows(2).enumerate() {
            let bx0 = (((w[0].re.min(w[1].re) - x0) / cell).floor() as usize).min(cols - 1);
            let bx1 = (((w[0].re.max(w[1].re) - x0) / cell).floor() as usize).min(cols - 1);
            let by0 = (((w[0].im.min(w[1].im) - y0) / cell).floor() as usize).min(rows - 1);
            let by1 = (((w[0].im.max(w[1].im) - y0) / cell).floor() as usize).min(rows - 1);
            for by in by0..=by1 {
                for bx in bx0..=bx1 {
                    buckets[by * cols + bx].push(i as u32);
                }
            }
        }
        SegmentIndex {
            points,
            cell,
            min: (x0, y0),
            cols,
            rows,
            buckets,
        }
    }

    /// Minimum distance from `p` to the polyline, exact if it is at most
    /// `cutoff`; otherwise returns some value greater than `cutoff`.
    fn min_dist(&self, p: Complex64, cutoff: f64) -> f64 {
        let reach = cutoff + self.cell;
        let bx0 = ((p.re - reach - self.min.0) / self.cell).floor().max(0.0) as usize;
        let bx1 = (((p.re + reach - self.min.0) / self.cell).floor() as isize)
            .clamp(0, self.cols as isize - 1) as usize;
        let by0 = ((p.im - reach - self.min.1) / self.cell).floor().max(0.0) as usize;
        let by1 = (((p.im + reach - self.min.1) / self.cell).floor() as isize)
            .clamp(0, self.rows as isize - 1) as usize;
        if bx0 >= self.cols || by0 >= self.rows {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        for by in by0..=by1 {
            for bx in bx0..=bx1 {
                for &si in &self.buckets[by * self.cols + bx] {
                    let i = si as usize;
                    let d = segment_distance(p, self.points[i], self.points[i + 1]);
                    best = best.min(d);
                }
            }
        }
        best
    }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a).re * ab.re + (p - a).im * ab.im) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Estimates `r^{d-2} * Area{z in region : dist(z, trace) < r}` by counting
/// grid cells whose centers lie within r of the polyline. Cells within
/// `r - h*sqrt(2)/2` are entirely inside the neighborhood and cells beyond
/// `r + h*sqrt(2)/2` entirely outside, which yields the reported brackets.
pub fn minkowski_content(
    trace: &Trace,
    d: f64,
    r: f64,
    grid_h: f64,
    region: &Region,
) -> Result<MinkowskiEstimate, McError> {
    if !(grid_h > 0.0) || grid_h > r / 4.0 {
        return Err(McError::GridTooCoarse {
            grid_h,
            limit: r / 4.0,
        });
    }
    let half_diag = grid_h * std::f64::consts::SQRT_2 / 2.0;
    let index = SegmentIndex::build(&trace.points, r.max(grid_h * 4.0));
    let ([x0, y0], [x1, y1]) = region.bounding_box();
    let mut count = 0u64;
    let mut count_lower = 0u64;
    let mut count_upper = 0u64;
    let nx = ((x1 - x0) / grid_h).ceil() as usize;
    let ny = ((y1 - y0) / grid_h).ceil() as usize;
    for iy in 0..ny {
        let cy = y0 + (iy as f64 + 0.5) * grid_h;
        for ix in 0..nx {
            let p = Complex64::new(x0 + (ix as f64 + 0.5) * grid_h, cy);
            if !region.contains(p) {
                continue;
            }
            let dist = index.min_dist(p, r + half_diag);
            if dist < r {
                count += 1;
            }
            if dist < r - half_diag {
                count_lower += 1;
            }
            if dist < r + half_diag {
                count_upper += 1;
            }
        }
    }
    let h2 = grid_h * grid_h;
    let scale = r.powf(d - 2.0);
    Ok(MinkowskiEstimate {
        r,
        grid_h,
        content: scale * count as f64 * h2,
        content_lower: scale * count_lower as f64 * h2,
        content_upper: scale * count_upper as f64 * h2,
        area: count as f64 * h2,
        area_lower: count_lower as f64 * h2,
        area_upper: count_upper as f64 * h2,
        cell_count: count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEntry {
    pub n: usize,
    pub r: f64,
    pub moment: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentTable {
    pub entries: Vec<MomentEntry>,
    /// `contents[i][j]` = content of sample i at radius `r_list[j]`.
    pub contents: Vec<Vec<f64>>,
}

/// Empirical moments `E[content(trace; r)^n]` for `n <= n_max` over a radius
/// list, with seeded percentile-bootstrap intervals (1000 resamples).
pub fn minkowski_moments(
    plan: &TracePlan,
    d: f64,
    n_max: usize,
    r_list: &[f64],
    samples: usize,
    master_seed: u64,
    region: &Region,
) -> Result<MomentTable, McError> {
    if n_max > 4 {
        return Err(McError::MomentOrderTooHigh(n_max));
    }
    let rs = r_list.to_vec();
    let reg = *region;
    let contents = run_samples(plan, samples, master_seed, move |trace| {
        rs.iter()
            .map(|&r| {
                minkowski_content(trace, d, r, r / 8.0, &reg)
                    .map(|e| e.content)
                    .unwrap_or(f64::NAN)
            })
            .collect::<Vec<f64>>()
    })?;
    let mut entries = Vec::new();
    for n in 1..=n_max {
        for (j, &r) in r_list.iter().enumerate() {
            let values: Vec<f64> = contents.iter().map(|c| c[j].powi(n as i32)).collect();
            let boot_seed = master_seed ^ ((n as u64) << 32) ^ j as u64;
            let (moment, lo, hi) = bootstrap_mean_interval(&values, 1000, boot_seed)?;
            entries.push(MomentEntry { n, r, moment, lo, hi });
        }
    }
    Ok(MomentTable { entries, contents })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Mode;
    use crate::loewner::{simulate_deterministic_trace, EngineConfig};

    fn segment_trace() -> Trace {
        // The driving-free trace covers a real segment [tip, 1].
        let cfg = EngineConfig::new(1e-3, 4.0, 1e-7).unwrap().with_stride(10);
        simulate_deterministic_trace(&cfg).unwrap()
    }

    #[test]
    fn segment_neighborhood_matches_closed_form() {
        let trace = segment_trace();
        let tip = trace.points.last().unwrap().re;
        let len = 1.0 - tip;
        let r = 0.02;
        let region = Region::Rect {
            min: [-0.2, -0.2],
            max: [1.2, 0.2],
        };
        let est = minkowski_content(&trace, 1.0, r, r / 8.0, &region).unwrap();
        // Exact area of the r-neighborhood of a length-len segment.
        let exact = 2.0 * r * len + std::f64::consts::PI * r * r;
        assert!(
            est.area_lower <= exact && exact <= est.area_upper,
            "bracket [{}, {}] misses exact {}",
            est.area_lower,
            est.area_upper,
            exact
        );
        // d = 1 content is area / r, close to 2*len + pi*r.
        let expected = 2.0 * len + std::f64::consts::PI * r;
        assert!(
            (est.content - expected).abs() < 0.05 * expected,
            "content {} vs {}",
            est.content,
            expected
        );
    }

    #[test]
    fn saturated_region_gives_region_area() {
        let trace = segment_trace();
        let r = 5.0;
        let region = Region::unit_disc();
        let est = minkowski_content(&trace, 1.5, r, r / 8.0, &region).unwrap();
        // The neighborhood swallows the whole disc; grid pitch is coarse
        // (r/8), so the disc-area count is correspondingly rough.
        assert!(
            (est.area - std::f64::consts::PI).abs() < 0.6,
            "area {}",
            est.area
        );
        assert!((est.content - r.powf(-0.5) * est.area).abs() < 1e-12);
    }

    #[test]
    fn brackets_tighten_under_refinement() {
        let trace = segment_trace();
        let r = 0.05;
        let region = Region::Rect {
            min: [-0.2, -0.2],
            max: [1.2, 0.2],
        };
        let coarse = minkowski_content(&trace, 1.0, r, r / 4.0, &region).unwrap();
        let fine = minkowski_content(&trace, 1.0, r, r / 8.0, &region).unwrap();
        assert!(coarse.area_lower <= coarse.area && coarse.area <= coarse.area_upper);
        let w_coarse = coarse.area_upper - coarse.area_lower;
        let w_fine = fine.area_upper - fine.area_lower;
        assert!(w_fine < w_coarse);
        // Halving the pitch moves the estimate by less than the bracket.
        assert!((fine.area - coarse.area).abs() <= w_coarse);
    }

    #[test]
    fn coarse_grid_rejected() {
        let trace = segment_trace();
        assert!(matches!(
            minkowski_content(&trace, 1.0, 0.02, 0.01, &Region::unit_disc()),
            Err(McError::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn bucket_index_agrees_with_direct_distance() {
        let trace = segment_trace();
        let index = SegmentIndex::build(&trace.points, 0.1);
        for &(x, y) in &[(0.5, 0.03), (0.2, -0.08), (1.05, 0.0), (0.7, 0.099)] {
            let p = Complex64::new(x, y);
            let direct = crate::loewner::dist_to_trace(&trace, p);
            let bucketed = index.min_dist(p, 0.1);
            if direct <= 0.1 {
                assert!((bucketed - direct).abs() < 1e-14);
            } else {
                assert!(bucketed > 0.1);
            }
        }
    }

    #[test]
    fn moments_satisfy_jensen_and_constants() {
        // Constant content across samples: n-th moment is the n-th power and
        // the bootstrap interval collapses.
        let plan = TracePlan {
            mode: Mode::Radial,
            kappa: 0.5,
            engine: EngineConfig::new(5e-3, 0.3, 1e-5).unwrap().with_stride(5),
            disc_radius: None,
        };
        let table = minkowski_moments(
            &plan,
            1.5,
            3,
            &[0.2, 0.1],
            6,
            17,
            &Region::unit_disc(),
        )
        .unwrap();
        assert_eq!(table.contents.len(), 6);
        assert_eq!(table.entries.len(), 6);
        for j in 0..2 {
            let m1 = table.entries[j].moment;
            for n in 2..=3usize {
                let mn = table
                    .entries
                    .iter()
                    .find(|e| e.n == n && e.r == table.entries[j].r)
                    .unwrap()
                    .moment;
                // Jensen: (E X)^n <= E X^n for X >= 0.
                assert!(m1.powi(n as i32) <= mn * (1.0 + 1e-9));
            }
        }
        assert!(matches!(
            minkowski_moments(&plan, 1.5, 5, &[0.2], 2, 1, &Region::unit_disc()),
            Err(McError::MomentOrderTooHigh(5))
        ));
    }
}
