//! First-crossing extraction on trace polylines and ordered-event
//! frequencies for nested circle systems.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::stats::wilson_interval;
use super::{run_samples, McError, TracePlan};
use crate::bounds::CircleFamily;
use crate::loewner::Trace;

/// First hit of one circle: the polyline parameter `segment + fraction`
/// where the trace first meets it, or none.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CircleHit {
    pub group: usize,
    pub center: Complex64,
    pub radius: f64,
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub hits: Vec<CircleHit>,
}

impl CrossingRecord {
    /// Indices of hit circles sorted by first-visit parameter.
    pub fn visit_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.hits.len())
            .filter(|&i| self.hits[i].tau.is_some())
            .collect();
        order.sort_by(|&a, &b| self.hits[a].tau.unwrap().total_cmp(&self.hits[b].tau.unwrap()));
        order
    }
}

/// Smallest t in [0, 1] with |a + t(b-a) - c| = rho, if any.
pub(crate) fn segment_circle_first_param(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    rho: f64,
) -> Option<f64> {
    let d = b - a;
    let f = a - c;
    let qa = d.norm_sqr();
    let qb = 2.0 * (f.re * d.re + f.im * d.im);
    let qc = f.norm_sqr() - rho * rho;
    if qa == 0.0 {
        return if qc.abs() == 0.0 { Some(0.0) } else { None };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t1 = (-qb - sq) / (2.0 * qa);
    let t2 = (-qb + sq) / (2.0 * qa);
    for t in [t1, t2] {
        if (0.0..=1.0).contains(&t) {
            return Some(t);
        }
    }
    None
}

/// First-crossing parameter for each circle of the family, scanning
/// segments in order.
pub fn crossing_times(trace: &Trace, family: &CircleFamily) -> CrossingRecord {
    let hits = family
        .circles()
        .map(|(group, center, radius)| {
            let mut tau = None;
            for (i, w) in trace.points.windows(2).enumerate() {
                if let Some(t) = segment_circle_first_param(w[0], w[1], center, radius) {
                    tau = Some(i as f64 + t);
                    break;
                }
            }
            CircleHit {
                group,
                center,
                radius,
                tau,
            }
        })
        .collect();
    CrossingRecord { hits }
}

/// An ordered crossing event: all listed circles are hit, in the listed
/// order of first visits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventSpec {
    pub circles: Vec<(Complex64, f64)>,
}

impl EventSpec {
    pub fn validate(&self) -> Result<(), McError> {
        if self.circles.is_empty() {
            return Err(McError::BadEventShape("empty circle list".into()));
        }
        for (i, &(c, r)) in self.circles.iter().enumerate() {
            if !(r > 0.0) {
                return Err(McError::BadEventShape(format!(
                    "circle {i} has nonpositive radius {r}"
                )));
            }
            for (j, &(c2, r2)) in self.circles[..i].iter().enumerate() {
                if c == c2 && r == r2 {
                    return Err(McError::BadEventShape(format!(
                        "circles {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Whether a single trace realizes the event: every circle hit, first-visit
/// parameters strictly increasing along the listed order.
pub fn event_occurs(trace: &Trace, event: &EventSpec) -> bool {
    let mut last = f64::NEG_INFINITY;
    for &(center, radius) in &event.circles {
        let mut tau = None;
        for (i, w) in trace.points.windows(2).enumerate() {
            if let Some(t) = segment_circle_first_param(w[0], w[1], center, radius) {
                tau = Some(i as f64 + t);
                break;
            }
        }
        match tau {
            Some(t) if t > last => last = t,
            _ => return false,
        }
    }
    true
}

/// Empirical frequency of an ordered crossing event over independent
/// samples, with its Wilson interval.
pub fn ordered_event_frequency(
    plan: &TracePlan,
    event: &EventSpec,
    samples: usize,
    master_seed: u64,
) -> Result<(f64, (f64, f64)), McError> {
    event.validate()?;
    let outcomes = run_samples(plan, samples, master_seed, |tr| event_occurs(tr, event))?;
    let k = outcomes.iter().filter(|&&b| b).count();
    Ok((k as f64 / samples as f64, wilson_interval(k, samples)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{CircleGroup, Mode};
    use crate::loewner::{simulate_deterministic_trace, simulate_radial_trace, EngineConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn det_trace() -> Trace {
        let cfg = EngineConfig::new(1e-3, 3.0, 1e-6).unwrap().with_stride(20);
        simulate_deterministic_trace(&cfg).unwrap()
    }

    #[test]
    fn monotone_real_path_hits_outer_first() {
        // The driving-free trace marches along the reals from 1 toward 0.
        let trace = det_trace();
        let family = CircleFamily {
            groups: vec![CircleGroup {
                center: c(0.5, 0.0),
                y: 0.5,
                radii: vec![0.2, 0.05],
            }],
        };
        let rec = crossing_times(&trace, &family);
        let t_outer = rec.hits[0].tau.expect("outer circle hit");
        let t_inner = rec.hits[1].tau.expect("inner circle hit");
        assert!(t_outer < t_inner);
        assert_eq!(rec.visit_order(), vec![0, 1]);
    }

    #[test]
    fn unreachable_circle_records_none() {
        let trace = det_trace();
        let family = CircleFamily {
            groups: vec![CircleGroup {
                center: c(5.0, 5.0),
                y: 0.0,
                radii: vec![0.01],
            }],
        };
        let rec = crossing_times(&trace, &family);
        assert!(rec.hits[0].tau.is_none());
    }

    #[test]
    fn crossing_parameter_lies_on_circle() {
        let trace = det_trace();
        let (center, radius) = (c(0.5, 0.0), 0.2);
        let family = CircleFamily {
            groups: vec![CircleGroup {
                center,
                y: 0.5,
                radii: vec![radius],
            }],
        };
        let rec = crossing_times(&trace, &family);
        let tau = rec.hits[0].tau.unwrap();
        let i = tau.floor() as usize;
        let frac = tau - i as f64;
        let p = trace.points[i] + (trace.points[i + 1] - trace.points[i]) * frac;
        assert!(((p - center).norm() - radius).abs() < 1e-10);
    }

    #[test]
    fn enclosure_order_on_random_traces() {
        let cfg = EngineConfig::new(2e-3, 1.2, 1e-5).unwrap().with_stride(5);
        for seed in 0..6u64 {
            let trace = simulate_radial_trace(4.0, &cfg, seed).unwrap();
            let family = CircleFamily {
                groups: vec![CircleGroup {
                    center: c(0.4, 0.2),
                    y: 1.0 - c(0.4, 0.2).norm(),
                    // Start point of the trace lies outside the largest circle.
                    radii: vec![0.48, 0.12, 0.03, 0.0075],
                }],
            };
            let rec = crossing_times(&trace, &family);
            // Concentric circles: if an inner one is hit, the outer ones were
            // hit first, by continuity of the path from outside.
            let mut last = f64::NEG_INFINITY;
            let mut seen_gap = false;
            for h in &rec.hits {
                match h.tau {
                    Some(t) => {
                        assert!(!seen_gap, "inner circle hit after a missed outer one");
                        assert!(t >= last, "enclosure order violated");
                        last = t;
                    }
                    None => seen_gap = true,
                }
            }
        }
    }

    #[test]
    fn impossible_order_has_zero_frequency() {
        let plan = TracePlan {
            mode: Mode::Radial,
            kappa: 4.0,
            engine: EngineConfig::new(5e-3, 0.6, 1e-5).unwrap().with_stride(4),
            disc_radius: None,
        };
        // Inner circle listed before its enclosing circle, same center.
        let event = EventSpec {
            circles: vec![(c(0.5, 0.0), 0.05), (c(0.5, 0.0), 0.2)],
        };
        let (freq, _) = ordered_event_frequency(&plan, &event, 12, 3).unwrap();
        assert_eq!(freq, 0.0);
    }

    #[test]
    fn enclosing_everything_event_is_certain_for_whole_plane() {
        // The whole-plane approximant runs from the big disc boundary to 0,
        // so it must cross any circle separating its endpoints.
        let plan = TracePlan {
            mode: Mode::WholePlane,
            kappa: 4.0,
            engine: EngineConfig::new(5e-3, 4.0, 1e-5).unwrap().with_stride(8),
            disc_radius: Some(16.0),
        };
        let event = EventSpec {
            circles: vec![(c(0.3, 0.0), 2.5)],
        };
        let (freq, _) = ordered_event_frequency(&plan, &event, 4, 9).unwrap();
        assert_eq!(freq, 1.0);
    }

    #[test]
    fn malformed_events_rejected() {
        assert!(EventSpec { circles: vec![] }.validate().is_err());
        assert!(EventSpec {
            circles: vec![(c(0.5, 0.0), 0.1), (c(0.5, 0.0), 0.1)]
        }
        .validate()
        .is_err());
        assert!(EventSpec {
            circles: vec![(c(0.5, 0.0), -0.1)]
        }
        .validate()
        .is_err());
    }
}
