//! Persisted Monte Carlo campaigns: a manifest, raw per-sample CSV shards,
//! and an aggregate summary, all reproducible byte-for-byte from
//! (plan, master_seed). Shards are written atomically so an interrupted
//! campaign resumes from completed shards only.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::crossings::segment_circle_first_param;
use super::stats::wilson_interval;
use super::{sample_seed, McError, TracePlan};
use crate::loewner::dist_to_trace;

fn default_shard_size() -> u64 {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleDef {
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignPlan {
    pub trace: TracePlan,
    /// Query points: per-sample minimum distances are persisted.
    pub points: Vec<QueryPointDef>,
    /// Circles: per-sample first-hit parameters are persisted.
    #[serde(default)]
    pub circles: Vec<CircleDef>,
    pub samples: u64,
    pub master_seed: u64,
    #[serde(default = "default_shard_size")]
    pub shard_size: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryPointDef {
    pub z: [f64; 2],
    pub r: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    plan: CampaignPlan,
    code_version: String,
}

/// Associatively mergeable partial summary of a sample range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialAgg {
    pub samples: u64,
    pub failed: Vec<u64>,
    pub joint_hits: u64,
    pub per_point_hits: Vec<u64>,
    pub circle_hits: Vec<u64>,
}

impl PartialAgg {
    pub fn empty(points: usize, circles: usize) -> Self {
        PartialAgg {
            samples: 0,
            failed: Vec::new(),
            joint_hits: 0,
            per_point_hits: vec![0; points],
            circle_hits: vec![0; circles],
        }
    }

    /// Merge of summaries over disjoint sample ranges; commutative and
    /// associative.
    pub fn merge(mut a: PartialAgg, b: &PartialAgg) -> PartialAgg {
        a.samples += b.samples;
        a.joint_hits += b.joint_hits;
        for (x, y) in a.per_point_hits.iter_mut().zip(&b.per_point_hits) {
            *x += y;
        }
        for (x, y) in a.circle_hits.iter_mut().zip(&b.circle_hits) {
            *x += y;
        }
        a.failed.extend_from_slice(&b.failed);
        a.failed.sort_unstable();
        a
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignAggregate {
    pub samples: u64,
    pub failed: Vec<u64>,
    pub joint_hits: u64,
    pub per_point_hits: Vec<u64>,
    pub circle_hits: Vec<u64>,
    pub p_hat: f64,
    pub wilson: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct CampaignReport {
    pub aggregate: CampaignAggregate,
    pub computed_shards: Vec<u64>,
    pub reused_shards: Vec<u64>,
    pub store_dir: PathBuf,
}

/// One persisted sample row: distances to each point, first-hit parameter
/// for each circle. A failed sample carries NaN distances.
#[derive(Debug, Clone)]
struct SampleRow {
    index: u64,
    dists: Vec<f64>,
    taus: Vec<Option<f64>>,
}

impl SampleRow {
    fn failed(&self) -> bool {
        self.dists.iter().any(|d| d.is_nan())
    }
}

fn shard_path(dir: &Path, shard: u64) -> PathBuf {
    dir.join("shards").join(format!("shard_{shard:05}.csv"))
}

fn render_shard(rows: &[SampleRow], points: usize, circles: usize) -> String {
    let mut s = String::from("sample_index");
    for k in 0..points {
        s.push_str(&format!(",dist_{k}"));
    }
    for k in 0..circles {
        s.push_str(&format!(",tau_{k}"));
    }
    s.push('\n');
    for row in rows {
        s.push_str(&row.index.to_string());
        for d in &row.dists {
            s.push(',');
            s.push_str(&format!("{d}"));
        }
        for t in &row.taus {
            s.push(',');
            if let Some(t) = t {
                s.push_str(&format!("{t}"));
            }
        }
        s.push('\n');
    }
    s
}

fn parse_shard(text: &str, points: usize, circles: usize) -> Result<Vec<SampleRow>, String> {
    let mut lines = text.lines();
    let _header = lines.next().ok_or("missing header")?;
    let mut rows = Vec::new();
    for (ln, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 1 + points + circles {
            return Err(format!("row {ln}: expected {} fields", 1 + points + circles));
        }
        let index: u64 = fields[0].parse().map_err(|_| format!("row {ln}: bad index"))?;
        let dists = fields[1..1 + points]
            .iter()
            .map(|f| f.parse::<f64>().map_err(|_| format!("row {ln}: bad distance")))
            .collect::<Result<Vec<f64>, String>>()?;
        let taus = fields[1 + points..]
            .iter()
            .map(|f| {
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse::<f64>().map(Some).map_err(|_| format!("row {ln}: bad tau"))
                }
            })
            .collect::<Result<Vec<Option<f64>>, String>>()?;
        rows.push(SampleRow { index, dists, taus });
    }
    Ok(rows)
}

fn compute_rows(plan: &CampaignPlan, lo: u64, hi: u64) -> Vec<SampleRow> {
    let points: Vec<Complex64> = plan
        .points
        .iter()
        .map(|p| Complex64::new(p.z[0], p.z[1]))
        .collect();
    (lo..hi)
        .into_par_iter()
        .map(|i| match plan.trace.simulate(sample_seed(plan.master_seed, i)) {
            Ok(trace) => {
                let dists = points.iter().map(|&z| dist_to_trace(&trace, z)).collect();
                let taus = plan
                    .circles
                    .iter()
                    .map(|c| {
                        let center = Complex64::new(c.center[0], c.center[1]);
                        let mut tau = None;
                        for (si, w) in trace.points.windows(2).enumerate() {
                            if let Some(t) =
                                segment_circle_first_param(w[0], w[1], center, c.radius)
                            {
                                tau = Some(si as f64 + t);
                                break;
                            }
                        }
                        tau
                    })
                    .collect();
                SampleRow {
                    index: i,
                    dists,
                    taus,
                }
            }
            Err(_) => SampleRow {
                index: i,
                dists: vec![f64::NAN; points.len()],
                taus: vec![None; plan.circles.len()],
            },
        })
        .collect()
}

fn aggregate_rows(plan: &CampaignPlan, rows: &[SampleRow]) -> PartialAgg {
    let mut agg = PartialAgg::empty(plan.points.len(), plan.circles.len());
    for row in rows {
        agg.samples += 1;
        if row.failed() {
            agg.failed.push(row.index);
            continue;
        }
        let mut joint = true;
        for (k, (&d, p)) in row.dists.iter().zip(&plan.points).enumerate() {
            if d < p.r {
                agg.per_point_hits[k] += 1;
            } else {
                joint = false;
            }
        }
        if joint && !plan.points.is_empty() {
            agg.joint_hits += 1;
        }
        for (k, t) in row.taus.iter().enumerate() {
            if t.is_some() {
                agg.circle_hits[k] += 1;
            }
        }
    }
    agg
}

/// Executes (or resumes) a campaign in `dir`. Completed shards are reused;
/// missing or truncated shards are recomputed from the deterministic seed
/// schedule, so the final aggregate is independent of interruptions.
pub fn run_campaign(plan: &CampaignPlan, dir: &Path) -> Result<CampaignReport, McError> {
    if plan.samples == 0 {
        return Err(McError::NoSamples);
    }
    plan.trace.engine.validate()?;
    fs::create_dir_all(dir.join("shards"))?;

    let manifest_path = dir.join("manifest.json");
    if manifest_path.exists() {
        let existing: Manifest = serde_json::from_str(&fs::read_to_string(&manifest_path)?)?;
        if existing.plan != *plan {
            return Err(McError::StoreMismatch(
                "existing manifest was written by a different plan".into(),
            ));
        }
    } else {
        let manifest = Manifest {
            plan: plan.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        fs::write(&manifest_path, serde_json::to_string_pretty(&manifest)?)?;
    }

    let shard_count = plan.samples.div_ceil(plan.shard_size);
    let mut computed_shards = Vec::new();
    let mut reused_shards = Vec::new();
    let mut total = PartialAgg::empty(plan.points.len(), plan.circles.len());
    for shard in 0..shard_count {
        let lo = shard * plan.shard_size;
        let hi = (lo + plan.shard_size).min(plan.samples);
        let path = shard_path(dir, shard);
        let rows = match fs::read_to_string(&path) {
            Ok(text) => match parse_shard(&text, plan.points.len(), plan.circles.len()) {
                Ok(rows) if rows.len() as u64 == hi - lo => {
                    reused_shards.push(shard);
                    rows
                }
                _ => {
                    // Truncated or malformed shard: recompute it.
                    let rows = compute_rows(plan, lo, hi);
                    write_atomic(&path, &render_shard(&rows, plan.points.len(), plan.circles.len()))?;
                    computed_shards.push(shard);
                    rows
                }
            },
            Err(_) => {
                let rows = compute_rows(plan, lo, hi);
                write_atomic(&path, &render_shard(&rows, plan.points.len(), plan.circles.len()))?;
                computed_shards.push(shard);
                rows
            }
        };
        total = PartialAgg::merge(total, &aggregate_rows(plan, rows.as_slice()));
    }

    let ok_samples = total.samples - total.failed.len() as u64;
    let (p_hat, wilson) = if ok_samples > 0 {
        let p = total.joint_hits as f64 / ok_samples as f64;
        let (lo, hi) = wilson_interval(total.joint_hits as usize, ok_samples as usize);
        (p, [lo, hi])
    } else {
        (0.0, [0.0, 1.0])
    };
    let aggregate = CampaignAggregate {
        samples: total.samples,
        failed: total.failed.clone(),
        joint_hits: total.joint_hits,
        per_point_hits: total.per_point_hits.clone(),
        circle_hits: total.circle_hits.clone(),
        p_hat,
        wilson,
    };
    fs::write(
        dir.join("aggregate.json"),
        serde_json::to_string_pretty(&aggregate)?,
    )?;
    if !aggregate.failed.is_empty() {
        return Err(McError::SampleFailures {
            failed: aggregate.failed.len(),
            total: plan.samples as usize,
            first_index: aggregate.failed[0],
            first_error: "see shard rows with NaN distances".into(),
        });
    }
    Ok(CampaignReport {
        aggregate,
        computed_shards,
        reused_shards,
        store_dir: dir.to_path_buf(),
    })
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
