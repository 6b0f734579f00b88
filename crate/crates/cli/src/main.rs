//! Batch front end: experiment plans in, tables and CSV/JSON reports out.
//!
//! Exit codes: 0 success, 1 validation failure, 2 runtime failure,
//! 3 statistical check failure.

mod plan;
mod report;

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use radial_sle::bounds::{evaluate_kernel_query, radial_bound_kernel, whole_plane_bound_kernel, KernelQuery, Mode};
use radial_sle::geometry::SleParams;
use radial_sle::mc::{
    estimate_hit_probability, fit_exponent, minkowski_moments, sample_seed, Region,
};

use plan::{ExperimentPlan, Overrides};
use report::{domination_summary, render_sweep_csv, render_sweep_table, SweepRow};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
    Statistical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Statistical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) | CliError::Statistical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "sle",
    about = "Simulation and verification toolkit for radial and whole-plane SLE"
)]
struct Cli {
    /// Worker threads (default: hardware parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct PlanArgs {
    /// Experiment plan (JSON).
    #[arg(long)]
    plan: PathBuf,
    /// Override the plan's sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Override the plan's master seed.
    #[arg(long)]
    master_seed: Option<u64>,
    /// Override the plan's kappa.
    #[arg(long)]
    kappa: Option<f64>,
    /// Output directory (flag > plan > SLE_OUTPUT_DIR > cwd).
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl PlanArgs {
    fn load(&self) -> Result<ExperimentPlan, CliError> {
        let ov = Overrides {
            samples: self.samples,
            master_seed: self.master_seed,
            kappa: self.kappa,
            output_dir: self.output_dir.clone(),
        };
        ExperimentPlan::load(&self.plan, &ov)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate traces and write them as binary (and optionally CSV) files.
    Simulate {
        #[command(flatten)]
        plan: PlanArgs,
        /// Also write each trace as CSV.
        #[arg(long)]
        csv: bool,
    },
    /// Run a hit-probability sweep and check kernel domination.
    VerifyBounds {
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Estimate Minkowski-content moments over a radius grid.
    Minkowski {
        #[command(flatten)]
        plan: PlanArgs,
    },
    /// Evaluate a bound kernel from a JSON query (file or stdin).
    Kernel {
        /// Query file; reads stdin when omitted.
        #[arg(long)]
        query: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let result = match cli.cmd {
        Cmd::Simulate { plan, csv } => plan.load().and_then(|p| cmd_simulate(&p, csv)),
        Cmd::VerifyBounds { plan } => plan.load().and_then(|p| cmd_verify_bounds(&p)),
        Cmd::Minkowski { plan } => plan.load().and_then(|p| cmd_minkowski(&p)),
        Cmd::Kernel { query } => cmd_kernel(query.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn cmd_simulate(plan: &ExperimentPlan, csv: bool) -> Result<(), CliError> {
    let dir = plan.output_dir();
    fs::create_dir_all(&dir).map_err(io_err)?;
    let tp = plan.trace_plan();
    for i in 0..plan.samples as u64 {
        let seed = sample_seed(plan.master_seed, i);
        let trace = tp.simulate(seed).map_err(|e| CliError::Runtime(e.to_string()))?;
        let stem = format!("trace_{i:05}_{seed:016x}");
        let mut f = fs::File::create(dir.join(format!("{stem}.bin"))).map_err(io_err)?;
        trace.write_binary(&mut f).map_err(io_err)?;
        if csv {
            let mut f = fs::File::create(dir.join(format!("{stem}.csv"))).map_err(io_err)?;
            trace.write_csv(&mut f).map_err(io_err)?;
        }
    }
    fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(plan).map_err(io_err)?,
    )
    .map_err(io_err)?;
    println!(
        "wrote {} trace file(s) to {}",
        plan.samples,
        dir.display()
    );
    Ok(())
}

fn cmd_verify_bounds(plan: &ExperimentPlan) -> Result<(), CliError> {
    if plan.points.is_empty() || plan.radius_sweep.is_empty() {
        return Err(CliError::Validation(
            "verify-bounds needs points and a radius sweep".into(),
        ));
    }
    let params =
        SleParams::new(plan.kappa).map_err(|e| CliError::Validation(e.to_string()))?;
    // One campaign serves every level: per-sample distances are retained.
    let base_specs = plan.resolve_points_at(&plan.radius_sweep[0])?;
    let hits = estimate_hit_probability(
        &plan.trace_plan(),
        &base_specs,
        plan.samples,
        plan.master_seed,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut rows = Vec::new();
    for (level, radii) in plan.radius_sweep.iter().enumerate() {
        let specs = plan.resolve_points_at(radii)?;
        let kernel = match plan.mode {
            Mode::Radial => radial_bound_kernel(&params, &specs),
            Mode::WholePlane => whole_plane_bound_kernel(&params, &specs),
        }
        .map_err(|e| CliError::Validation(e.to_string()))?;
        let (p_hat, (wilson_lo, wilson_hi)) = hits.estimate_for_radii(radii);
        let r_geom =
            (radii.iter().map(|r| r.ln()).sum::<f64>() / radii.len() as f64).exp();
        rows.push(SweepRow {
            level,
            r_geom,
            p_hat,
            wilson_lo,
            wilson_hi,
            kernel,
            ratio: if kernel > 0.0 { p_hat / kernel } else { 0.0 },
        });
    }

    print!("{}", render_sweep_table(&rows));
    let summary = domination_summary(&rows);
    let fit = fit_exponent(
        &rows
            .iter()
            .map(|r| {
                let se = (r.wilson_hi - r.wilson_lo) / (2.0 * 1.96);
                (r.r_geom, r.p_hat, se)
            })
            .collect::<Vec<_>>(),
    );
    match &fit {
        Ok(f) => println!("slope {:.4} +- {:.4}", f.slope, f.slope_stderr),
        Err(e) => println!("slope: not fitted ({e})"),
    }
    println!(
        "C_hat {:.4} (without finest level {:.4}), domination {}",
        summary.c_hat,
        summary.c_hat_without_finest,
        if summary.stable_within_factor_3 { "pass" } else { "FAIL" }
    );

    let dir = plan.output_dir();
    fs::create_dir_all(&dir).map_err(io_err)?;
    fs::write(dir.join("sweep.csv"), render_sweep_csv(&rows)).map_err(io_err)?;
    let mut summary_json = serde_json::to_value(&summary).map_err(io_err)?;
    if let Ok(f) = &fit {
        summary_json["slope"] = serde_json::json!(f.slope);
        summary_json["slope_stderr"] = serde_json::json!(f.slope_stderr);
    }
    fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary_json).map_err(io_err)?,
    )
    .map_err(io_err)?;

    if summary.stable_within_factor_3 {
        Ok(())
    } else {
        Err(CliError::Statistical(
            "kernel domination constant unstable across the sweep".into(),
        ))
    }
}

fn cmd_minkowski(plan: &ExperimentPlan) -> Result<(), CliError> {
    let mink = plan
        .minkowski
        .as_ref()
        .ok_or_else(|| CliError::Validation("plan lacks a minkowski section".into()))?;
    let d = mink.dimension.unwrap_or_else(|| plan.dimension());
    let region = mink.region.unwrap_or_else(Region::unit_disc);
    let table = minkowski_moments(
        &plan.trace_plan(),
        d,
        mink.n_max,
        &mink.radii,
        plan.samples,
        plan.master_seed,
        &region,
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    let mut csv = String::from("n,r,moment,boot_lo,boot_hi\n");
    println!(
        "{:>3} {:>10} {:>14} {:>14} {:>14}",
        "n", "r", "moment", "boot_lo", "boot_hi"
    );
    for e in &table.entries {
        println!(
            "{:>3} {:>10.5} {:>14.6} {:>14.6} {:>14.6}",
            e.n, e.r, e.moment, e.lo, e.hi
        );
        csv.push_str(&format!("{},{},{},{},{}\n", e.n, e.r, e.moment, e.lo, e.hi));
    }
    let dir = plan.output_dir();
    fs::create_dir_all(&dir).map_err(io_err)?;
    fs::write(dir.join("moments.csv"), csv).map_err(io_err)?;
    Ok(())
}

fn cmd_kernel(query_path: Option<&std::path::Path>) -> Result<(), CliError> {
    let text = match query_path {
        Some(p) => fs::read_to_string(p).map_err(io_err)?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(io_err)?;
            s
        }
    };
    let query: KernelQuery = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("malformed kernel query: {e}")))?;
    let resp =
        evaluate_kernel_query(&query).map_err(|e| CliError::Validation(e.to_string()))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&resp).map_err(io_err)?
    );
    Ok(())
}
