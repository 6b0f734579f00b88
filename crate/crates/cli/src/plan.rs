//! Experiment plans: one JSON document per experiment, validated against the
//! library invariants before any compute. Command-line flags override plan
//! fields, which override defaults.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use radial_sle::bounds::{resolve_specs, Mode, PointSpec, QueryPoint};
use radial_sle::geometry::SleParams;
use radial_sle::mc::{Region, TracePlan};
use radial_sle::EngineConfig;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub mode: Mode,
    pub kappa: f64,
    pub engine: EngineConfig,
    #[serde(default)]
    pub disc_radius: Option<f64>,
    #[serde(default)]
    pub points: Vec<QueryPoint>,
    /// Radius sweep levels; each level lists one radius per point.
    #[serde(default)]
    pub radius_sweep: Vec<Vec<f64>>,
    #[serde(default)]
    pub minkowski: Option<MinkowskiPlan>,
    pub samples: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MinkowskiPlan {
    pub n_max: usize,
    pub radii: Vec<f64>,
    #[serde(default)]
    pub region: Option<Region>,
    /// Dimension override; defaults to 1 + kappa/8.
    #[serde(default)]
    pub dimension: Option<f64>,
}

/// Flag-level overrides, applied after the plan file is read.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub samples: Option<usize>,
    pub master_seed: Option<u64>,
    pub kappa: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn load(path: &std::path::Path, ov: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Runtime(format!("cannot read plan {}: {e}", path.display())))?;
        let mut plan: ExperimentPlan = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("malformed plan: {e}")))?;
        if let Some(s) = ov.samples {
            plan.samples = s;
        }
        if let Some(s) = ov.master_seed {
            plan.master_seed = s;
        }
        if let Some(k) = ov.kappa {
            plan.kappa = k;
        }
        if let Some(d) = &ov.output_dir {
            plan.output_dir = Some(d.clone());
        }
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        // kappa = 0 selects the deterministic driving-free mode.
        if self.kappa != 0.0 {
            SleParams::new(self.kappa).map_err(|e| CliError::Validation(e.to_string()))?;
        }
        self.engine
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if self.samples == 0 {
            return Err(CliError::Validation("samples must be at least 1".into()));
        }
        if self.mode == Mode::WholePlane && self.disc_radius.is_none() {
            return Err(CliError::Validation(
                "whole-plane mode requires disc_radius".into(),
            ));
        }
        if !self.points.is_empty() {
            self.resolve_points()?;
        }
        for (i, level) in self.radius_sweep.iter().enumerate() {
            if level.len() != self.points.len() {
                return Err(CliError::Validation(format!(
                    "radius sweep level {i} has {} radii for {} points",
                    level.len(),
                    self.points.len()
                )));
            }
            if level.iter().any(|&r| !(r > 0.0)) {
                return Err(CliError::Validation(format!(
                    "radius sweep level {i} contains a nonpositive radius"
                )));
            }
        }
        if let Some(m) = &self.minkowski {
            if m.n_max == 0 || m.n_max > 4 {
                return Err(CliError::Validation(
                    "minkowski n_max must lie in 1..=4".into(),
                ));
            }
            if m.radii.is_empty() || m.radii.iter().any(|&r| !(r > 0.0)) {
                return Err(CliError::Validation(
                    "minkowski radii must be positive and nonempty".into(),
                ));
            }
            if self.mode == Mode::WholePlane && m.region.is_none() {
                return Err(CliError::Validation(
                    "whole-plane Minkowski runs need an explicit compact region".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn resolve_points(&self) -> Result<Vec<PointSpec>, CliError> {
        let pts: Vec<(Complex64, f64)> = self
            .points
            .iter()
            .map(|p| (Complex64::new(p.z[0], p.z[1]), p.r))
            .collect();
        resolve_specs(self.mode, &pts).map_err(|e| CliError::Validation(e.to_string()))
    }

    /// Point specs with the radii of one sweep level substituted in.
    pub fn resolve_points_at(&self, radii: &[f64]) -> Result<Vec<PointSpec>, CliError> {
        let pts: Vec<(Complex64, f64)> = self
            .points
            .iter()
            .zip(radii)
            .map(|(p, &r)| (Complex64::new(p.z[0], p.z[1]), r))
            .collect();
        resolve_specs(self.mode, &pts).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn trace_plan(&self) -> TracePlan {
        TracePlan {
            mode: self.mode,
            kappa: self.kappa,
            engine: self.engine,
            disc_radius: self.disc_radius,
        }
    }

    pub fn dimension(&self) -> f64 {
        1.0 + self.kappa / 8.0
    }

    /// Flags > plan > environment > current directory.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os("SLE_OUTPUT_DIR").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
