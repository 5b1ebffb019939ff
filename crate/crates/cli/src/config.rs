use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use erbr_core::empirics::{RecoveryMode, ReplicationConfig};
use erbr_core::identification::PipelineConfig;
use erbr_core::recovery::{FamilyAggregation, FitConfig, RecoveryConfig};
use erbr_core::Error;
use serde::{Deserialize, Serialize};

/// Settings shared by every command. Loaded from `--config`, then overridden
/// by flags. Every field is optional in the file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    /// Consistency tolerance for identification.
    pub tol: Option<f64>,
    pub anchor: Option<usize>,
    pub max_cycle_len: Option<usize>,
    pub random_pairs: Option<usize>,
    pub fit: FitSection,
    pub recovery: RecoverySection,
    pub recovery_mode: Option<RecoveryMode>,
    pub binary_family: Option<String>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitSection {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub grid_step: Option<f64>,
    pub tol: Option<f64>,
    pub candidates: Option<usize>,
    pub aggregation: Option<FamilyAggregation>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RecoverySection {
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub grid_points: Option<usize>,
}

fn positive(name: &str, value: Option<f64>) -> Result<()> {
    match value {
        Some(v) if !(v > 0.0 && v.is_finite()) => Err(Error::Config(format!("{name} must be positive, got {v}")).into()),
        _ => Ok(()),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
            .with_context(|| "reading config")?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        positive("tol", self.tol)?;
        positive("fit.tol", self.fit.tol)?;
        positive("fit.grid_step", self.fit.grid_step)?;
        positive("recovery.lambda_min", self.recovery.lambda_min)?;
        if let (Some(lo), Some(hi)) = (self.fit.lambda_min, self.fit.lambda_max) {
            if lo >= hi {
                bail!(Error::Config(format!("fit interval [{lo}, {hi}] is empty")));
            }
        }
        if self.max_cycle_len.is_some_and(|l| l < 2) {
            bail!(Error::Config("max_cycle_len must be at least 2".into()));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn pipeline(&self) -> PipelineConfig {
        let d = PipelineConfig::default();
        PipelineConfig {
            tol: self.tol.unwrap_or(d.tol),
            anchor: self.anchor.unwrap_or(d.anchor),
            max_cycle_len: self.max_cycle_len.unwrap_or(d.max_cycle_len),
            seed: self.seed(),
            random_pairs: self.random_pairs.unwrap_or(d.random_pairs),
        }
    }

    pub fn fit(&self) -> FitConfig {
        let d = FitConfig::default();
        let f = &self.fit;
        FitConfig {
            lambda_min: f.lambda_min.unwrap_or(d.lambda_min),
            lambda_max: f.lambda_max.unwrap_or(d.lambda_max),
            grid_step: f.grid_step.unwrap_or(d.grid_step),
            tol: f.tol.unwrap_or(d.tol),
            candidates: f.candidates.unwrap_or(d.candidates),
            aggregation: f.aggregation.unwrap_or(d.aggregation),
        }
    }

    pub fn recovery(&self) -> RecoveryConfig {
        let d = RecoveryConfig::default();
        let r = &self.recovery;
        RecoveryConfig {
            lambda_min: r.lambda_min.unwrap_or(d.lambda_min),
            lambda_max: r.lambda_max.unwrap_or(d.lambda_max),
            grid_points: r.grid_points.unwrap_or(d.grid_points),
        }
    }

    pub fn replication(&self) -> ReplicationConfig {
        ReplicationConfig {
            fit: self.fit(),
            recovery: self.recovery(),
            mode: self.recovery_mode.unwrap_or_default(),
            binary_family: self.binary_family.clone(),
            seed: self.seed(),
        }
    }
}
