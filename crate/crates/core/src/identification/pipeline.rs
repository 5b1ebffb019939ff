use serde::Serialize;

use super::{
    check_cyclical_independence, check_regularity, identify_erbr, recover_support, BeliefCollection, CycleReport,
    ErbrIdentification, Identification, NotErbrReason, RegularityReport, VerificationSet,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub tol: f64,
    /// Anchor state index; defaults to the first state.
    pub anchor: usize,
    pub max_cycle_len: usize,
    /// Seeds cycle sampling and the random verification pairs.
    pub seed: u64,
    pub random_pairs: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tol: 1e-8,
            anchor: 0,
            max_cycle_len: 4,
            seed: 0,
            random_pairs: 100,
        }
    }
}

/// Outcome of the identification pipeline: the first failing check, or the
/// identified parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "diagnosis", rename_all = "snake_case")]
pub enum Diagnosis {
    Identified(ErbrIdentification),
    UniformDegenerate { lambda: f64, max_log_support: f64 },
    RegularityFailed(RegularityReport),
    CyclicalIndependenceFailed(CycleReport),
    NotErbr { reason: NotErbrReason, residual: f64 },
}

impl Diagnosis {
    /// True for the two outcomes consistent with the model.
    pub fn is_consistent(&self) -> bool {
        matches!(self, Diagnosis::Identified(_) | Diagnosis::UniformDegenerate { .. })
    }
}

pub fn full_pipeline(collection: &BeliefCollection, tol: f64) -> Result<Diagnosis> {
    full_pipeline_with(
        collection,
        &PipelineConfig {
            tol,
            ..PipelineConfig::default()
        },
    )
}

/// Regularity, then cyclical independence, then support recovery and power
/// additivity.
pub fn full_pipeline_with(collection: &BeliefCollection, config: &PipelineConfig) -> Result<Diagnosis> {
    if config.anchor >= collection.space().len() {
        return Err(Error::structural(format!("anchor index {} out of range", config.anchor)));
    }
    let regularity = check_regularity(collection, config.tol)?;
    if !regularity.passed {
        return Ok(Diagnosis::RegularityFailed(regularity));
    }
    let cycles = check_cyclical_independence(collection, config.max_cycle_len, config.tol, config.seed)?;
    if !cycles.passed {
        return Ok(Diagnosis::CyclicalIndependenceFailed(cycles));
    }
    let support = recover_support(collection, config.anchor, config.tol)?;
    let verification = VerificationSet::Default {
        random_pairs: config.random_pairs,
        exhaustive_max_states: 8,
        seed: config.seed,
    };
    Ok(match identify_erbr(&support, config.tol, &verification)? {
        Identification::Erbr(id) => Diagnosis::Identified(id),
        Identification::UniformDegenerate { lambda, max_log_support } => {
            Diagnosis::UniformDegenerate { lambda, max_log_support }
        }
        Identification::NotErbr { reason, residual } => Diagnosis::NotErbr { reason, residual },
    })
}
