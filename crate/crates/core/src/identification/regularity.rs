use serde::Serialize;

use super::BeliefCollection;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ViolationKind {
    NonPositive { value: f64 },
    Sum { sum: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityViolation {
    pub record: usize,
    pub partition: String,
    /// Offending bin; `None` for a sum violation.
    pub bin: Option<usize>,
    #[serde(flatten)]
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityReport {
    pub passed: bool,
    pub violations: Vec<RegularityViolation>,
}

/// Every report must be strictly positive and sum to one within `tol`.
pub fn check_regularity(collection: &BeliefCollection, tol: f64) -> Result<RegularityReport> {
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    if collection.is_empty() {
        return Err(Error::structural("empty belief collection"));
    }
    let mut violations = Vec::new();
    for (r, obs) in collection.records().iter().enumerate() {
        for (b, &p) in obs.probs.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                violations.push(RegularityViolation {
                    record: r,
                    partition: obs.partition.describe(),
                    bin: Some(b),
                    kind: ViolationKind::NonPositive { value: p },
                });
            }
        }
        let sum: f64 = obs.probs.iter().sum();
        if !((sum - 1.0).abs() <= tol) {
            violations.push(RegularityViolation {
                record: r,
                partition: obs.partition.describe(),
                bin: None,
                kind: ViolationKind::Sum { sum },
            });
        }
    }
    Ok(RegularityReport {
        passed: violations.is_empty(),
        violations,
    })
}
