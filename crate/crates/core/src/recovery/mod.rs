//! Estimating `λ` and the prior when exact identification is not available:
//! from the binary partitions `{{ω}, {ω}ᶜ}` alone, or by RMSE fitting against
//! empirical bin means.

mod binary;
mod fit;

pub use binary::{
    logistic, logit, recover_from_binary, recovery_equation, BinaryReportSet, RecoveryConfig, RecoveryResult,
};
pub use fit::{
    fit_family_common_lambda, fit_lambda_per_partition, fit_lambda_single, golden_section, rmse, FamilyAggregation,
    FitConfig, FitFormat, FitMethod, FitResult, FitRow, EMPIRICAL_CLIP,
};
