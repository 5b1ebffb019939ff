//! Testing observed partition-dependent beliefs for support-theory and ERBR
//! consistency, and recovering the support function, `λ` and the latent prior.
//!
//! The pipeline is: regularity, cyclical independence, constructive support
//! recovery from at most two partitions per event, then power additivity of
//! the support, from which `λ = 1/α` and the prior follow.

mod collection;
mod cycles;
mod pipeline;
mod power;
mod regularity;
mod support;

pub use collection::{BeliefCollection, Observation};
pub use cycles::{check_cyclical_independence, Cycle, CycleReport, EXHAUSTIVE_MAX_PARTITIONS, RANDOM_CYCLES};
pub use pipeline::{full_pipeline, full_pipeline_with, Diagnosis, PipelineConfig};
pub use power::{
    find_alpha, identify_erbr, AlphaSolution, ErbrIdentification, Identification, NotErbrReason,
    VerificationSet,
};
pub use regularity::{check_regularity, RegularityReport, RegularityViolation, ViolationKind};
pub use support::{
    chain_values, chain_partitions, construction_partitions, recover_support, recover_support_on,
    SupportFunction,
};
