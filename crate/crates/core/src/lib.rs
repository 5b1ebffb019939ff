//! Entropy-regularized belief reporting over partitions.
//!
//! An agent with benchmark prior `π` reports, on a partition `P`, the belief
//! that minimizes `λ·KL(μ‖π_P) − (1−λ)·H(μ)`; the solution is
//! `μ(E) ∝ π(E)^λ`. The crate computes such reports, tests observed reports
//! for consistency with the model and recovers `(λ, π)`, fits `λ` to
//! empirical bin means, and diagnoses conjunction fallacies.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divergence;
pub mod empirics;
pub mod error;
pub mod fallacy;
pub mod identification;
pub mod recovery;
pub mod reporting;
pub mod space;
pub mod variational;

pub use error::{Error, Result};
pub use reporting::{erbr_report, BeliefReport, Lambda};
pub use space::{Event, Partition, Prior, StateSpace};
