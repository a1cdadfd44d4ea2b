//! Fixed-confidence best-arm identification for single-parameter
//! exponential-family bandits.
//!
//! The centre of the crate is the top-two sequential probability ratio
//! test (TT-SPRT): a leader/challenger sampling rule driven by generalized
//! log-likelihood ratios, stopped by a GLLR threshold. Top-two Thompson
//! sampling (TTTS), T3C and uniform sampling are provided as baselines, along
//! with the β-optimal allocation solver, the stopping thresholds and a
//! reproducible Monte Carlo harness.

// `!(x > y)` is used on purpose so NaN lands on the rejecting branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod allocation;
pub mod cli;
pub mod error;
pub mod expfam;
pub mod harness;
pub mod stats;
pub mod thresholds;

pub use algorithms::{PolicyKind, PolicyState, StepOutcome};
pub use allocation::{lower_bound_samples, solve_allocation, transport_cost, AllocationResult};
pub use error::{Error, Result};
pub use expfam::{BanditInstance, RewardFamily};
pub use stats::{gllr, gllr_gaussian, SufficientStats};
pub use thresholds::{ThresholdKind, ThresholdSpec};
