//! Conditional method confidence sets and conditional predictive ability tests.
//!
//! The crate is organised by subsystem:
//!
//! - [`panel`]: loss panels, state series, state partitions and relative losses.
//! - [`statsutil`]: seeded random streams and the few distribution functions used.
//! - [`bootstrap`]: circular block bootstrap indices and centered bootstrap means.
//! - [`mcs`]: the sequential `T_max` elimination procedure, unconditionally and per state.
//! - [`cpa`]: Wald-type conditional predictive ability test, statewise t-tests, the
//!   sign-based selection rule and the closed-form two-state covariance algebra.
//! - [`losses`]: joint VaR/ES scoring loss, liquidity-horizon ES aggregation and
//!   stress-window state construction.
//! - [`simlab`]: Monte Carlo designs for power, rejection-rate and rejection-region studies.

// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod cpa;
pub mod error;
pub mod losses;
pub mod mcs;
pub mod panel;
pub mod simlab;
pub mod statsutil;

pub use error::{Error, Result};
pub use panel::{
    compute_relative_losses, partition_by_state, ConfidenceSetResult, EliminationRecord, LossPanel,
    RelativeLoss, RunStatus, StatePartition, StateSeries,
};
pub use statsutil::RandomStream;
