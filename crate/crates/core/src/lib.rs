#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons deliberately reject NaN
//! Estimation of the bivariate Clayton copula parameter.
//!
//! The crate provides the copula primitives, Kendall pseudo-observations, a
//! maximum likelihood baseline, the bootstrap fixed-point estimator with its
//! confidence intervals, and a deterministic experiment harness.

pub mod cli;
pub mod copula;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod intervals;
pub mod io;
pub mod margins;
pub mod pseudo_obs;
pub mod rng;
pub mod stats;

pub use copula::{Alpha, UnitPair, UnitValue};
pub use error::{ClaycopError, Result};
pub use rng::RandomStream;
