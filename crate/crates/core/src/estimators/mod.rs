//! Point estimators of the Clayton parameter from a pseudo-sample.
//!
//! * [`mle`]: maximum likelihood on the Kendall density.
//! * [`replica`]: one bootstrap replica of seeds and the paired estimates it
//!   yields.
//! * [`mean_field`]: the known-alpha bootstrap and the smoothed fixed-point
//!   loop built on top of replicas.

mod mean_field;
mod mle;
mod replica;

pub use mean_field::{
    ai_estimate, dummy_ai_estimate, AiConfig, AiEstimate, BootstrapPopulation, DummyEstimate,
    MeanFieldTrace, Provenance, TraceRecord,
};
pub use mle::{log_likelihood, mle, MleFit};
pub(crate) use mean_field::frozen_population;
pub use replica::{
    alpha1_hat, alpha2_from_sums, alpha2_hat, replica_estimate, seed_equation_residual,
    solve_seed, solve_seed_w1, Alpha2Root, RejectionStats, ReplicaEstimate, SeedDraw, SeedReplica,
    SeedSolution, SeedSolver,
};

use crate::copula::Alpha;
use crate::error::{ClaycopError, Result};

pub const DEFAULT_BRACKET: (f64, f64) = (1e-4, 100.0);

/// Search interval for alpha, shared by the likelihood maximiser and the
/// log-statistic root finder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaBracket {
    lower: Alpha,
    upper: Alpha,
}

impl AlphaBracket {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        let (lo, hi) = (Alpha::new(lower)?, Alpha::new(upper)?);
        if lower >= upper {
            return Err(ClaycopError::InvalidBracket { lower, upper });
        }
        Ok(Self { lower: lo, upper: hi })
    }

    pub fn lower(&self) -> f64 {
        self.lower.value()
    }

    pub fn upper(&self) -> f64 {
        self.upper.value()
    }

    pub fn contains(&self, a: f64) -> bool {
        a >= self.lower() && a <= self.upper()
    }
}

impl Default for AlphaBracket {
    fn default() -> Self {
        AlphaBracket::new(DEFAULT_BRACKET.0, DEFAULT_BRACKET.1).unwrap()
    }
}
