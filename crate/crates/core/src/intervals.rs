//! Confidence intervals read off bootstrap populations.

use crate::copula::Alpha;
use crate::estimators::{AiConfig, BootstrapPopulation, Provenance};
use crate::error::{ClaycopError, Result};
use crate::pseudo_obs::PseudoSample;
use crate::rng::RandomStream;
use crate::stats::{nearest_rank, sorted};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
    /// Number of populations merged to build the interval.
    pub pooled_count: usize,
}

impl ConfidenceInterval {
    pub fn contains(&self, alpha: f64) -> bool {
        self.lower <= alpha && alpha <= self.upper
    }
}

/// Population of independent replicas with seeds solved under the frozen
/// `alpha_tilde`. Replica `r` draws from `stream.child(r)`.
pub fn ci_resample_population(
    pseudo: &PseudoSample,
    alpha_tilde: Alpha,
    n_replicas: usize,
    config: &AiConfig,
    stream: &RandomStream,
) -> Result<BootstrapPopulation> {
    crate::estimators::frozen_population(
        pseudo,
        alpha_tilde,
        n_replicas,
        config,
        stream,
        Provenance::CiResample,
    )
    .map(|(pop, _)| pop)
}

/// Nearest-rank quantiles at `(1 - level) / 2` and `1 - (1 - level) / 2` of
/// the union of `populations`.
pub fn confidence_interval(
    populations: &[&BootstrapPopulation],
    level: f64,
) -> Result<ConfidenceInterval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(ClaycopError::Config(format!("level must be in (0, 1), got {level}")));
    }
    let merged: Vec<f64> = populations
        .iter()
        .flat_map(|p| p.estimates().iter().copied())
        .collect();
    if merged.is_empty() {
        return Err(ClaycopError::Empty("populations"));
    }
    let merged = sorted(&merged);
    let tail = (1.0 - level) / 2.0;
    Ok(ConfidenceInterval {
        lower: nearest_rank(&merged, tail),
        upper: nearest_rank(&merged, 1.0 - tail),
        level,
        pooled_count: populations.len(),
    })
}

/// Fraction of intervals that contain `true_alpha`.
pub fn coverage(intervals: &[ConfidenceInterval], true_alpha: Alpha) -> Result<f64> {
    if intervals.is_empty() {
        return Err(ClaycopError::Empty("intervals"));
    }
    let hits = intervals
        .iter()
        .filter(|ci| ci.contains(true_alpha.value()))
        .count();
    Ok(hits as f64 / intervals.len() as f64)
}
