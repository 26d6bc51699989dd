use serde::{Deserialize, Serialize};

use super::mle::{mle, MleFit};
use super::replica::{RejectionStats, SeedDraw, SeedSolver};
use super::AlphaBracket;
use crate::copula::Alpha;
use crate::error::{ClaycopError, Result};
use crate::pseudo_obs::{ecdf_values, PseudoSample};
use crate::rng::RandomStream;
use crate::stats::median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Dummy,
    FixedPointTail,
    CiResample,
}

/// A multiset of positive alpha estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapPopulation {
    estimates: Vec<f64>,
    provenance: Provenance,
}

impl BootstrapPopulation {
    pub fn new(estimates: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if estimates.is_empty() {
            return Err(ClaycopError::Empty("bootstrap population"));
        }
        if let Some(&bad) = estimates.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
            return Err(ClaycopError::InvalidAlpha(bad));
        }
        Ok(Self { estimates, provenance })
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    pub fn median(&self) -> Alpha {
        Alpha::new(median(&self.estimates)).expect("entries are positive")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub alpha1: f64,
    pub alpha2: f64,
    pub raw: f64,
    pub smoothed: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeanFieldTrace {
    pub records: Vec<TraceRecord>,
}

/// Settings of the bootstrap estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AiConfig {
    pub burn_in_steps: usize,
    pub tail_steps: usize,
    /// Weight of the newest raw estimate in the exponential smoothing.
    pub smoothing_eta: f64,
    pub replica_retry_limit: usize,
    pub alpha_bracket: (f64, f64),
    pub seed_draw: SeedDraw,
}

impl Default for AiConfig {
    fn default() -> Self {
        Self {
            burn_in_steps: 300,
            tail_steps: 300,
            smoothing_eta: 0.1,
            replica_retry_limit: 100,
            alpha_bracket: super::DEFAULT_BRACKET,
            seed_draw: SeedDraw::EcdfPool,
        }
    }
}

impl AiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in_steps == 0 || self.tail_steps == 0 {
            return Err(ClaycopError::Config("burn-in and tail steps must be at least 1".into()));
        }
        if !(self.smoothing_eta > 0.0 && self.smoothing_eta <= 1.0) {
            return Err(ClaycopError::Config(format!(
                "smoothing coefficient must be in (0, 1], got {}",
                self.smoothing_eta
            )));
        }
        if self.replica_retry_limit == 0 {
            return Err(ClaycopError::Config("retry limit must be at least 1".into()));
        }
        self.bracket().map(|_| ())
    }

    pub fn bracket(&self) -> Result<AlphaBracket> {
        AlphaBracket::new(self.alpha_bracket.0, self.alpha_bracket.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DummyEstimate {
    /// Median of the population.
    pub estimate: Alpha,
    pub population: BootstrapPopulation,
    pub rejections: RejectionStats,
}

/// Independent replicas under a frozen reference alpha. Replica `r` uses
/// the substream `stream.child(r)`.
pub(crate) fn frozen_population(
    pseudo: &PseudoSample,
    alpha_ref: Alpha,
    n_replicas: usize,
    config: &AiConfig,
    stream: &RandomStream,
    provenance: Provenance,
) -> Result<(BootstrapPopulation, RejectionStats)> {
    if n_replicas == 0 {
        return Err(ClaycopError::Config("at least one replica is required".into()));
    }
    let bracket = config.bracket()?;
    let solver = SeedSolver::new(alpha_ref, &ecdf_values(pseudo), config.seed_draw);
    let mut rejections = RejectionStats::default();
    let mut estimates = Vec::with_capacity(n_replicas);
    for r in 0..n_replicas {
        let mut sub = stream.child(r as u64);
        let (est, _) = solver.estimate(
            pseudo,
            bracket,
            config.replica_retry_limit,
            &mut sub,
            &mut rejections,
        )?;
        estimates.push(est.alpha.value());
    }
    Ok((BootstrapPopulation::new(estimates, provenance)?, rejections))
}

/// Known-alpha validation mode: `n_replicas` replicas with seeds solved
/// under the true alpha; the point estimate is their median.
pub fn dummy_ai_estimate(
    pseudo: &PseudoSample,
    true_alpha: Alpha,
    n_replicas: usize,
    config: &AiConfig,
    stream: &RandomStream,
) -> Result<DummyEstimate> {
    let (population, rejections) =
        frozen_population(pseudo, true_alpha, n_replicas, config, stream, Provenance::Dummy)?;
    Ok(DummyEstimate {
        estimate: population.median(),
        population,
        rejections,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AiEstimate {
    /// Median of the tail population.
    pub estimate: Alpha,
    pub initial: MleFit,
    pub trace: MeanFieldTrace,
    pub population: BootstrapPopulation,
    pub rejections: RejectionStats,
}

/// Mean-field fixed point.
///
/// Starts from the likelihood estimate; every step solves a fresh replica
/// under the current smoothed alpha and blends the raw paired mean into it
/// with weight `smoothing_eta`. Raw values of the `tail_steps` steps after
/// the burn-in form the returned population.
pub fn ai_estimate(
    pseudo: &PseudoSample,
    config: &AiConfig,
    stream: &mut RandomStream,
) -> Result<AiEstimate> {
    config.validate()?;
    let bracket = config.bracket()?;
    let initial = mle(pseudo, bracket)?;
    let pool = ecdf_values(pseudo);
    let eta = config.smoothing_eta;

    let total = config.burn_in_steps + config.tail_steps;
    let mut current = initial.alpha.value();
    let mut trace = MeanFieldTrace { records: Vec::with_capacity(total) };
    let mut tail = Vec::with_capacity(config.tail_steps);
    let mut rejections = RejectionStats::default();

    for step in 1..=total {
        let solver = SeedSolver::new(Alpha::new(current)?, &pool, config.seed_draw);
        let (est, _) = solver.estimate(
            pseudo,
            bracket,
            config.replica_retry_limit,
            stream,
            &mut rejections,
        )?;
        let raw = est.alpha.value();
        let next = (1.0 - eta) * current + eta * raw;
        if !(next.is_finite() && next > 0.0) {
            log::error!("mean-field update diverged; trace so far: {:?}", trace.records);
            return Err(ClaycopError::NonFinite { step, value: next });
        }
        current = next;
        trace.records.push(TraceRecord {
            step,
            alpha1: est.alpha1.value(),
            alpha2: est.alpha2.value(),
            raw,
            smoothed: current,
        });
        if step > config.burn_in_steps {
            tail.push(raw);
        }
    }

    let population = BootstrapPopulation::new(tail, Provenance::FixedPointTail)?;
    Ok(AiEstimate {
        estimate: population.median(),
        initial,
        trace,
        population,
        rejections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::sample_pairs;
    use crate::pseudo_obs::{pseudo_sample, BivariateSample};

    fn draw(alpha: f64, m: usize, seed: u64) -> PseudoSample {
        let pairs = sample_pairs(Alpha::new(alpha).unwrap(), m, &mut RandomStream::new(seed, 0));
        pseudo_sample(&BivariateSample::from_pairs(&pairs).unwrap())
    }

    #[test]
    fn population_rejects_bad_entries() {
        assert!(BootstrapPopulation::new(vec![], Provenance::Dummy).is_err());
        assert!(BootstrapPopulation::new(vec![1.0, -0.5], Provenance::Dummy).is_err());
    }

    #[test]
    fn single_replica_dummy() {
        let p = draw(1.7, 30, 3);
        let d = dummy_ai_estimate(&p, Alpha::new(1.7).unwrap(), 1, &AiConfig::default(), &RandomStream::new(3, 1)).unwrap();
        assert_eq!(d.population.len(), 1);
        assert_eq!(d.estimate.value(), d.population.estimates()[0]);
    }

    #[test]
    fn single_tail_step() {
        let p = draw(0.8, 30, 4);
        let cfg = AiConfig { burn_in_steps: 5, tail_steps: 1, ..AiConfig::default() };
        let r = ai_estimate(&p, &cfg, &mut RandomStream::new(4, 1)).unwrap();
        assert_eq!(r.population.len(), 1);
        assert_eq!(r.estimate.value(), r.trace.records.last().unwrap().raw);
        assert_eq!(r.trace.records.len(), 6);
    }

    #[test]
    fn deterministic() {
        let p = draw(3.0, 20, 5);
        let cfg = AiConfig { burn_in_steps: 50, tail_steps: 50, ..AiConfig::default() };
        let a = ai_estimate(&p, &cfg, &mut RandomStream::new(5, 1)).unwrap();
        let b = ai_estimate(&p, &cfg, &mut RandomStream::new(5, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn trace_stays_in_bracket() {
        let cfg = AiConfig::default();
        for &(a, m) in &[(0.8, 20), (5.0, 100)] {
            let p = draw(a, m, 6);
            let r = ai_estimate(&p, &cfg, &mut RandomStream::new(6, 1)).unwrap();
            for rec in &r.trace.records {
                assert!(rec.smoothed >= 1e-4 && rec.smoothed <= 100.0);
                assert!(rec.alpha1 > 0.0 && rec.alpha2 > 0.0);
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(AiConfig { tail_steps: 0, ..AiConfig::default() }.validate().is_err());
        assert!(AiConfig { smoothing_eta: 0.0, ..AiConfig::default() }.validate().is_err());
        assert!(AiConfig { alpha_bracket: (2.0, 1.0), ..AiConfig::default() }.validate().is_err());
        assert!(AiConfig::default().validate().is_ok());
    }
}
