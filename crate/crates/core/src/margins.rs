//! Marginal distributions for composing copula draws into observable data.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::copula::{sample_pair, Alpha, UnitPair};
use crate::error::{ClaycopError, Result};
use crate::pseudo_obs::BivariateSample;
use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MarginSpec {
    /// `F(x) = 1 - exp(-rate x)` on `x > 0`.
    NegativeExponential { rate: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl MarginSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            MarginSpec::NegativeExponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                Err(ClaycopError::Config(format!("exponential rate must be positive, got {rate}")))
            }
            MarginSpec::Gaussian { mean, std } if !(std > 0.0 && std.is_finite() && mean.is_finite()) => {
                Err(ClaycopError::Config(format!("gaussian needs finite mean and positive std, got ({mean}, {std})")))
            }
            _ => Ok(()),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginSpec::NegativeExponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            MarginSpec::Gaussian { mean, std } => standard_normal().cdf((x - mean) / std),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match *self {
            MarginSpec::NegativeExponential { rate } => -(-u).ln_1p() / rate,
            MarginSpec::Gaussian { mean, std } => mean + std * standard_normal().inverse_cdf(u),
        }
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Copula draws pushed through the margin quantile functions, returned
/// together with the underlying uniform pairs.
pub fn sklar_compose_with_uniforms(
    margins: (MarginSpec, MarginSpec),
    alpha: Alpha,
    m: usize,
    stream: &mut RandomStream,
) -> Result<(BivariateSample, Vec<UnitPair>)> {
    margins.0.validate()?;
    margins.1.validate()?;
    let pairs: Vec<UnitPair> = (0..m).map(|_| sample_pair(alpha, stream)).collect();
    let points = pairs
        .iter()
        .map(|p| (margins.0.quantile(p.u1.value()), margins.1.quantile(p.u2.value())))
        .collect();
    Ok((BivariateSample::new(points)?, pairs))
}

pub fn sklar_compose(
    margins: (MarginSpec, MarginSpec),
    alpha: Alpha,
    m: usize,
    stream: &mut RandomStream,
) -> Result<BivariateSample> {
    sklar_compose_with_uniforms(margins, alpha, m, stream).map(|(s, _)| s)
}
