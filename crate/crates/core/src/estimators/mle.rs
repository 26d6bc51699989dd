use log::debug;

use super::AlphaBracket;
use crate::copula::{kendall_pdf, Alpha};
use crate::error::Result;
use crate::pseudo_obs::PseudoSample;

const GRID_POINTS: usize = 400;
const REL_TOL: f64 = 1e-8;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleFit {
    pub alpha: Alpha,
    pub log_likelihood: f64,
    /// The maximiser lies within 1% of a bracket endpoint.
    pub at_boundary: bool,
}

/// `sum_i log k(alpha, t_i)`.
pub fn log_likelihood(pseudo: &PseudoSample, alpha: f64) -> f64 {
    let a = Alpha::new(alpha).expect("positive alpha");
    pseudo.values().iter().map(|&t| kendall_pdf(a, t).ln()).sum()
}

/// Maximum likelihood estimate of alpha from the Kendall density.
///
/// A log-spaced scan over the bracket picks the best cell, then golden
/// section refines inside the neighbouring cells.
pub fn mle(pseudo: &PseudoSample, bracket: AlphaBracket) -> Result<MleFit> {
    let (lo, hi) = (bracket.lower(), bracket.upper());
    let ll = |a: f64| log_likelihood(pseudo, a);

    let (llo, lhi) = (lo.ln(), hi.ln());
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| (llo + (lhi - llo) * i as f64 / (GRID_POINTS - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&a| ll(a)).collect();
    let best = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();

    let mut a = grid[best.saturating_sub(1)];
    let mut b = grid[(best + 1).min(GRID_POINTS - 1)];
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (ll(x1), ll(x2));
    while (b - a) > REL_TOL * 0.5 * (a + b) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = ll(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = ll(x1);
        }
    }
    let mut alpha = 0.5 * (a + b);
    let mut value = ll(alpha);
    // the scan point can beat the refined one when the optimum is an endpoint
    if values[best] > value {
        alpha = grid[best];
        value = values[best];
    }

    let at_boundary = alpha <= lo * 1.01 || alpha >= hi * 0.99;
    if at_boundary {
        debug!("likelihood maximiser {alpha} is at the edge of [{lo}, {hi}]");
    }
    Ok(MleFit {
        alpha: Alpha::new(alpha)?,
        log_likelihood: value,
        at_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{sample_pairs, Alpha};
    use crate::pseudo_obs::{pseudo_sample, BivariateSample};
    use crate::rng::RandomStream;

    fn draw(alpha: f64, m: usize, seed: u64) -> PseudoSample {
        let pairs = sample_pairs(Alpha::new(alpha).unwrap(), m, &mut RandomStream::new(seed, 0));
        pseudo_sample(&BivariateSample::from_pairs(&pairs).unwrap())
    }

    #[test]
    fn local_optimality() {
        let p = draw(2.0, 100, 4);
        let fit = mle(&p, AlphaBracket::default()).unwrap();
        let a = fit.alpha.value();
        assert!(!fit.at_boundary);
        assert!(fit.log_likelihood >= log_likelihood(&p, a * (1.0 + 1e-4)));
        assert!(fit.log_likelihood >= log_likelihood(&p, a * (1.0 - 1e-4)));
    }

    #[test]
    fn stationary() {
        for seed in 0..5 {
            let p = draw(1.7, 100, seed);
            let fit = mle(&p, AlphaBracket::default()).unwrap();
            if fit.at_boundary {
                continue;
            }
            let a = fit.alpha.value();
            let h = 1e-5 * a;
            let d = (log_likelihood(&p, a + h) - log_likelihood(&p, a - h)) / (2.0 * h);
            assert!(d.abs() < 1e-4, "seed {seed}: derivative {d}");
        }
    }

    #[test]
    fn degenerate_concentration_hits_upper_edge() {
        let p = PseudoSample::from_values(vec![1.0; 10]).unwrap();
        let fit = mle(&p, AlphaBracket::default()).unwrap();
        assert!(fit.at_boundary);
        assert!(fit.alpha.value() >= 99.0);
    }
}
