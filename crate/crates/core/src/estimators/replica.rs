//! Seed replicas and the paired sufficient-statistic estimators.
//!
//! Splitting the Kendall CDF as `u = w1 - (w1 - u)` with
//! `w1 = t (alpha + 1) / alpha` and `w1 - u = t^(alpha + 1) / alpha` gives two
//! sampling mechanisms for `t`, one with sufficient statistic `sum t_i`, the
//! other with `sum log t_i`. For a drawn seed `u`, `w1` solves
//! `w1 alpha / (alpha + 1) = (alpha (w1 - u))^(1 / (alpha + 1))`, i.e.
//! `w1 = (alpha + 1) / alpha * K^-1(u)`.

use super::AlphaBracket;
use crate::copula::{kendall_inverse, Alpha, UnitValue};
use crate::error::{ClaycopError, Result};
use crate::pseudo_obs::{EcdfValues, PseudoSample};
use crate::rng::RandomStream;

const ROOT_TOL: f64 = 1e-10;
const ROOT_MAX_ITER: usize = 200;

/// Solution of the seed equation for one `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedSolution {
    pub u: f64,
    /// `K^-1(u)`.
    pub t: f64,
    pub w1: f64,
    /// `w1 - u`, formed as `t^(alpha+1) / alpha` to avoid cancellation.
    pub diff: f64,
    /// `log(w1 - u)`.
    pub log_diff: f64,
}

pub fn solve_seed(alpha: Alpha, u: UnitValue) -> SeedSolution {
    let a = alpha.value();
    let t = kendall_inverse(alpha, u);
    let log_diff = (a + 1.0) * t.ln() - a.ln();
    let diff = log_diff.exp();
    // equals (a + 1) / a * t, but keeps w1 - u accurate when both are tiny
    let w1 = u.value() + diff;
    SeedSolution {
        u: u.value(),
        t,
        w1,
        diff,
        log_diff,
    }
}

pub fn solve_seed_w1(alpha: Alpha, u: UnitValue) -> f64 {
    solve_seed(alpha, u).w1
}

/// `|w1 alpha / (alpha + 1) - (alpha (w1 - u))^(1 / (alpha + 1))|`.
pub fn seed_equation_residual(alpha: Alpha, w1: f64, u: f64) -> f64 {
    let a = alpha.value();
    (w1 * a / (a + 1.0) - (a * (w1 - u)).powf(1.0 / (a + 1.0))).abs()
}

/// `sum t / (sum w1 - sum t)`; rejected when the denominator is not positive.
pub fn alpha1_hat(sum_t: f64, sum_w1: f64) -> Result<Alpha> {
    if !(sum_w1 > sum_t) {
        return Err(ClaycopError::ReplicaRejected("sum of w1 does not exceed sum of t"));
    }
    Alpha::new(sum_t / (sum_w1 - sum_t))
        .map_err(|_| ClaycopError::ReplicaRejected("alpha1 is not finite"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha2Root {
    pub alpha: Alpha,
    /// No sign change on the bracket: `alpha` is the endpoint with the
    /// smaller residual.
    pub degenerate: bool,
}

/// Root in alpha of `(sum log diffs + m log alpha) / (alpha + 1) - s2`.
pub fn alpha2_from_sums(
    s2: f64,
    sum_log_diffs: f64,
    m: usize,
    bracket: AlphaBracket,
) -> Result<Alpha2Root> {
    let mf = m as f64;
    let g = |a: f64| (sum_log_diffs + mf * a.ln()) / (a + 1.0) - s2;
    let (mut lo, mut hi) = (bracket.lower(), bracket.upper());
    let (glo, ghi) = (g(lo), g(hi));
    if !(glo.is_finite() && ghi.is_finite()) {
        return Err(ClaycopError::Domain("non-finite log statistic".into()));
    }
    if glo == 0.0 {
        return Ok(Alpha2Root { alpha: Alpha::new(lo)?, degenerate: false });
    }
    if ghi == 0.0 {
        return Ok(Alpha2Root { alpha: Alpha::new(hi)?, degenerate: false });
    }
    if glo.signum() == ghi.signum() {
        let a = if glo.abs() <= ghi.abs() { lo } else { hi };
        return Ok(Alpha2Root { alpha: Alpha::new(a)?, degenerate: true });
    }
    let lo_negative = glo < 0.0;
    for _ in 0..ROOT_MAX_ITER {
        if hi - lo <= ROOT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if (g(mid) < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Alpha2Root { alpha: Alpha::new(0.5 * (lo + hi))?, degenerate: false })
}

/// [`alpha2_from_sums`] over explicit differences `w1_i - u_i`.
pub fn alpha2_hat(s2: f64, diffs: &[f64], bracket: AlphaBracket) -> Result<Alpha2Root> {
    if diffs.is_empty() {
        return Err(ClaycopError::Empty("seed differences"));
    }
    if !(s2 < 0.0) {
        return Err(ClaycopError::Domain(format!("sum of log t must be negative, got {s2}")));
    }
    if let Some(&d) = diffs.iter().find(|d| !(**d > 0.0)) {
        return Err(ClaycopError::Domain(format!("seed difference must be positive, got {d}")));
    }
    let sum_log: f64 = diffs.iter().map(|d| d.ln()).sum();
    alpha2_from_sums(s2, sum_log, diffs.len(), bracket)
}

/// How seeds `u_i` are drawn for a replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedDraw {
    /// Uniformly with replacement from the plotting-position pool.
    #[default]
    EcdfPool,
    /// Fresh uniform(0, 1) seeds.
    Uniform,
}

/// One accepted replica of `m` seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedReplica {
    pub alpha_used: Alpha,
    pub u: Vec<f64>,
    pub w1: Vec<f64>,
    /// `w1_i - u_i`, see [`SeedSolution::diff`].
    pub diff: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicaEstimate {
    pub alpha1: Alpha,
    pub alpha2: Alpha,
    /// `(alpha1 + alpha2) / 2`.
    pub alpha: Alpha,
}

/// Rejected replica draws, by cause.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RejectionStats {
    /// `sum w1 <= sum t`, or `alpha1` outside the bracket.
    pub alpha1: usize,
    /// No root for `alpha2` on the bracket.
    pub alpha2: usize,
}

impl RejectionStats {
    pub fn total(&self) -> usize {
        self.alpha1 + self.alpha2
    }

    pub fn add(&mut self, other: RejectionStats) {
        self.alpha1 += other.alpha1;
        self.alpha2 += other.alpha2;
    }
}

/// Seed-equation solutions for every pool entry under one reference alpha,
/// so that repeated replicas only pay for index draws.
#[derive(Debug, Clone)]
pub struct SeedSolver {
    alpha_ref: Alpha,
    draw: SeedDraw,
    pool: Vec<SeedSolution>,
}

impl SeedSolver {
    pub fn new(alpha_ref: Alpha, seed_pool: &EcdfValues, draw: SeedDraw) -> Self {
        let pool = match draw {
            SeedDraw::EcdfPool => seed_pool
                .values()
                .iter()
                .map(|&u| solve_seed(alpha_ref, UnitValue::clamped(u)))
                .collect(),
            SeedDraw::Uniform => Vec::new(),
        };
        Self { alpha_ref, draw, pool }
    }

    pub fn alpha_ref(&self) -> Alpha {
        self.alpha_ref
    }

    fn draw_seeds(&self, m: usize, stream: &mut RandomStream) -> Vec<SeedSolution> {
        match self.draw {
            SeedDraw::EcdfPool => (0..m).map(|_| self.pool[stream.index(self.pool.len())]).collect(),
            SeedDraw::Uniform => (0..m)
                .map(|_| solve_seed(self.alpha_ref, UnitValue::clamped(stream.uniform())))
                .collect(),
        }
    }

    /// Evaluates the paired estimators on one set of seeds.
    pub fn evaluate(
        &self,
        pseudo: &PseudoSample,
        seeds: &[SeedSolution],
        bracket: AlphaBracket,
    ) -> Result<ReplicaEstimate> {
        let sum_w1: f64 = seeds.iter().map(|s| s.w1).sum();
        let alpha1 = alpha1_hat(pseudo.sum(), sum_w1)?;
        if !bracket.contains(alpha1.value()) {
            return Err(ClaycopError::ReplicaRejected("alpha1 outside the bracket"));
        }
        let sum_log_diff: f64 = seeds.iter().map(|s| s.log_diff).sum();
        let root = alpha2_from_sums(pseudo.sum_log(), sum_log_diff, seeds.len(), bracket)?;
        if root.degenerate {
            return Err(ClaycopError::ReplicaRejected("no alpha2 root on the bracket"));
        }
        let alpha2 = root.alpha;
        Ok(ReplicaEstimate {
            alpha1,
            alpha2,
            alpha: Alpha::new(0.5 * (alpha1.value() + alpha2.value()))?,
        })
    }

    /// Draws replicas until one is accepted or `retry_limit` consecutive
    /// draws were rejected.
    pub fn estimate(
        &self,
        pseudo: &PseudoSample,
        bracket: AlphaBracket,
        retry_limit: usize,
        stream: &mut RandomStream,
        rejections: &mut RejectionStats,
    ) -> Result<(ReplicaEstimate, Vec<SeedSolution>)> {
        let mut local = RejectionStats::default();
        for _ in 0..retry_limit.max(1) {
            let seeds = self.draw_seeds(pseudo.len(), stream);
            match self.evaluate(pseudo, &seeds, bracket) {
                Ok(est) => {
                    rejections.add(local);
                    return Ok((est, seeds));
                }
                Err(ClaycopError::ReplicaRejected(why)) => {
                    if why.starts_with("no alpha2") {
                        local.alpha2 += 1;
                    } else {
                        local.alpha1 += 1;
                    }
                }
                Err(e) => return Err(e),
            }
        }
        rejections.add(local);
        Err(ClaycopError::ReplicaExhausted {
            attempts: retry_limit.max(1),
            sum_rejections: local.alpha1,
            root_rejections: local.alpha2,
        })
    }
}

/// One bootstrap replica: `m` seeds drawn from `seed_pool`, solved under
/// `alpha_ref`, evaluated against the fixed observed statistics.
pub fn replica_estimate(
    pseudo: &PseudoSample,
    alpha_ref: Alpha,
    seed_pool: &EcdfValues,
    bracket: AlphaBracket,
    retry_limit: usize,
    stream: &mut RandomStream,
) -> Result<(ReplicaEstimate, SeedReplica)> {
    let solver = SeedSolver::new(alpha_ref, seed_pool, SeedDraw::EcdfPool);
    let mut rej = RejectionStats::default();
    let (est, seeds) = solver.estimate(pseudo, bracket, retry_limit, stream, &mut rej)?;
    let replica = SeedReplica {
        alpha_used: alpha_ref,
        u: seeds.iter().map(|s| s.u).collect(),
        w1: seeds.iter().map(|s| s.w1).collect(),
        diff: seeds.iter().map(|s| s.diff).collect(),
    };
    Ok((est, replica))
}
