//! Kendall pseudo-observations of a bivariate sample.
//!
//! `t_i` is the fraction of the other points that lie strictly south-west of
//! point `i`. Raw values sit on the grid `k / (m - 1)`; stored values are
//! clamped into `[eps_t, 1 - eps_t]` with `eps_t = 1 / (2 (m - 1))` so that
//! `log t_i` stays finite.

use crate::copula::UnitPair;
use crate::error::{ClaycopError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BivariateSample {
    points: Vec<(f64, f64)>,
}

impl BivariateSample {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(ClaycopError::SampleTooSmall(points.len()));
        }
        if let Some(p) = points.iter().find(|p| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(ClaycopError::Domain(format!("non-finite point {p:?}")));
        }
        Ok(Self { points })
    }

    pub fn from_pairs(pairs: &[UnitPair]) -> Result<Self> {
        Self::new(pairs.iter().map(|p| (p.u1.value(), p.u2.value())).collect())
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    t: Vec<f64>,
}

impl PseudoSample {
    /// Builds a pseudo-sample from values in `[0, 1]`, clamping them.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m < 2 {
            return Err(ClaycopError::SampleTooSmall(m));
        }
        if let Some(&bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(ClaycopError::OutOfUnitInterval(bad));
        }
        let eps = clamp_eps(m);
        Ok(Self {
            t: values.into_iter().map(|v| v.clamp(eps, 1.0 - eps)).collect(),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `s1 = sum t_i`.
    pub fn sum(&self) -> f64 {
        self.t.iter().sum()
    }

    /// `s2 = sum log t_i`.
    pub fn sum_log(&self) -> f64 {
        self.t.iter().map(|t| t.ln()).sum()
    }
}

/// Clamp margin for a pseudo-sample of size `m`: half a count step.
pub fn clamp_eps(m: usize) -> f64 {
    0.5 / (m - 1) as f64
}

/// Strict south-west dominance counts, O(m log m).
///
/// Points are swept in increasing `x1`; each group of equal `x1` is queried
/// against a Fenwick tree of already inserted `x2` ranks before the group is
/// inserted, so ties in either coordinate never count.
pub fn dominance_counts(points: &[(f64, f64)]) -> Vec<usize> {
    let m = points.len();
    let mut ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let rank_of = |y: f64| ys.partition_point(|&v| v < y);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0));

    let mut tree = vec![0usize; ys.len() + 1];
    let mut counts = vec![0usize; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && points[order[j]].0 == points[order[i]].0 {
            j += 1;
        }
        for &idx in &order[i..j] {
            // inserted points with rank < own rank
            let mut k = rank_of(points[idx].1);
            let mut c = 0;
            while k > 0 {
                c += tree[k];
                k &= k - 1;
            }
            counts[idx] = c;
        }
        for &idx in &order[i..j] {
            let mut k = rank_of(points[idx].1) + 1;
            while k < tree.len() {
                tree[k] += 1;
                k += k & k.wrapping_neg();
            }
        }
        i = j;
    }
    counts
}

/// Raw (unclamped) pseudo-observations `count_i / (m - 1)`.
pub fn raw_pseudo_values(sample: &BivariateSample) -> Vec<f64> {
    let denom = (sample.len() - 1) as f64;
    dominance_counts(sample.points())
        .into_iter()
        .map(|c| c as f64 / denom)
        .collect()
}

pub fn pseudo_sample(sample: &BivariateSample) -> PseudoSample {
    PseudoSample::from_values(raw_pseudo_values(sample))
        .expect("a valid sample yields values in [0, 1]")
}

/// Hazen plotting positions of the pseudo-sample, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EcdfValues {
    u: Vec<f64>,
}

impl EcdfValues {
    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// A pool with the given values; used by sensitivity checks that bypass
    /// the plotting positions. Values must lie in (0, 1).
    pub fn from_values(u: Vec<f64>) -> Result<Self> {
        if u.is_empty() {
            return Err(ClaycopError::Empty("seed pool"));
        }
        if let Some(&bad) = u.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(ClaycopError::OutOfUnitInterval(bad));
        }
        Ok(Self { u })
    }
}

/// `(r_i - 0.5) / m` with average ranks `r_i` for ties.
pub fn ecdf_values(pseudo: &PseudoSample) -> EcdfValues {
    let mut t = pseudo.values().to_vec();
    t.sort_by(f64::total_cmp);
    let m = t.len();
    let mut u = vec![0.0; m];
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j < m && t[j] == t[i] {
            j += 1;
        }
        // 1-based ranks i+1 ..= j
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        let pos = (avg_rank - 0.5) / m as f64;
        u[i..j].fill(pos);
        i = j;
    }
    EcdfValues { u }
}
