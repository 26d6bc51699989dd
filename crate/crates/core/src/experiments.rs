//! The (alpha, m) experiment grid: per-cell Monte-Carlo runs of the
//! estimators with order-independent substreams.
//!
//! Substream scheme: sample `s` of cell `(alpha, m)` draws its data from
//! `substream_key([alpha bits, m, s, SAMPLE])` and its estimator randomness
//! from the same key with the `DUMMY`, `FIXED_POINT` or `CI` tag. Cells and
//! samples can therefore run in any order, and a one-cell plan reproduces
//! that cell of a larger plan exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::{kendall_cdf, sample_pairs, Alpha};
use crate::error::{ClaycopError, Result};
use crate::estimators::{
    ai_estimate, dummy_ai_estimate, mle, AiConfig, BootstrapPopulation, RejectionStats,
};
use crate::intervals::{ci_resample_population, confidence_interval, coverage, ConfidenceInterval};
use crate::pseudo_obs::{pseudo_sample, BivariateSample};
use crate::rng::{substream_key, RandomStream};
use crate::stats::{mean, sample_std};

const TAG_SAMPLE: u64 = 1;
const TAG_DUMMY: u64 = 2;
const TAG_FIXED_POINT: u64 = 3;
const TAG_CI: u64 = 4;

pub const DEFAULT_MASTER_SEED: u64 = 20_190_101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dummy,
    FixedPoint,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Dummy => "dummy",
            Mode::FixedPoint => "fixed-point",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = ClaycopError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dummy" => Ok(Mode::Dummy),
            "fixed-point" => Ok(Mode::FixedPoint),
            other => Err(ClaycopError::Config(format!("unknown mode {other:?}"))),
        }
    }
}

/// The experiment grid and its Monte-Carlo sizes. Missing JSON fields take
/// the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentPlan {
    pub alphas: Vec<f64>,
    pub sizes: Vec<usize>,
    pub samples_per_cell: usize,
    /// Replicas per sample (dummy population, and each interval population).
    pub replicas: usize,
    pub ai_config: AiConfig,
    pub master_seed: u64,
    /// Confidence level of the fixed-point intervals.
    pub level: f64,
    /// Number of consecutive sample populations merged per interval.
    pub pool_width: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            alphas: vec![0.8, 1.7, 3.0, 5.0],
            sizes: vec![20, 30, 100],
            samples_per_cell: 50,
            replicas: 300,
            ai_config: AiConfig::default(),
            master_seed: DEFAULT_MASTER_SEED,
            level: 0.9,
            pool_width: 3,
        }
    }
}

impl ExperimentPlan {
    pub fn from_json(text: &str) -> Result<Self> {
        let plan: ExperimentPlan =
            serde_json::from_str(text).map_err(|e| ClaycopError::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.sizes.is_empty() {
            return Err(ClaycopError::Config("alphas and sizes must be non-empty".into()));
        }
        for &a in &self.alphas {
            Alpha::new(a)?;
        }
        if let Some(&m) = self.sizes.iter().find(|&&m| m < 2) {
            return Err(ClaycopError::Config(format!("sample size must be at least 2, got {m}")));
        }
        if self.samples_per_cell == 0 || self.replicas == 0 || self.pool_width == 0 {
            return Err(ClaycopError::Config(
                "samples_per_cell, replicas and pool_width must be at least 1".into(),
            ));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(ClaycopError::Config(format!("level must be in (0, 1), got {}", self.level)));
        }
        self.ai_config.validate()
    }

    /// Cells in grid order: alphas outer, sizes inner.
    pub fn cells(&self) -> Vec<(f64, usize)> {
        self.alphas
            .iter()
            .flat_map(|&a| self.sizes.iter().map(move |&m| (a, m)))
            .collect()
    }
}

fn stream_for(plan: &ExperimentPlan, alpha: f64, m: usize, sample: usize, tag: u64) -> RandomStream {
    RandomStream::new(
        plan.master_seed,
        substream_key(&[alpha.to_bits(), m as u64, sample as u64, tag]),
    )
}

/// The bivariate sample `sample` of cell `(alpha, m)`.
pub fn cell_sample(plan: &ExperimentPlan, alpha: Alpha, m: usize, sample: usize) -> Result<BivariateSample> {
    let mut s = stream_for(plan, alpha.value(), m, sample, TAG_SAMPLE);
    BivariateSample::from_pairs(&sample_pairs(alpha, m, &mut s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub sample: usize,
    pub mle: Option<f64>,
    pub mle_at_boundary: bool,
    /// Dummy median or fixed-point tail median.
    pub ai: Option<f64>,
    pub rejections: RejectionStats,
    /// Interval from the window of populations starting at this sample.
    pub interval: Option<ConfidenceInterval>,
    pub error: Option<String>,
}

impl SampleRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregates {
    pub ai_mean: f64,
    pub ai_std: f64,
    pub mle_mean: f64,
    pub mle_std: f64,
    /// Fraction of this cell's intervals containing alpha (fixed-point only).
    pub coverage: Option<f64>,
    pub n_used: usize,
    pub n_failed: usize,
    /// Fewer than two usable samples: the deviations are reported as 0.
    pub degenerate_std: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub alpha: f64,
    pub m: usize,
    pub mode: Mode,
    pub records: Vec<SampleRecord>,
    pub aggregates: Aggregates,
}

/// Means and deviations over the successful records; failed records are
/// excluded and counted.
pub fn aggregate(alpha: f64, records: &[SampleRecord]) -> Aggregates {
    let ok: Vec<&SampleRecord> = records.iter().filter(|r| !r.failed()).collect();
    let ai: Vec<f64> = ok.iter().filter_map(|r| r.ai).collect();
    let ml: Vec<f64> = ok.iter().filter_map(|r| r.mle).collect();
    let intervals: Vec<ConfidenceInterval> = ok.iter().filter_map(|r| r.interval).collect();
    let cov = Alpha::new(alpha)
        .ok()
        .and_then(|a| coverage(&intervals, a).ok());
    let nan_if_empty = |v: &[f64], f: fn(&[f64]) -> f64| if v.is_empty() { f64::NAN } else { f(v) };
    Aggregates {
        ai_mean: nan_if_empty(&ai, mean),
        ai_std: nan_if_empty(&ai, sample_std),
        mle_mean: nan_if_empty(&ml, mean),
        mle_std: nan_if_empty(&ml, sample_std),
        coverage: cov,
        n_used: ok.len(),
        n_failed: records.len() - ok.len(),
        degenerate_std: ok.len() < 2,
    }
}

struct SampleRun {
    record: SampleRecord,
    ci_population: Option<BootstrapPopulation>,
}

fn run_sample(plan: &ExperimentPlan, alpha: Alpha, m: usize, s: usize, mode: Mode) -> SampleRun {
    let mut record = SampleRecord {
        sample: s,
        mle: None,
        mle_at_boundary: false,
        ai: None,
        rejections: RejectionStats::default(),
        interval: None,
        error: None,
    };
    let outcome = (|| -> Result<Option<BootstrapPopulation>> {
        let pseudo = pseudo_sample(&cell_sample(plan, alpha, m, s)?);
        let cfg = &plan.ai_config;
        let fit = mle(&pseudo, cfg.bracket()?)?;
        record.mle = Some(fit.alpha.value());
        record.mle_at_boundary = fit.at_boundary;
        match mode {
            Mode::Dummy => {
                let stream = stream_for(plan, alpha.value(), m, s, TAG_DUMMY);
                let d = dummy_ai_estimate(&pseudo, alpha, plan.replicas, cfg, &stream)?;
                record.ai = Some(d.estimate.value());
                record.rejections = d.rejections;
                Ok(None)
            }
            Mode::FixedPoint => {
                let mut stream = stream_for(plan, alpha.value(), m, s, TAG_FIXED_POINT);
                let est = ai_estimate(&pseudo, cfg, &mut stream)?;
                record.ai = Some(est.estimate.value());
                record.rejections = est.rejections;
                let ci_stream = stream_for(plan, alpha.value(), m, s, TAG_CI);
                let pop = ci_resample_population(&pseudo, est.estimate, plan.replicas, cfg, &ci_stream)?;
                Ok(Some(pop))
            }
        }
    })();
    match outcome {
        Ok(ci_population) => SampleRun { record, ci_population },
        Err(e) => {
            log::warn!("alpha={} m={m} sample {s} failed: {e}", alpha.value());
            record.error = Some(e.to_string());
            SampleRun { record, ci_population: None }
        }
    }
}

/// Runs every sample of one cell. In fixed-point mode, the interval of
/// the `j`-th successful sample merges the interval populations of
/// successful samples `j .. j + pool_width`; with fewer successes than
/// `pool_width`, a single interval merges all of them.
pub fn run_cell(alpha: f64, m: usize, plan: &ExperimentPlan, mode: Mode) -> Result<CellResult> {
    let a = Alpha::new(alpha)?;
    if m < 2 {
        return Err(ClaycopError::SampleTooSmall(m));
    }
    let runs: Vec<SampleRun> = (0..plan.samples_per_cell)
        .into_par_iter()
        .map(|s| run_sample(plan, a, m, s, mode))
        .collect();

    let mut records: Vec<SampleRecord> = Vec::with_capacity(runs.len());
    let mut pops: Vec<(usize, BootstrapPopulation)> = Vec::new();
    for (i, run) in runs.into_iter().enumerate() {
        if let Some(p) = run.ci_population {
            pops.push((i, p));
        }
        records.push(run.record);
    }
    if mode == Mode::FixedPoint && !pops.is_empty() {
        let width = plan.pool_width.min(pops.len());
        for start in 0..=(pops.len() - width) {
            let window: Vec<&BootstrapPopulation> =
                pops[start..start + width].iter().map(|(_, p)| p).collect();
            records[pops[start].0].interval = Some(confidence_interval(&window, plan.level)?);
        }
    }
    let aggregates = aggregate(alpha, &records);
    Ok(CellResult { alpha, m, mode, records, aggregates })
}

/// Every cell of the plan, in grid order.
pub fn run_plan(plan: &ExperimentPlan, mode: Mode) -> Result<Vec<CellResult>> {
    plan.validate()?;
    plan.cells()
        .into_par_iter()
        .map(|(a, m)| run_cell(a, m, plan, mode))
        .collect()
}

/// Equal-width bin counts of `values` on `[lower, upper)`; the last entry
/// counts values at or above `upper`, the first bin absorbs values below
/// `lower`.
pub fn histogram(values: &[f64], lower: f64, upper: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0usize; bins + 1];
    let width = (upper - lower) / bins as f64;
    for &v in values {
        let idx = if v >= upper {
            bins
        } else {
            (((v - lower) / width).floor().max(0.0) as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    counts
}

/// Kolmogorov distance between the empirical CDF of raw pseudo-observations
/// and the Kendall CDF.
pub fn kendall_ks_distance(raw_t: &[f64], alpha: Alpha) -> f64 {
    let mut t = raw_t.to_vec();
    t.sort_by(f64::total_cmp);
    let n = t.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < t.len() {
        let mut j = i;
        while j < t.len() && t[j] == t[i] {
            j += 1;
        }
        let k = kendall_cdf(alpha, t[i]);
        d = d.max((k - i as f64 / n).abs()).max((j as f64 / n - k).abs());
        i = j;
    }
    d
}
