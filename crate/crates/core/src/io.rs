//! CSV readers and writers. Floats are written with Rust's shortest
//! round-trip formatting, so every value reads back bit-identical.

use std::io::{Read, Write};

use crate::copula::UnitPair;
use crate::error::{ClaycopError, Result};
use crate::estimators::{BootstrapPopulation, MeanFieldTrace};
use crate::experiments::{histogram, CellResult};
use crate::intervals::ConfidenceInterval;
use crate::pseudo_obs::{BivariateSample, PseudoSample};

/// Reads a two-column sample with header `x1,x2` or `u1,u2`.
pub fn read_bivariate<R: Read>(reader: R) -> Result<BivariateSample> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols != ["x1", "x2"] && cols != ["u1", "u2"] {
        return Err(ClaycopError::Csv(format!(
            "expected header x1,x2 or u1,u2, found {}",
            cols.join(",")
        )));
    }
    let mut points = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        // header is line 1
        let line = i + 2;
        let rec = rec.map_err(|e| ClaycopError::Csv(format!("line {line}: {e}")))?;
        if rec.len() != 2 {
            return Err(ClaycopError::Csv(format!("line {line}: expected 2 fields, found {}", rec.len())));
        }
        let parse = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| ClaycopError::Csv(format!("line {line}: cannot parse {:?} as a number", &rec[k])))
        };
        points.push((parse(0)?, parse(1)?));
    }
    BivariateSample::new(points)
}

pub fn write_pairs<W: Write>(writer: W, pairs: &[UnitPair]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["u1", "u2"])?;
    for p in pairs {
        w.write_record([p.u1.value().to_string(), p.u2.value().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sample<W: Write>(writer: W, sample: &BivariateSample) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x1", "x2"])?;
    for &(a, b) in sample.points() {
        w.write_record([a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pseudo<W: Write>(writer: W, pseudo: &PseudoSample) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["i", "t"])?;
    for (i, t) in pseudo.values().iter().enumerate() {
        w.write_record([i.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace<W: Write>(writer: W, trace: &MeanFieldTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["step", "alpha1", "alpha2", "alpha_smoothed"])?;
    for r in &trace.records {
        w.write_record([
            r.step.to_string(),
            r.alpha1.to_string(),
            r.alpha2.to_string(),
            r.smoothed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_population<W: Write>(writer: W, population: &BootstrapPopulation) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["alpha_hat"])?;
    for a in population.estimates() {
        w.write_record([a.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows `sample_id,lower,upper,level,contains_truth`; `truth` may be unknown.
pub fn write_intervals<W: Write>(
    writer: W,
    intervals: &[(usize, ConfidenceInterval)],
    truth: Option<f64>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sample_id", "lower", "upper", "level", "contains_truth"])?;
    for (id, ci) in intervals {
        let contains = truth.map(|a| ci.contains(a).to_string()).unwrap_or_default();
        w.write_record([
            id.to_string(),
            ci.lower.to_string(),
            ci.upper.to_string(),
            ci.level.to_string(),
            contains,
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per cell: `alpha,m,mode,ai_mean,ai_std,mle_mean,mle_std,coverage`.
pub fn write_aggregates<W: Write>(writer: W, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["alpha", "m", "mode", "ai_mean", "ai_std", "mle_mean", "mle_std", "coverage"])?;
    for c in cells {
        let a = &c.aggregates;
        w.write_record([
            c.alpha.to_string(),
            c.m.to_string(),
            c.mode.as_str().to_string(),
            a.ai_mean.to_string(),
            a.ai_std.to_string(),
            a.mle_mean.to_string(),
            a.mle_std.to_string(),
            opt(a.coverage),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per sample of every cell.
pub fn write_details<W: Write>(writer: W, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "alpha", "m", "mode", "sample", "mle", "mle_at_boundary", "ai", "ci_lower", "ci_upper",
        "contains_truth", "rejected_alpha1", "rejected_alpha2", "error",
    ])?;
    for c in cells {
        for r in &c.records {
            w.write_record([
                c.alpha.to_string(),
                c.m.to_string(),
                c.mode.as_str().to_string(),
                r.sample.to_string(),
                opt(r.mle),
                r.mle_at_boundary.to_string(),
                opt(r.ai),
                opt(r.interval.map(|ci| ci.lower)),
                opt(r.interval.map(|ci| ci.upper)),
                r.interval.map(|ci| ci.contains(c.alpha).to_string()).unwrap_or_default(),
                r.rejections.alpha1.to_string(),
                r.rejections.alpha2.to_string(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const HISTOGRAM_BINS: usize = 30;

/// Bin counts of the AI and MLE estimates per cell over `[0, 3 alpha)`,
/// plus an overflow row with `bin_upper = inf`.
pub fn write_histograms<W: Write>(writer: W, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["alpha", "m", "estimator", "bin_lower", "bin_upper", "count"])?;
    for c in cells {
        let upper = 3.0 * c.alpha;
        let width = upper / HISTOGRAM_BINS as f64;
        let ok = c.records.iter().filter(|r| !r.failed());
        let ai: Vec<f64> = ok.clone().filter_map(|r| r.ai).collect();
        let ml: Vec<f64> = ok.filter_map(|r| r.mle).collect();
        for (name, values) in [("ai", ai), ("mle", ml)] {
            for (b, count) in histogram(&values, 0.0, upper, HISTOGRAM_BINS).into_iter().enumerate() {
                let lo = b as f64 * width;
                let hi = if b == HISTOGRAM_BINS { f64::INFINITY } else { (b + 1) as f64 * width };
                w.write_record([
                    c.alpha.to_string(),
                    c.m.to_string(),
                    name.to_string(),
                    lo.to_string(),
                    hi.to_string(),
                    count.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
