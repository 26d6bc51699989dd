//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and validation errors, 2 for
//! runtime failures (I/O, malformed input, estimator failures).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self as stdio, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::copula::{sample_pairs, Alpha};
use crate::error::ClaycopError;
use crate::estimators::{ai_estimate, dummy_ai_estimate, mle, AiConfig, SeedDraw};
use crate::experiments::{
    kendall_ks_distance, run_plan, ExperimentPlan, Mode, DEFAULT_MASTER_SEED,
};
use crate::intervals::{ci_resample_population, confidence_interval};
use crate::io;
use crate::margins::{sklar_compose, MarginSpec};
use crate::pseudo_obs::{pseudo_sample, raw_pseudo_values, BivariateSample};
use crate::rng::RandomStream;
use crate::stats::empirical_kendall_tau;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "claycop", version, about = "Clayton copula parameter estimation")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw pairs from a Clayton copula (CSV `u1,u2`).
    Sample(SampleArgs),
    /// Kendall pseudo-observations of a sample (CSV `i,t`).
    Pseudo(PseudoArgs),
    /// Point estimate of alpha from a sample.
    Estimate(EstimateArgs),
    /// Fixed-point estimate with a bootstrap confidence interval.
    Ci(CiArgs),
    /// Run the experiment grid.
    Experiment(ExperimentArgs),
    /// Compose a copula sample with exponential and Gaussian margins.
    DemoSklar(DemoArgs),
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed; falls back to CLAYCOP_SEED.
    #[arg(long, env = "CLAYCOP_SEED")]
    seed: Option<u64>,
}

impl SeedArg {
    fn get(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_MASTER_SEED)
    }
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(short = 'm', long = "size")]
    m: usize,
    #[command(flatten)]
    seed: SeedArg,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PseudoArgs {
    /// CSV with header `x1,x2` or `u1,u2`.
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Mle,
    Ai,
    Dummy,
}

#[derive(Debug, Args)]
struct EstimatorFlags {
    #[arg(long, default_value_t = 300)]
    burn_in: usize,
    #[arg(long, default_value_t = 300)]
    tail: usize,
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    #[arg(long, default_value_t = 100)]
    retry_limit: usize,
    #[arg(long, default_value_t = crate::estimators::DEFAULT_BRACKET.0)]
    bracket_lower: f64,
    #[arg(long, default_value_t = crate::estimators::DEFAULT_BRACKET.1)]
    bracket_upper: f64,
    /// Draw replica seeds from uniform(0, 1) instead of the plotting-position pool.
    #[arg(long)]
    uniform_seeds: bool,
}

impl EstimatorFlags {
    fn config(&self) -> Result<AiConfig, CliError> {
        let cfg = AiConfig {
            burn_in_steps: self.burn_in,
            tail_steps: self.tail,
            smoothing_eta: self.eta,
            replica_retry_limit: self.retry_limit,
            alpha_bracket: (self.bracket_lower, self.bracket_upper),
            seed_draw: if self.uniform_seeds { SeedDraw::Uniform } else { SeedDraw::EcdfPool },
        };
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long, short)]
    input: PathBuf,
    /// Required by `--method dummy`.
    #[arg(long)]
    true_alpha: Option<f64>,
    /// Replicas of the dummy population.
    #[arg(long, default_value_t = 300)]
    replicas: usize,
    #[command(flatten)]
    estimator: EstimatorFlags,
    #[command(flatten)]
    seed: SeedArg,
    /// Write the mean-field trace (`--method ai`).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the tail or dummy population.
    #[arg(long)]
    population: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CiArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    level: f64,
    /// Replicas per interval population; three populations are pooled.
    #[arg(long, default_value_t = 300)]
    replicas: usize,
    /// Known alpha, for the `contains_truth` column.
    #[arg(long)]
    true_alpha: Option<f64>,
    #[command(flatten)]
    estimator: EstimatorFlags,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Plan JSON; the built-in grid when omitted.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, default_value = "fixed-point", value_parser = ["dummy", "fixed-point"])]
    mode: String,
    /// Worker threads; affects runtime only.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "claycop-out")]
    out_dir: PathBuf,
    /// Overrides the plan's master seed.
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 0.8)]
    alpha: f64,
    #[arg(short = 'm', long = "size", default_value_t = 1000)]
    m: usize,
    /// Rate of the negative exponential first margin.
    #[arg(long, default_value_t = 44.0)]
    rate: f64,
    #[arg(long, default_value_t = 0.5)]
    mean: f64,
    #[arg(long, default_value_t = 0.15)]
    std: f64,
    #[command(flatten)]
    seed: SeedArg,
    /// Composed sample, CSV `x1,x2`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Pseudo-sample ECDF against the Kendall CDF, CSV `t,ecdf,kendall_cdf`.
    #[arg(long)]
    kendall_out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

impl From<ClaycopError> for CliError {
    fn from(e: ClaycopError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<stdio::Error> for CliError {
    fn from(e: stdio::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(stdio::stdout().lock()),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn read_sample(path: &Path) -> Result<BivariateSample, CliError> {
    let file = File::open(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    io::read_bivariate(file).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn alpha_arg(v: f64) -> Result<Alpha, CliError> {
    Alpha::new(v).map_err(usage)
}

fn cmd_sample(args: SampleArgs) -> Result<(), CliError> {
    let alpha = alpha_arg(args.alpha)?;
    if args.m == 0 {
        return Err(usage("sample size must be positive"));
    }
    let pairs = sample_pairs(alpha, args.m, &mut RandomStream::new(args.seed.get(), 0));
    let tau: Vec<(f64, f64)> = pairs.iter().map(|p| (p.u1.value(), p.u2.value())).collect();
    log::info!("empirical Kendall tau {}", empirical_kendall_tau(&tau));
    io::write_pairs(open_out(&args.out)?, &pairs)?;
    Ok(())
}

fn cmd_pseudo(args: PseudoArgs) -> Result<(), CliError> {
    let sample = read_sample(&args.input)?;
    io::write_pseudo(open_out(&args.out)?, &pseudo_sample(&sample))?;
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CliError> {
    let cfg = args.estimator.config()?;
    let true_alpha = match (args.method, args.true_alpha) {
        (Method::Dummy, None) => return Err(usage("--method dummy requires --true-alpha")),
        (_, Some(a)) => Some(alpha_arg(a)?),
        (_, None) => None,
    };
    if args.replicas == 0 {
        return Err(usage("--replicas must be positive"));
    }
    let pseudo = pseudo_sample(&read_sample(&args.input)?);
    let seed = args.seed.get();
    let fit = mle(&pseudo, cfg.bracket()?)?;
    let mut out = stdio::stdout().lock();
    writeln!(out, "m = {}", pseudo.len())?;
    writeln!(out, "mle = {}{}", fit.alpha, if fit.at_boundary { " (at bracket edge)" } else { "" })?;
    match args.method {
        Method::Mle => {}
        Method::Ai => {
            let est = ai_estimate(&pseudo, &cfg, &mut RandomStream::new(seed, 1))?;
            writeln!(out, "ai = {}", est.estimate)?;
            writeln!(out, "rejected replicas = {}", est.rejections.total())?;
            if let Some(p) = &args.trace {
                io::write_trace(create(p)?, &est.trace)?;
            }
            if let Some(p) = &args.population {
                io::write_population(create(p)?, &est.population)?;
            }
        }
        Method::Dummy => {
            let alpha = true_alpha.expect("checked above");
            let est = dummy_ai_estimate(&pseudo, alpha, args.replicas, &cfg, &RandomStream::new(seed, 2))?;
            writeln!(out, "dummy = {}", est.estimate)?;
            writeln!(out, "rejected replicas = {}", est.rejections.total())?;
            if let Some(p) = &args.population {
                io::write_population(create(p)?, &est.population)?;
            }
        }
    }
    Ok(())
}

fn cmd_ci(args: CiArgs) -> Result<(), CliError> {
    let cfg = args.estimator.config()?;
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(usage("--level must be in (0, 1)"));
    }
    if args.replicas == 0 {
        return Err(usage("--replicas must be positive"));
    }
    let truth = args.true_alpha.map(alpha_arg).transpose()?;
    let pseudo = pseudo_sample(&read_sample(&args.input)?);
    let seed = args.seed.get();
    let est = ai_estimate(&pseudo, &cfg, &mut RandomStream::new(seed, 1))?;
    let base = RandomStream::new(seed, 3);
    let pops = (0..3u64)
        .map(|k| ci_resample_population(&pseudo, est.estimate, args.replicas, &cfg, &base.child(k)))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<_> = pops.iter().collect();
    let ci = confidence_interval(&refs, args.level)?;
    let mut out = stdio::stdout().lock();
    writeln!(out, "ai = {}", est.estimate)?;
    writeln!(out, "interval = [{}, {}] at level {}", ci.lower, ci.upper, ci.level)?;
    if let Some(p) = &args.out {
        io::write_intervals(create(p)?, &[(0, ci)], truth.map(|a| a.value()))?;
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let mode: Mode = args.mode.parse().map_err(usage)?;
    let mut plan = match &args.plan {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            ExperimentPlan::from_json(&text).map_err(usage)?
        }
        None => ExperimentPlan::default(),
    };
    if let Some(s) = args.seed.seed {
        plan.master_seed = s;
    }
    plan.validate().map_err(usage)?;
    if args.jobs == 0 {
        return Err(usage("--jobs must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let cells = pool.install(|| run_plan(&plan, mode))?;

    fs::create_dir_all(&args.out_dir)?;
    io::write_aggregates(create(&args.out_dir.join("aggregates.csv"))?, &cells)?;
    io::write_details(create(&args.out_dir.join("details.csv"))?, &cells)?;
    io::write_histograms(create(&args.out_dir.join("histograms.csv"))?, &cells)?;
    let failed: usize = cells.iter().map(|c| c.aggregates.n_failed).sum();
    if failed > 0 {
        eprintln!("{failed} samples failed and were excluded; see details.csv");
    }
    let edge: usize = cells
        .iter()
        .map(|c| c.records.iter().filter(|r| r.mle_at_boundary).count())
        .sum();
    if edge > 0 {
        eprintln!("{edge} likelihood maximisers at the bracket edge (mle_at_boundary in details.csv)");
    }
    println!("{} cells written to {}", cells.len(), args.out_dir.display());
    Ok(())
}

fn cmd_demo(args: DemoArgs) -> Result<(), CliError> {
    let alpha = alpha_arg(args.alpha)?;
    if args.m < 2 {
        return Err(usage("sample size must be at least 2"));
    }
    let margins = (
        MarginSpec::NegativeExponential { rate: args.rate },
        MarginSpec::Gaussian { mean: args.mean, std: args.std },
    );
    margins.0.validate().map_err(usage)?;
    margins.1.validate().map_err(usage)?;
    let sample = sklar_compose(margins, alpha, args.m, &mut RandomStream::new(args.seed.get(), 0))?;
    let raw = raw_pseudo_values(&sample);
    let ks = kendall_ks_distance(&raw, alpha);
    if let Some(p) = &args.kendall_out {
        let mut t = raw.clone();
        t.sort_by(f64::total_cmp);
        let n = t.len() as f64;
        let mut w = csv::Writer::from_writer(create(p)?);
        w.write_record(["t", "ecdf", "kendall_cdf"]).map_err(ClaycopError::from)?;
        for (i, &ti) in t.iter().enumerate() {
            w.write_record([
                ti.to_string(),
                ((i + 1) as f64 / n).to_string(),
                crate::copula::kendall_cdf(alpha, ti).to_string(),
            ])
            .map_err(ClaycopError::from)?;
        }
        w.flush()?;
    }
    if let Some(p) = &args.out {
        io::write_sample(create(p)?, &sample)?;
    }
    println!("kendall ks distance = {ks}");
    Ok(())
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Pseudo(a) => cmd_pseudo(a),
        Command::Estimate(a) => cmd_estimate(a),
        Command::Ci(a) => cmd_ci(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::DemoSklar(a) => cmd_demo(a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            EXIT_RUNTIME
        }
    }
}
