//! Command-line interface behind the `recapture` binary.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 unreadable or
//! invalid input, 4 numerical failure inside the sampler.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::diagnostics::write_diagnostics;
use crate::engine::{run_chain_observed, EngineError, RunOutput};
use crate::experiment::{horizon_experiment, scaling_experiment, ExperimentPlan, HORIZONS, SCALING_SIZES};
use crate::io::{self, FormatError};
use crate::model::{Block, RunConfig};
use crate::simulate::{simulate_population, Design, DesignKind, SimulateError};

pub const THREADS_ENV: &str = "RECAPTURE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "recapture", version, about = "Simulate and fit Here/Away capture histories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate capture histories from one of the built-in designs.
    Simulate(SimulateArgs),
    /// Run the MCMC sampler on a capture-history file.
    Fit(FitArgs),
    /// Trace, density and truth-recovery plots for a samples file.
    Diagnose(DiagnoseArgs),
    /// Run a built-in simulation study.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct Parallelism {
    /// Worker threads (defaults to all cores).
    #[arg(long, env = THREADS_ENV)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// exploratory, asymptotic-n, asymptotic-T or custom
    #[arg(long, default_value = "exploratory", value_parser = parse_design_kind)]
    pub design: DesignKind,
    /// Number of animals (asymptotic-n and custom).
    #[arg(long)]
    pub size: Option<usize>,
    /// Number of occasions (asymptotic-T and custom).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// TOML run configuration; custom designs read its [simulation] table.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Capture histories (`id,t,x`).
    pub histories: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// True individual values (`id,pi,gHH,gAA`) for recovery correlations.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[command(flatten)]
    pub parallelism: Parallelism,
    /// Suppress progress messages.
    #[arg(long, short)]
    pub quiet: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Posterior samples written by `fit`.
    pub samples: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Config echo from `simulate`, for hyper-parameter truth lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Study {
    Scaling,
    Horizon,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub study: Study,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 15_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 5_000)]
    pub burnin: usize,
    /// Animal counts for the scaling study.
    #[arg(long, value_delimiter = ',')]
    pub size: Vec<usize>,
    /// Horizons for the horizon study.
    #[arg(long, value_delimiter = ',')]
    pub horizon: Vec<usize>,
    #[command(flatten)]
    pub parallelism: Parallelism,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_design_kind(s: &str) -> Result<DesignKind, String> {
    s.parse().map_err(|e: SimulateError| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Usage(String),
    Input(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Input(m) | CliError::Numeric(m) | CliError::Io(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

fn format_error(path: &Path, e: FormatError) -> CliError {
    let msg = format!("{}: {e}", path.display());
    if e.is_io() { CliError::Io(msg) } else { CliError::Input(msg) }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(_) => CliError::Usage(e.to_string()),
            EngineError::Data(_) | EngineError::NoData => CliError::Input(e.to_string()),
            EngineError::Numeric { .. } | EngineError::Sampler { .. } => CliError::Numeric(e.to_string()),
            EngineError::EmptySamples => CliError::Usage(format!("{e}: iterations must exceed burnin")),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn create_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| io_error(path, e))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => io::load_config(p).map_err(|e| format_error(p, e)),
        None => Ok(RunConfig::default()),
    }
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Io(format!("cannot start thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Experiment(a) => cmd_experiment(&a),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut config = load_config(args.config.as_deref())?;
    let name = match args.design {
        DesignKind::Exploratory => "exploratory",
        DesignKind::AsymptoticN => "asymptotic-n",
        DesignKind::AsymptoticT => "asymptotic-T",
        DesignKind::Custom => "custom",
    };
    let design = Design::from_parts(name, args.size, args.horizon, config.simulation.clone()).map_err(|e| match e {
        SimulateError::UnknownDesign(_) => CliError::Usage(e.to_string()),
        SimulateError::Invalid(_) => CliError::Input(e.to_string()),
    })?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.simulation = Some(design.config());
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let data = simulate_population(&design.config(), config.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    create_out(&args.out)?;
    let path = args.out.join("histories.csv");
    io::write_histories(create(&path)?, &data.histories).map_err(|e| format_error(&path, e))?;
    let path = args.out.join("truth.csv");
    io::write_truth(create(&path)?, &data.truth.ids, &data.truth.params).map_err(|e| format_error(&path, e))?;
    write_text(&args.out.join("config.toml"), &io::config_to_toml(&config))?;
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> Result<(), CliError> {
    let mut config = load_config(args.config.as_deref())?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(n) = args.iters {
        config.iterations = n;
    }
    if let Some(n) = args.burnin {
        config.burnin = n;
    }
    if let Some(n) = args.thin {
        config.thin = n;
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let data = io::read_histories(open(&args.histories)?).map_err(|e| format_error(&args.histories, e))?;
    let truth = match &args.truth {
        Some(p) => Some(io::read_truth(open(p)?).map_err(|e| format_error(p, e))?),
        None => None,
    };
    let ids: Vec<String> = data.histories.iter().map(|h| h.id.clone()).collect();
    // Truth rows may be in any order; reorder to match the histories.
    let truth = match truth {
        Some(t) => Some(align_truth(&ids, t)?),
        None => None,
    };

    let started = Instant::now();
    let total = config.iterations as u64;
    let quiet = args.quiet;
    let output: RunOutput = with_threads(args.parallelism.threads, || {
        run_chain_observed(&data.histories, &config, config.seed, |it, _| {
            if !quiet && total >= 10 && (it + 1) % (total / 10) == 0 {
                eprintln!("iteration {}/{}", it + 1, total);
            }
        })
    })??;
    let wall = started.elapsed().as_secs_f64();
    let summary = output.summarize(truth.as_ref())?;

    create_out(&args.out)?;
    let path = args.out.join("samples.csv");
    io::write_samples(create(&path)?, &ids, &output.samples).map_err(|e| format_error(&path, e))?;
    let path = args.out.join("summary.csv");
    io::write_summary(create(&path)?, &summary).map_err(|e| format_error(&path, e))?;
    if let Some(means) = &summary.individual_means {
        let path = args.out.join("individuals.csv");
        io::write_truth(create(&path)?, &ids, means).map_err(|e| format_error(&path, e))?;
    }

    let acceptance = output.acceptance_rates();
    let per_block = |v: [f64; 3]| {
        let mut m = serde_json::Map::new();
        for block in Block::ALL {
            m.insert(block.name().into(), json!(v[block.index()]));
        }
        m
    };
    let failures: Vec<_> = output
        .failures
        .iter()
        .map(|f| json!({ "iteration": f.iteration, "block": f.block.name(), "error": f.error.to_string() }))
        .collect();
    let mut meta = json!({
        "command": "fit",
        "version": env!("CARGO_PKG_VERSION"),
        "input": args.histories.display().to_string(),
        "seed": config.seed,
        "threads": args.parallelism.threads.unwrap_or_else(rayon::current_num_threads),
        "individuals": data.histories.len(),
        "horizon": data.horizon,
        "draws": output.samples.len(),
        "wall_time_secs": wall,
        "acceptance": per_block(acceptance),
        "proposal_failures": failures,
        "config": config,
    });
    if let Some(c) = summary.correlations {
        meta["truth_correlation"] = json!(per_block(c.map(|r| r.unwrap_or(f64::NAN))));
    }
    let path = args.out.join("metadata.json");
    write_text(&path, &(serde_json::to_string_pretty(&meta).expect("json") + "\n"))?;

    if !quiet {
        eprintln!(
            "{} draws in {:.1}s; acceptance pi {:.3}, gHH {:.3}, gAA {:.3}; {} proposal failures",
            output.samples.len(),
            wall,
            acceptance[0],
            acceptance[1],
            acceptance[2],
            output.failures.len()
        );
    }
    Ok(())
}

fn align_truth(ids: &[String], t: crate::simulate::TruthRecord) -> Result<crate::simulate::TruthRecord, CliError> {
    let mut params = Vec::with_capacity(ids.len());
    for id in ids {
        let k = t.ids.iter().position(|x| x == id).ok_or_else(|| CliError::Input(format!("truth file has no row for {id}")))?;
        params.push(t.params[k]);
    }
    Ok(crate::simulate::TruthRecord { ids: ids.to_vec(), params, generating: t.generating })
}

pub fn cmd_diagnose(args: &DiagnoseArgs) -> Result<(), CliError> {
    let table = io::read_samples(open(&args.samples)?).map_err(|e| format_error(&args.samples, e))?;
    let truth = match &args.truth {
        Some(p) => Some(io::read_truth(open(p)?).map_err(|e| format_error(p, e))?),
        None => None,
    };
    let generating = match &args.config {
        Some(p) => io::load_config(p).map_err(|e| format_error(p, e))?.simulation.map(|s| s.truth),
        None => None,
    };
    let report = write_diagnostics(&table, truth.as_ref(), generating.as_ref(), &args.out)
        .map_err(|e| format_error(&args.out, e))?;
    print!("{}", report.render());
    Ok(())
}

pub fn cmd_experiment(args: &ExperimentArgs) -> Result<(), CliError> {
    let plan = ExperimentPlan { iterations: args.iters, burnin: args.burnin };
    RunConfig { iterations: plan.iterations, burnin: plan.burnin, ..Default::default() }
        .validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if plan.iterations == 0 {
        return Err(CliError::Usage("--iters must be positive".into()));
    }
    let started = Instant::now();
    create_out(&args.out)?;
    let (stem, csv, text) = match args.study {
        Study::Scaling => {
            let sizes = if args.size.is_empty() { SCALING_SIZES.to_vec() } else { args.size.clone() };
            let t = with_threads(args.parallelism.threads, || scaling_experiment(&sizes, &plan, args.seed))??;
            ("scaling", t.to_csv(), t.render())
        }
        Study::Horizon => {
            let horizons = if args.horizon.is_empty() { HORIZONS.to_vec() } else { args.horizon.clone() };
            let t = with_threads(args.parallelism.threads, || horizon_experiment(&horizons, &plan, args.seed))??;
            ("horizon", t.to_csv(), t.render())
        }
    };
    write_text(&args.out.join(format!("{stem}.csv")), &csv)?;
    write_text(&args.out.join(format!("{stem}.txt")), &text)?;
    // Timing lives apart from the tables so those stay reproducible.
    let meta = json!({
        "command": "experiment",
        "study": stem,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": args.seed,
        "iterations": plan.iterations,
        "burnin": plan.burnin,
        "threads": args.parallelism.threads.unwrap_or_else(rayon::current_num_threads),
        "wall_time_secs": started.elapsed().as_secs_f64(),
    });
    write_text(&args.out.join("metadata.json"), &(serde_json::to_string_pretty(&meta).expect("json") + "\n"))?;
    print!("{text}");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Io(String::new()).exit_code(), 1);
        assert_eq!(CliError::Usage(String::new()).exit_code(), 2);
        assert_eq!(CliError::Input(String::new()).exit_code(), 3);
        assert_eq!(CliError::Numeric(String::new()).exit_code(), 4);
    }

    #[test]
    fn parse_failures_are_usage_errors() {
        let code = |args: &[&str]| Cli::try_parse_from(args).unwrap_err().exit_code();
        assert_eq!(code(&["recapture", "simulate"]), 2);
        assert_eq!(code(&["recapture", "simulate", "--design", "nope", "--out", "x"]), 2);
        assert_eq!(code(&["recapture", "--help"]), 0);
        assert!(Cli::try_parse_from(["recapture", "experiment", "scaling", "--size", "5,10", "--out", "x"]).is_ok());
    }

    #[test]
    fn engine_errors_map_to_codes() {
        assert_eq!(CliError::from(EngineError::NoData).exit_code(), 3);
        assert_eq!(CliError::from(EngineError::EmptySamples).exit_code(), 2);
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(matches!(with_threads(Some(0), || ()), Err(CliError::Usage(_))));
        assert_eq!(with_threads(Some(2), rayon::current_num_threads).unwrap(), 2);
    }
}
