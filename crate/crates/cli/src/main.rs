use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rbx_cli::{
    cmd_analyze, cmd_extend, cmd_simulate, cmd_sweep, cmd_verify, ingest_dataset, Format,
    IngestOptions, PlotTable, Resolved, RunConfig, SCHEMA_VERSION,
};
use rbx_core::verify::default_lambda_grid;
use rbx_core::{CheckName, Dataset};

/// Residual analysis and penalized basis extension for weighted vector data.
#[derive(Parser)]
#[command(name = "rbx", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Description length, residual span and covariance spectrum of the current basis
    Analyze(DataArgs),
    /// Grow the basis one accepted direction at a time
    Extend(DataArgs),
    /// Classify how a simulated batch changes the extension decision
    Simulate {
        #[command(flatten)]
        args: DataArgs,
        /// Simulated data file
        #[arg(long)]
        sim: PathBuf,
    },
    /// Accepted dimension count across a grid of lambda values
    Sweep {
        #[command(flatten)]
        args: DataArgs,
        /// Comma-separated, strictly increasing lambda values
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        lambda_grid: Option<Vec<f64>>,
    },
    /// Run the randomized property checks
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Output {
    /// Write the JSON report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a whitespace-separated table for plotting
    #[arg(long)]
    plot_data: Option<PathBuf>,
    /// Include wall-clock duration in the report (makes output non-reproducible)
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct DataArgs {
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Data file (CSV or JSON)
    #[arg(long)]
    data: PathBuf,
    /// Data file format; inferred from the extension when omitted
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// The last CSV column holds weights
    #[arg(long)]
    weight_column: bool,
    /// Overrides the seed from the config
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional JSON run configuration; only `seed` is used
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run every check (the default when no --check is given)
    #[arg(long, conflicts_with = "check")]
    all: bool,
    /// Run one named check; may be repeated
    #[arg(long, value_parser = parse_check)]
    check: Vec<CheckName>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Grid used by the signatures check
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    lambda_grid: Option<Vec<f64>>,
    #[command(flatten)]
    output: Output,
}

fn parse_check(s: &str) -> Result<CheckName, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = CheckName::ALL.iter().map(|c| c.as_str()).collect();
        format!(
            "unknown check `{s}` (expected one of: {})",
            names.join(", ")
        )
    })
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    schema_version: &'static str,
    command: &'static str,
    #[serde(flatten)]
    report: &'a T,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_clock_seconds: Option<f64>,
}

fn emit<T: Serialize + PlotTable>(
    command: &'static str,
    report: &T,
    out: &Output,
    started: Instant,
) -> Result<()> {
    let envelope = Envelope {
        schema_version: SCHEMA_VERSION,
        command,
        report,
        wall_clock_seconds: out.timing.then(|| started.elapsed().as_secs_f64()),
    };
    let mut json = serde_json::to_string_pretty(&envelope)?;
    json.push('\n');
    match &out.out {
        Some(path) => write_file(path, &json)?,
        None => std::io::stdout().lock().write_all(json.as_bytes())?,
    }
    if let Some(path) = &out.plot_data {
        write_file(path, &report.plot_table())?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn load(args: &DataArgs) -> Result<(Resolved, Dataset)> {
    let cfg = RunConfig::load(&args.config)?;
    let data = ingest_dataset(&args.data, &ingest_options(args, cfg.declared_dim()))?;
    let run = cfg.resolve(data.ambient_dim(), args.seed)?;
    Ok((run, data))
}

fn ingest_options(args: &DataArgs, dim_hint: Option<usize>) -> IngestOptions {
    IngestOptions {
        format: args.format,
        weight_column: args.weight_column,
        dim_hint,
    }
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool> {
    let started = Instant::now();
    match command {
        Command::Analyze(args) => {
            let (run, data) = load(&args)?;
            emit("analyze", &cmd_analyze(&run, &data)?, &args.output, started)?;
        }
        Command::Extend(args) => {
            let (run, data) = load(&args)?;
            emit("extend", &cmd_extend(&run, &data)?, &args.output, started)?;
        }
        Command::Simulate { args, sim } => {
            let (run, data) = load(&args)?;
            let sim = ingest_dataset(&sim, &ingest_options(&args, Some(data.ambient_dim())))?;
            emit(
                "simulate",
                &cmd_simulate(&run, &data, &sim)?,
                &args.output,
                started,
            )?;
        }
        Command::Sweep { args, lambda_grid } => {
            let (run, data) = load(&args)?;
            let grid = lambda_grid.unwrap_or_else(default_lambda_grid);
            emit(
                "sweep",
                &cmd_sweep(&run, &data, &grid)?,
                &args.output,
                started,
            )?;
        }
        Command::Verify(args) => {
            let config_seed = match &args.config {
                Some(path) => RunConfig::load(path)?.seed,
                None => 0,
            };
            let checks = if args.all || args.check.is_empty() {
                CheckName::ALL.to_vec()
            } else {
                args.check
            };
            let seed = args.seed.unwrap_or(config_seed);
            let report = cmd_verify(seed, &checks, args.trials, args.lambda_grid.as_deref())?;
            emit("verify", &report, &args.output, started)?;
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!(
                    "check {} failed on {} of {} instances",
                    c.report.name,
                    c.report.failures.len(),
                    c.report.instances
                );
            }
            return Ok(report.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
