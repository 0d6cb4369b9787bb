mod cmd;
mod dataset_io;
mod error;
mod report;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use error::{CliError, CliResult};
use report::Sink;

/// Environment variable holding the worker thread count.
const THREADS_ENV: &str = "BPGC_THREADS";

#[derive(Parser)]
#[command(name = "bpgc", version, about = "Bivariate Poisson-Gamma conditionals: evaluate, sample, fit, test")]
struct Cli {
    /// Write the JSON run report to this file instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the density at a point or over a grid.
    Eval(cmd::eval::EvalArgs),
    /// Draw a sample and write it as x,y CSV.
    Sample(cmd::sample::SampleArgs),
    /// Maximum likelihood fit of a dataset.
    Fit(cmd::fit::FitArgs),
    /// Fit, simulate from the fit, and run the Fasano-Franceschini test.
    Gof(cmd::gof::GofArgs),
    /// Repeated simulate/fit/test study over several sample sizes.
    Simstudy(cmd::simstudy::SimstudyArgs),
    /// Generate a synthetic dataset from a built-in template.
    MakeDataset(cmd::make_dataset::MakeDatasetArgs),
    /// Emit 2-D histogram counts of a dataset for plotting.
    Histogram(cmd::histogram::HistogramArgs),
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV}={raw:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let sink = Sink {
        report_path: cli.report,
        started: Instant::now(),
    };
    match cli.command {
        Command::Eval(a) => cmd::eval::run(a, &sink),
        Command::Sample(a) => cmd::sample::run(a, &sink),
        Command::Fit(a) => cmd::fit::run(a, &sink),
        Command::Gof(a) => cmd::gof::run(a, &sink),
        Command::Simstudy(a) => cmd::simstudy::run(a, &sink),
        Command::MakeDataset(a) => cmd::make_dataset::run(a, &sink),
        Command::Histogram(a) => cmd::histogram::run(a, &sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
