mod commands;
mod error;
mod ingest;
mod report;
mod stats;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ngg_core::montecarlo::{StartPolicy, DEFAULT_REPS};
use ngg_core::parallel::with_threads;

use commands::{Outcome, PlotArgs, SimulateArgs};
use error::{CliError, CliResult};
use ingest::{ColumnRef, IngestionSpec};
use report::{write_jsonl, Record, RunHeader, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "nwwfit", version, about = "Fit, compare, simulate and sample Normal-Weibull-Weibull models")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Cap on worker threads; results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model to a data column
    Fit(FitArgs),
    /// Fit NWW, NN, WW, N and W and rank them by AIC
    Compare(CompareArgs),
    /// Bias/MSE simulation study for given NWW parameters
    Simulate(SimulateCli),
    /// Draw an NWW sample, one value per line
    Sample(SampleArgs),
    /// Write x, pdf, cdf over a grid (and optional data histogram)
    Plotdata(PlotCli),
}

#[derive(Args, Clone)]
struct DataArgs {
    /// CSV file (RFC 4180, UTF-8)
    #[arg(long)]
    data: Option<PathBuf>,
    /// Column name, or 0-based index
    #[arg(long, default_value = "0")]
    column: String,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// The file has no header row
    #[arg(long)]
    no_header: bool,
    /// Fail on non-positive observations instead of dropping them
    #[arg(long)]
    strict: bool,
}

impl DataArgs {
    fn spec(&self) -> CliResult<IngestionSpec> {
        let path = self
            .data
            .clone()
            .ok_or_else(|| CliError::Input("--data is required".into()))?;
        if !self.delimiter.is_ascii() {
            return Err(CliError::Input("--delimiter must be a single ASCII character".into()));
        }
        Ok(IngestionSpec {
            path,
            column: ColumnRef::parse(&self.column),
            delimiter: self.delimiter as u8,
            header: !self.no_header,
            drop_nonpositive: !self.strict,
        })
    }
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    /// nww, nn, ww, normal or weibull
    #[arg(long, default_value = "nww")]
    model: String,
    #[arg(long, default_value_t = 4)]
    starts: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// JSON-lines report path
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated subset of nww,nn,ww,normal,weibull (default: all)
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 4)]
    starts: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StartArg {
    /// One local fit from the generating parameters
    Truth,
    /// Data-driven multi-start global search
    Global,
}

#[derive(Args)]
struct SimulateCli {
    /// k1,l1,k2,l2
    #[arg(long)]
    params: String,
    #[arg(long, default_value = "50,100,200,500")]
    sizes: String,
    #[arg(long, default_value_t = DEFAULT_REPS)]
    reps: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "truth")]
    start: StartArg,
    /// Starts per fit under --start global
    #[arg(long, default_value_t = 4)]
    starts: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    params: String,
    #[arg(short, long, default_value_t = 1000)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Values file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines report path
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PlotCli {
    #[arg(long)]
    params: String,
    /// lo:hi:step
    #[arg(long)]
    grid: String,
    /// CSV of x,pdf,cdf (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 30)]
    bins: usize,
    /// Histogram CSV (default: stdout after the grid)
    #[arg(long)]
    hist_out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

fn run(cli: &Cli) -> CliResult<(Outcome, Option<PathBuf>, bool)> {
    match &cli.command {
        Command::Fit(a) => Ok((
            commands::cmd_fit(&a.data.spec()?, &a.model, a.starts, a.seed)?,
            a.out.clone(),
            true,
        )),
        Command::Compare(a) => Ok((
            commands::cmd_compare(&a.data.spec()?, a.model.as_deref(), a.starts, a.seed)?,
            a.out.clone(),
            true,
        )),
        Command::Simulate(a) => {
            let start = match a.start {
                StartArg::Truth => StartPolicy::Truth,
                StartArg::Global => StartPolicy::Global,
            };
            let args = SimulateArgs {
                params: &a.params,
                sizes: &a.sizes,
                reps: a.reps,
                seed: a.seed,
                start,
                starts: a.starts,
            };
            Ok((commands::cmd_simulate(&args)?, a.out.clone(), true))
        }
        Command::Sample(a) => {
            let o = commands::cmd_sample(&a.params, a.n, a.seed, a.out.as_deref())?;
            Ok((o, a.report.clone(), a.out.is_some()))
        }
        Command::Plotdata(a) => {
            let histogram = match a.data.data {
                Some(_) => Some((a.data.spec()?, a.bins, a.hist_out.clone())),
                None => None,
            };
            let args = PlotArgs {
                params: &a.params,
                grid: &a.grid,
                out: a.out.as_deref(),
                histogram,
            };
            Ok((commands::cmd_plotdata(&args)?, a.report.clone(), a.out.is_some()))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Fit(_) => "fit",
        Command::Compare(_) => "compare",
        Command::Simulate(_) => "simulate",
        Command::Sample(_) => "sample",
        Command::Plotdata(_) => "plotdata",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    if cli.threads == Some(0) {
        eprintln!("{}", CliError::Input("--threads must be at least 1".into()));
        return ExitCode::from(error::EXIT_INPUT as u8);
    }
    let result = with_threads(cli.threads, || run(&cli)).and_then(|(outcome, report_path, table_to_stdout)| {
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
        // stdout may already carry data (sample, plotdata)
        if table_to_stdout {
            print!("{}", outcome.table);
        } else {
            eprint!("{}", outcome.table);
        }
        if let Some(path) = report_path {
            let header = RunHeader {
                schema_version: SCHEMA_VERSION,
                command: command_name(&cli.command).into(),
                argv: std::env::args().collect(),
                seed: outcome.seed,
                threads: cli.threads,
                wall_time_s: started.elapsed().as_secs_f64(),
                warnings: outcome.warnings.clone(),
            };
            let mut records = vec![Record::Run(header)];
            records.extend(outcome.records);
            write_jsonl(&path, &records)?;
        }
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
