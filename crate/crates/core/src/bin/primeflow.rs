use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, ValueEnum};

use primeflow::prime_count::{DEFAULT_FAST_LIMIT, DEFAULT_SIEVE_LIMIT};
use primeflow::report::{self, GridSpec, OutputFormat, RunConfig, Subcommand};
use primeflow::{Error, PrimeCounter};

/// Exact prime counts, reciprocal-prime sums and the logarithmic density flow.
#[derive(Debug, Parser)]
#[command(name = "primeflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Single scale N (or cutoff Λ for `mertens`).
    #[arg(long, global = true)]
    n: Option<u64>,
    #[arg(long, global = true)]
    n1: Option<u64>,
    #[arg(long, global = true)]
    n2: Option<u64>,
    /// Flow time t = ln λ.
    #[arg(long, global = true, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Initial density of the flow.
    #[arg(long, global = true)]
    d0: Option<f64>,
    /// Order of the series realisation of the flow.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// `start:stop:points-per-decade` or a comma-separated list.
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_SIEVE_LIMIT)]
    limit_sieve: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_FAST_LIMIT)]
    limit_fast: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the randomized verification batches.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Debug, Clone, Copy, clap::Subcommand)]
enum Command {
    /// π(n) for one scale or a grid.
    Pi,
    /// Reciprocal-prime sums, F̄ and the residual against ln ln Λ.
    Mertens,
    /// Empirical density against the 1/ln n and Li(n)/n models.
    Density,
    /// The flow at (t, d0) by closed form, series and RK4.
    Flow,
    /// 1/d(N1) − 1/d(N2) against ln(N1/N2).
    ScaleCheck,
    /// Combined per-scale table with seeded flow verification.
    Report,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn config(cli: Cli) -> Result<RunConfig, Error> {
    let subcommand = match cli.command {
        Command::Pi => Subcommand::Pi,
        Command::Mertens => Subcommand::Mertens,
        Command::Density => Subcommand::Density,
        Command::Flow => Subcommand::Flow,
        Command::ScaleCheck => Subcommand::ScaleCheck,
        Command::Report => Subcommand::Report,
    };
    let grid = cli
        .grid
        .as_deref()
        .map(str::parse::<GridSpec>)
        .transpose()?;
    Ok(RunConfig {
        subcommand,
        n: cli.n,
        n1: cli.n1,
        n2: cli.n2,
        t: cli.t,
        d0: cli.d0,
        order: cli.order,
        grid,
        limits: PrimeCounter::new(cli.limit_sieve, cli.limit_fast),
        format: match cli.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        out: cli.out,
        seed: cli.seed,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match config(cli).and_then(|c| report::run(&c)) {
        Ok(Some(text)) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("primeflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
