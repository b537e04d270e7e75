//! `esibuya`: tables, simulations and verification reports for the
//! logarithmic-mixture branching process.
//!
//! Exit codes: 0 success, 1 failed verification or numerical failure,
//! 2 usage or domain error, 3 population cap exceeded.

mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use esibuya::monte_carlo::DEFAULT_MAX_POPULATION;
use esibuya::report::Suite;
use esibuya::Error;

use crate::output::{Format, OutputRecord};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "esibuya",
    version,
    about = "Logarithmic-mixture branching process: exact laws, simulation, checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability mass function of X(t), or of X(t) given X(t) > 0.
    Pmf {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        nmax: u64,
        #[arg(long)]
        conditional: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Simulate X(t) from one particle and compare with the exact law.
    Simulate {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Comma-separated, strictly increasing observation times.
        #[arg(long, value_delimiter = ',', required = true)]
        times: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        replicates: u64,
        #[arg(long, env = "ESIBUYA_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_POPULATION)]
        max_population: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a verification suite; exits 1 if any check fails.
    Verify {
        #[arg(long, default_value = "all", value_parser = clap::builder::PossibleValuesParser::new(Suite::NAMES))]
        suite: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Logarithmic-series limit law and its factorial moments.
    Limit {
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        nmax: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::Config(_) => EXIT_USAGE,
        Error::PopulationCapExceeded { .. } => EXIT_CAP,
        _ => EXIT_VERIFY_FAILED,
    }
}

fn emit(record: &OutputRecord, format: Format) -> ExitCode {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match record.write(format, &mut lock).and_then(|_| lock.flush()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(EXIT_VERIFY_FAILED)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, format) = match cli.command {
        Command::Pmf {
            alpha,
            k,
            t,
            nmax,
            conditional,
            format,
        } => (commands::pmf(alpha, k, t, nmax, conditional).map(|r| (r, true)), format),
        Command::Simulate {
            alpha,
            k,
            times,
            replicates,
            seed,
            max_population,
            format,
        } => (
            commands::simulate(alpha, k, times, replicates, seed, max_population).map(|r| (r, true)),
            format,
        ),
        Command::Verify { suite, format } => {
            let suite: Suite = suite.parse().expect("validated by clap");
            (commands::verify(suite), format)
        }
        Command::Limit { alpha, nmax, format } => (commands::limit(alpha, nmax).map(|r| (r, true)), format),
    };
    match result {
        Ok((record, passed)) => {
            let code = emit(&record, format);
            if passed {
                code
            } else {
                if let Some(verdicts) = &record.verdicts {
                    for v in verdicts.iter().filter(|v| !v.passed) {
                        eprintln!(
                            "FAILED {}: residual {:?}, tolerance {}",
                            v.check, v.residual, v.tolerance
                        );
                    }
                }
                ExitCode::from(EXIT_VERIFY_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
