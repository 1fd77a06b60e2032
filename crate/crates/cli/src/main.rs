use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sclkit_cli::commands::{compare, infer, optimize, sample, verify};
use sclkit_cli::format::to_json_line;
use sclkit_cli::{Problem, Result};

/// Composite and super composite likelihood inference on finite hypothesis spaces.
#[derive(Parser)]
#[command(name = "sclkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Posterior for one observation under the spec's weights.
    Infer {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Clue utilities and optimal weights, as JSON.
    Optimize {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Scores the pooling methods against the exact posterior on sampled data.
    Compare {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Runs the property suite on seeded random oracles.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Slack for the inequality checks.
        #[arg(long, default_value_t = 1e-12, allow_hyphen_values = true)]
        tolerance: f64,
        #[arg(long)]
        json: bool,
    },
    /// Draws a labelled dataset from the spec's oracle, as TSV.
    Sample {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
    },
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Infer { spec, obs, json } => {
            let problem = Problem::load(&spec)?;
            let obs = infer::read_observation(&problem, &obs)?;
            let report = infer::infer(&problem, &obs)?;
            if json {
                print!("{}", to_json_line(&report.to_json()));
            } else {
                print!("{}", report.to_tsv());
            }
        }
        Command::Optimize { spec } => {
            let problem = Problem::load(&spec)?;
            print!("{}", to_json_line(&optimize::optimize(&problem)?));
        }
        Command::Compare { spec, n, seed, json } => {
            let problem = Problem::load(&spec)?;
            let report = compare::compare(&problem, n, seed)?;
            if json {
                print!("{}", to_json_line(&report.to_json()));
            } else {
                print!("{}", report.to_tsv());
            }
        }
        Command::Verify {
            seed,
            instances,
            workers,
            tolerance,
            json,
        } => {
            let opts = verify::VerifyOptions {
                seed,
                instances,
                workers,
                tolerance,
            };
            let report = match verify::verify(&opts) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: cannot start workers: {e}");
                    return Ok(ExitCode::from(2));
                }
            };
            if json {
                print!("{}", report.to_json_text());
            } else {
                print!("{}", report.to_tsv());
            }
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sample { spec, n, seed } => {
            let problem = Problem::load(&spec)?;
            print!("{}", sample::sample(&problem, n, seed)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
