use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use budgetext::harness::{self, parse_instance, to_json_rounded};
use budgetext::verify::{self, SweepConfig, VerifyConfig};
use budgetext::{grid_search_lw, optimal_allocation, AuctionInstance, Error, Mechanism};

/// Liquid-welfare auctions for one divisible item with budget externalities.
#[derive(Parser)]
#[command(name = "budgetext", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal liquid-welfare allocation.
    Opt {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run the uniform-price mechanism with Myerson payments.
    Mech {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        dummy_alpha: f64,
        /// Quadrature tolerance per integration segment.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Brute-force grid search for the optimal liquid welfare.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 200)]
        resolution: usize,
    },
    /// Run every check on one instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 200)]
        grid_size: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Verify seeded random instances and report aggregates.
    Sweep {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        #[arg(long, default_value_t = 32)]
        grid_size: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Report destination; the aggregates still go to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Upper bound on the ratio of any truthful mechanism.
    Bound {
        #[arg(long)]
        alpha1: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Quadrature { .. } | Error::Numerical(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = harness::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<AuctionInstance, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_instance(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print(line: String) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    writeln!(out, "{line}")?;
    Ok(())
}

/// Returns whether every check passed.
fn run(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Opt { instance } => {
            let inst = load(&instance)?;
            let (x, trace) = optimal_allocation(&inst);
            let lw = budgetext::model::liquid_welfare(&inst, &x)?;
            print(
                serde_json::to_string(&json!({
                    "allocation": x,
                    "branch": trace.branch,
                    "sorted_order": trace.sorted_order,
                    "liquid_welfare": lw,
                }))
                .map_err(Error::from)?,
            )?;
            Ok(true)
        }
        Command::Mech {
            instance,
            dummy_alpha,
            tol,
        } => {
            let inst = load(&instance)?;
            let mech = Mechanism::new(dummy_alpha)?.with_quadrature_tol(tol)?;
            let outcome = mech.run(&inst)?;
            print(to_json_rounded(&outcome, 12)?)?;
            Ok(true)
        }
        Command::Oracle {
            instance,
            resolution,
        } => {
            let inst = load(&instance)?;
            let result = grid_search_lw(&inst, resolution)?;
            print(serde_json::to_string(&result).map_err(Error::from)?)?;
            Ok(true)
        }
        Command::Verify {
            instance,
            grid_size,
            tol,
        } => {
            let inst = load(&instance)?;
            let report = verify::verify_instance(&inst, &VerifyConfig { grid_size, tol })?;
            print(serde_json::to_string(&report).map_err(Error::from)?)?;
            for (name, check) in report.checks.iter().filter(|(_, c)| !c.pass) {
                eprintln!(
                    "check {} failed (witness {:?})",
                    name.as_str(),
                    check.witness
                );
            }
            Ok(report.all_pass())
        }
        Command::Sweep {
            trials,
            seed,
            n_min,
            n_max,
            grid_size,
            tol,
            out,
            format,
        } => {
            let config = SweepConfig {
                n_min,
                n_max,
                trials,
                seed,
                grid_size,
                tol,
                ..SweepConfig::default()
            };
            let report = verify::sweep(&config)?;
            let format = format.unwrap_or(match &out {
                Some(p) if p.extension().is_some_and(|e| e == "csv") => Format::Csv,
                _ => Format::Json,
            });
            match out {
                Some(path) => {
                    let mut file = BufWriter::new(File::create(&path)?);
                    match format {
                        Format::Csv => harness::write_csv(&report, &mut file)?,
                        Format::Json => {
                            serde_json::to_writer(&mut file, &report).map_err(Error::from)?;
                            writeln!(file)?;
                        }
                    }
                    file.flush()?;
                    print(serde_json::to_string(&report.aggregates).map_err(Error::from)?)?;
                }
                None => match format {
                    Format::Csv => harness::write_csv(&report, io::stdout().lock())?,
                    Format::Json => print(serde_json::to_string(&report).map_err(Error::from)?)?,
                },
            }
            if report.aggregates.failures > 0 {
                eprintln!("{} check(s) failed", report.aggregates.failures);
            }
            Ok(report.aggregates.failures == 0)
        }
        Command::Bound { alpha1 } => {
            let rho = verify::upper_bound_rho(alpha1)?;
            print(
                serde_json::to_string(&json!({ "alpha1": alpha1, "rho": rho }))
                    .map_err(Error::from)?,
            )?;
            Ok(true)
        }
    }
}
