use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qpde::analysis::{bounds_sweep, write_report_csv, SweepConfig};
use qpde::circuit::{export_qasm, step_circuit};
use qpde::error::Error;
use qpde::experiment::{load_config, run_experiment};
use qpde::hamilton::Order;

/// Overrides the output directory of every subcommand.
const OUTPUT_ENV: &str = "QPDE_OUTPUT_DIR";
const DEFAULT_OUTPUT: &str = "qpde-out";

#[derive(Parser)]
#[command(
    name = "qpde",
    version,
    about = "Trotter circuits for advection and wave equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its CSV artifacts.
    Run { config: PathBuf },
    /// Check a config and report every problem.
    Validate { config: PathBuf },
    /// Measured Trotter error against the closed-form bounds.
    BoundsSweep {
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Comma-separated, `1`/`2` or `first`/`second`.
        #[arg(long, default_value = "1,2", value_delimiter = ',', value_parser = parse_order)]
        orders: Vec<Order>,
        #[arg(long, value_delimiter = ',')]
        taus: Option<Vec<f64>>,
    },
    /// Write one lowered Trotter step (or `--steps` of them) as OpenQASM 3.
    ExportQasm {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        steps: usize,
    },
}

fn parse_order(s: &str) -> Result<Order, String> {
    match s.trim() {
        "1" | "first" => Ok(Order::First),
        "2" | "second" => Ok(Order::Second),
        other => Err(format!("unknown order {other:?}")),
    }
}

enum Failure {
    Config(String),
    Violation(Vec<String>),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn output_dir(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUTPUT_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => configured.map_or_else(|| PathBuf::from(DEFAULT_OUTPUT), Path::to_path_buf),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { config } => {
            load_config(&config)?;
            println!("{}: ok", config.display());
        }
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let dir = output_dir(cfg.output_dir.as_deref());
            let summary = run_experiment(&cfg, &dir)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} files to {}", summary.files.len(), dir.display());
            if !summary.violations.is_empty() {
                return Err(Failure::Violation(summary.violations));
            }
        }
        Command::BoundsSweep {
            n_min,
            n_max,
            orders,
            taus,
        } => {
            if n_min > n_max {
                return Err(Failure::Config(format!(
                    "--n-min {n_min} exceeds --n-max {n_max}"
                )));
            }
            let mut cfg = SweepConfig {
                n_min,
                n_max,
                orders,
                ..SweepConfig::default()
            };
            if let Some(t) = taus {
                cfg.taus = t;
            }
            let reports = bounds_sweep(&cfg)?;
            let dir = output_dir(None);
            std::fs::create_dir_all(&dir).map_err(Error::from)?;
            let path = dir.join("bounds.csv");
            let file = std::fs::File::create(&path).map_err(Error::from)?;
            write_report_csv(&reports, std::io::BufWriter::new(file)).map_err(Error::from)?;
            let bad: Vec<String> = reports
                .iter()
                .filter(|r| !r.within_bound())
                .map(|r| {
                    format!(
                        "{} n = {} tau = {}: {:.3e} > {:.3e}",
                        r.kind, r.n, r.tau, r.measured_error, r.bound
                    )
                })
                .collect();
            println!(
                "{} points, {} violations, wrote {}",
                reports.len(),
                bad.len(),
                path.display()
            );
            if !bad.is_empty() {
                return Err(Failure::Violation(bad));
            }
        }
        Command::ExportQasm { config, out, steps } => {
            let cfg = load_config(&config)?;
            let p = cfg.problem.ok_or_else(|| {
                Failure::Config(format!("{}: export-qasm needs a problem", config.display()))
            })?;
            let circuit = step_circuit(&p)?.lower().repeat(steps.max(1));
            std::fs::write(&out, export_qasm(&circuit)?).map_err(Error::from)?;
            println!("wrote {} gates to {}", circuit.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which is reserved for violations here
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Violation(lines)) => {
            for l in &lines {
                eprintln!("violation: {l}");
            }
            ExitCode::from(2)
        }
    }
}
