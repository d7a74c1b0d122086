//! `mlab`: batch driver for the curvature identity lab.
//!
//! Subcommands: `run` (execute a scenario file), `sweep` (vary one numeric
//! scenario field), `list-checks`, `list-surfaces`.
//!
//! Exit codes: 0 all verdicts pass; 1 numerical failure; 2 hypothesis
//! violation; 64 usage/config/schema errors.

mod runner;
mod scenario;

use clap::{Parser, Subcommand};
use minkowski_lab::error::LabError;
use minkowski_lab::report::Severity;
use scenario::Scenario;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_NUMERICAL: u8 = 1;
const EXIT_HYPOTHESIS: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "mlab",
    about = "curvature identity laboratory: integral identities, inequality chains, \
             rigidity probes and eigenvalue bounds on parametric surfaces",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check in a scenario file and write reports.
    Run {
        /// Scenario JSON path.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report files (default: scenario's output.dir
        /// or "reports").
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores). Results are identical for
        /// any value.
        #[arg(long)]
        threads: Option<usize>,
        /// Multiply all tolerances by this factor.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
    /// Re-run a scenario over a list of values for one numeric field and
    /// emit a CSV table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Dotted path into the scenario JSON, e.g. surface.params.eps
        #[arg(long)]
        axis: String,
        /// Comma-separated numeric values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
    /// Print the check registry with parameter summaries.
    ListChecks,
    /// Print the surface registry with parameter summaries.
    ListSurfaces,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems (including unknown subcommands) exit 64; the
            // built-in help/version output exits 0.
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                LabError::Config(_) | LabError::Argument(_) | LabError::Size(_) => EXIT_USAGE,
                LabError::Hypothesis(_) => EXIT_HYPOTHESIS,
                _ => EXIT_NUMERICAL,
            };
            ExitCode::from(code)
        }
    }
}

fn install_pool(threads: Option<usize>) -> Result<(), LabError> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load_scenario(path: &PathBuf) -> Result<Scenario, LabError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
    Scenario::parse(&text)
}

fn dispatch(cli: Cli) -> Result<ExitCode, LabError> {
    match cli.command {
        Command::Run { config, out, threads, tol_scale } => {
            install_pool(threads)?;
            let scenario = load_scenario(&config)?;
            let outcome = runner::run_scenario(&scenario, tol_scale)?;
            let dir = out
                .or_else(|| scenario.output.as_ref().map(|o| PathBuf::from(&o.dir)))
                .unwrap_or_else(|| PathBuf::from("reports"));
            runner::write_reports(&outcome, &dir)?;
            for (i, envelope) in outcome.reports.iter().enumerate() {
                println!(
                    "[{i:03}] {:<28} {:?}",
                    envelope.check.check_id(),
                    envelope.check.severity()
                );
            }
            println!(
                "{} reports written to {}",
                outcome.reports.len(),
                dir.display()
            );
            Ok(match outcome.severity {
                Severity::Pass => ExitCode::SUCCESS,
                Severity::NumericalFailure => ExitCode::from(EXIT_NUMERICAL),
                Severity::HypothesisViolation => ExitCode::from(EXIT_HYPOTHESIS),
            })
        }
        Command::Sweep { config, axis, values, out, threads, tol_scale } => {
            install_pool(threads)?;
            if values.is_empty() {
                return Err(LabError::Config("sweep needs at least one value".into()));
            }
            let scenario = load_scenario(&config)?;
            let csv = runner::sweep(&scenario, &axis, &values, tol_scale)?;
            match out {
                Some(dir) => {
                    std::fs::create_dir_all(&dir)?;
                    let path = dir.join("sweep.csv");
                    std::fs::write(&path, &csv)?;
                    println!("sweep table written to {}", path.display());
                }
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListChecks => {
            print!("{}", runner::list_checks());
            Ok(ExitCode::SUCCESS)
        }
        Command::ListSurfaces => {
            print!("{}", runner::list_surfaces());
            Ok(ExitCode::SUCCESS)
        }
    }
}
