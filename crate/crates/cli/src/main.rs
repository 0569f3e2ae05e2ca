use std::process::ExitCode;

use abring_cli::config::Experiment;
use abring_cli::{execute, RunOptions};
use clap::{Parser, Subcommand};

/// Eigenvalue and eigenspace anholonomy experiments on a flux-threaded ring.
#[derive(Debug, Parser)]
#[command(name = "abring", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Spectrum, velocities and currents over a flux grid.
    Spectrum(RunOptions),
    /// Closed-form and grid final states after whole flux quanta.
    Cycle(RunOptions),
    /// Holonomy matrices M, W and M^(g) with the regauge check.
    Holonomy(RunOptions),
    /// Truncated W against its closed form for growing windows.
    WConvergence(RunOptions),
    /// One grid run with norm and overlap series.
    Propagate(RunOptions),
    /// Extra phase from quadrature and from a grid run.
    PhaseAudit(RunOptions),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, opts) = match cli.command {
        Command::Spectrum(o) => (Experiment::Spectrum, o),
        Command::Cycle(o) => (Experiment::Cycle, o),
        Command::Holonomy(o) => (Experiment::Holonomy, o),
        Command::WConvergence(o) => (Experiment::WConvergence, o),
        Command::Propagate(o) => (Experiment::Propagate, o),
        Command::PhaseAudit(o) => (Experiment::PhaseAudit, o),
    };
    match execute(experiment, &opts) {
        Ok(outcome) => {
            for a in &outcome.report.assertions {
                println!("{} {}: {}", if a.passed { "ok  " } else { "FAIL" }, a.name, a.detail);
            }
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
