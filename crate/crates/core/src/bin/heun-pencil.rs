use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use heun_pencil::config::RunConfig;
use heun_pencil::runner::{run_simulate, run_verify, RunError, EXIT_OK};

/// Integrate Heun-pencil flows and verify the elliptic-dynamics identities.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the flow; writes trajectory.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate and run the checks; writes report.json.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, RunError> {
    match cli.command {
        Command::Simulate { config } => {
            let out = run_simulate(&RunConfig::load(&config)?)?;
            let s = &out.summary;
            println!(
                "{}: {} rows, w0 = {:.12e}, W drift = {:.2e}, classification {}",
                s.model, s.rows, s.w0, s.conservation_drift.w, s.classification
            );
            println!(
                "wrote {} and {}",
                out.trajectory_path.display(),
                out.summary_path.display()
            );
            Ok(EXIT_OK)
        }
        Command::Verify { config } => {
            let out = run_verify(&RunConfig::load(&config)?)?;
            for c in &out.report.checks {
                let verdict = if c.is_skipped() {
                    "SKIP"
                } else if c.pass {
                    "PASS"
                } else {
                    "FAIL"
                };
                let note = c
                    .reason
                    .as_deref()
                    .map(|r| format!(" ({r})"))
                    .unwrap_or_default();
                println!(
                    "{verdict} {:<24} {:.3e} <= {:.1e}{note}",
                    c.name, c.max_residual, c.tolerance
                );
            }
            println!("wrote {}", out.report_path.display());
            Ok(out.exit_code())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
