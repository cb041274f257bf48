use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "torflow", about = "Normalized Ricci flow with fixed vectorial torsion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the flow and write diagnostics, snapshots and a summary.
    Run {
        config: PathBuf,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Solve the stationary oracle and compare against a finished run.
    Oracle {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Run the invariant/property suites for the configured domain.
    Check {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// Classify the linear stability of a sphere configuration.
    Stability {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, quiet } => torflow::cli::cmd_run(&config, out.as_deref(), quiet),
        Command::Oracle { config, out, quiet } => {
            torflow::cli::cmd_oracle(&config, out.as_deref(), quiet)
        }
        Command::Check { config, out, quiet } => {
            torflow::cli::cmd_check(&config, out.as_deref(), quiet)
        }
        Command::Stability { config, out, quiet } => {
            torflow::cli::cmd_stability(&config, out.as_deref(), quiet)
        }
    };
    ExitCode::from(code as u8)
}
