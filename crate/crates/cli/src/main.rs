mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Contraction certificates and minimum-effort gains for networked systems.
#[derive(Debug, Parser)]
#[command(name = "netcontract", version, about)]
pub struct Cli {
    /// Write the run manifest here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Balance a Metzler matrix by diagonal similarity.
    Balance(commands::BalanceArgs),
    /// Minimum-effort diagonal stabilization to a target abscissa.
    Stabilize(commands::StabilizeArgs),
    /// Block bound matrix of a partitioned matrix.
    Bound(commands::BoundArgs),
    /// Local gains achieving a contraction rate for a Jacobian bound.
    Synthesize(commands::SynthesizeArgs),
    /// FitzHugh–Nagumo network tools.
    #[command(subcommand)]
    Fhn(FhnCommand),
}

#[derive(Debug, Subcommand)]
pub enum FhnCommand {
    /// Integrate the closed-loop network and write a trajectory CSV.
    Simulate(commands::SimulateArgs),
    /// Check the scaled-L2 contraction certificate.
    Certify(FhnConfigArgs),
    /// Minimal gains for the configured rate.
    Gains(FhnConfigArgs),
    /// Simulate several initial conditions and check entrainment.
    Entrain(commands::EntrainArgs),
}

#[derive(Debug, Args)]
pub struct FhnConfigArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Result JSON.
    #[arg(long, visible_alias = "out", value_name = "PATH")]
    pub output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli.command) {
        Ok(manifest) => {
            if let Err(e) = manifest.emit(cli.manifest.as_deref()) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if manifest.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
