use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use sgcp_cli::commands::{self, Outcome};
use sgcp_cli::{CliResult, HarnessConfig, Overrides};

#[derive(Debug, Parser)]
#[command(name = "sgcp", version, about = "Sigmoidal Gaussian Cox process intensity learning")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate point patterns from the configured truth.
    Simulate {
        /// Number of patterns.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Fit the hierarchy to the patterns in a directory.
    Fit {
        /// Directory of pattern CSV files; defaults to the output directory.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Run the contraction-rate experiment.
    Bench,
    /// Run the joint-distribution calibration test.
    Calibrate,
    /// Check the hyperprior tails, the link and the kernel.
    VerifyPriors,
}

fn run(cli: Cli) -> CliResult<Outcome> {
    let n = match cli.command {
        Command::Simulate { n } => n,
        _ => None,
    };
    let cfg = HarnessConfig::load(cli.config.as_deref(), &Overrides { seed: cli.seed, out: cli.out, n })?;
    match cli.command {
        Command::Simulate { .. } => commands::simulate(&cfg),
        Command::Fit { data } => {
            let dir = data.unwrap_or_else(|| cfg.output_dir.clone());
            commands::fit(&cfg, &dir)
        }
        Command::Bench => commands::bench(&cfg),
        Command::Calibrate => commands::calibrate(&cfg),
        Command::VerifyPriors => commands::verify_priors(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
