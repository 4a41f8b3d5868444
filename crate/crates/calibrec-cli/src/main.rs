use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use calibrec_cli::config::ExperimentConfig;
use calibrec_cli::{cmd_abtest, cmd_evaluate, cmd_simulate, cmd_train, CliError};

/// Calibrated-recommendation experiment runner.
#[derive(Parser)]
#[command(name = "calibrec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate logged bandit feedback from the synthetic environment.
    Simulate {
        #[arg(long, default_value = "default.experiment")]
        config: PathBuf,
        /// Override the simulator seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train the engagement model on a triplet file.
    Train {
        #[arg(long, default_value = "default.experiment")]
        config: PathBuf,
        #[arg(long)]
        triplets: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Off-policy evaluation of every declared policy on an eval split.
    Evaluate {
        #[arg(long, default_value = "default.experiment")]
        config: PathBuf,
        #[arg(long)]
        triplets: PathBuf,
        #[arg(long)]
        episodes: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve fresh simulated traffic split between two policy arms.
    Abtest {
        #[arg(long, default_value = "default.experiment")]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// A/A mode: both arms serve the control policy.
        #[arg(long)]
        aa: bool,
        /// Override the fresh-traffic seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, seed, out } => {
            let config = ExperimentConfig::load(&config)?;
            let summary = cmd_simulate(&config, seed, out)?;
            println!(
                "wrote {} train / {} eval triplets to {}",
                summary.metadata.train_triplets,
                summary.metadata.eval_triplets,
                summary.out_dir.display()
            );
            Ok(())
        }
        Command::Train { config, triplets, out } => {
            let config = ExperimentConfig::load(&config)?;
            let summary = cmd_train(&config, &triplets, out)?;
            println!(
                "checkpoint {} (final train loss {:.6}, validation {:.6?})",
                summary.checkpoint.display(),
                summary.final_train_loss,
                summary.final_validation_loss
            );
            Ok(())
        }
        Command::Evaluate { config, triplets, episodes, checkpoint, out } => {
            let config = ExperimentConfig::load(&config)?;
            cmd_evaluate(&config, &triplets, &episodes, &checkpoint, out)?;
            Ok(())
        }
        Command::Abtest { config, checkpoint, aa, seed, out } => {
            let config = ExperimentConfig::load(&config)?;
            cmd_abtest(&config, &checkpoint, aa, seed, out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
