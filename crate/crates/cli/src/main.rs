//! `pmlopt`: multilayer coating optimization experiments.
//!
//! Exit status: 0 on success or convergence, 2 when the iteration budget ran
//! out without convergence, 1 on any error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qga_photonics::commands::{
    cmd_compare, cmd_evaluate, cmd_optimize, cmd_rmse_study, Algorithm, CommandError, CommandReport, Invocation,
};

#[derive(Parser)]
#[command(name = "pmlopt", version, about = "Quantum-inspired GA with surrogate active learning for thin-film coatings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Size preset applied under the config file: n6, n8, n10, n12, n14, n16 or n20.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory; created if missing.
    #[arg(long, default_value = "run")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Search for the lowest-FOM coating.
    Optimize {
        #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["qga", "cga", "exhaustive"]))]
        algo: String,
        #[command(flatten)]
        common: Common,
    },
    /// Surrogate test RMSE against training-set size.
    RmseStudy {
        #[command(flatten)]
        common: Common,
    },
    /// Paired random-forest and factorization-machine runs from one initialization.
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Spectrum and FOM of one structure code.
    Evaluate {
        /// Bit string, two bits per layer.
        code: String,
        #[command(flatten)]
        common: Common,
    },
}

fn invocation(common: Common) -> Invocation {
    Invocation {
        config_path: common.config,
        preset: common.preset,
        seed: common.seed,
        out_dir: common.out,
        args: std::env::args().collect(),
    }
}

fn run(cli: Cli) -> Result<CommandReport, CommandError> {
    match cli.command {
        Command::Optimize { algo, common } => {
            let algorithm: Algorithm = algo.parse().map_err(CommandError::Usage)?;
            cmd_optimize(&invocation(common), algorithm)
        }
        Command::RmseStudy { common } => cmd_rmse_study(&invocation(common)),
        Command::Compare { common } => cmd_compare(&invocation(common)),
        Command::Evaluate { code, common } => cmd_evaluate(&invocation(common), &code),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(report) => {
            println!("{}", report.message);
            ExitCode::from(report.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
