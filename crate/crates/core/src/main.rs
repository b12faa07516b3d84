use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use adiabatic_tomo::cli::{self, CliError, Overrides, Scenario};

/// Adiabatic two-qubit protocol simulator: spectra, dynamics, tomography,
/// zero-time extrapolation and coupler calibration.
#[derive(Parser)]
#[command(name = "adiatomo", version)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config and write its data files.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and ADIATOMO_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Scenario name overriding the one in the config.
        #[arg(long)]
        scenario: Option<String>,
    },
    /// Check a config and print the fully defaulted result.
    Validate { config: PathBuf },
    /// List the built-in scenarios.
    ListScenarios,
}

fn run(args: Args) -> Result<(), CliError> {
    match args.command {
        Command::Run { config, out, seed, scenario } => {
            let scenario = scenario
                .map(|s| s.parse::<Scenario>())
                .transpose()
                .map_err(|e| CliError::Config(cli::ConfigError::Parse(e)))?;
            let out_dir = out
                .map(|p| p.to_string_lossy().into_owned())
                .or_else(|| std::env::var(cli::OUT_DIR_ENV).ok().filter(|s| !s.is_empty()));
            let cfg = cli::load_config(&config, &Overrides { scenario, seed, out_dir })?;
            let (files, summary) = cli::execute(&cfg)?;
            for line in summary {
                println!("{line}");
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = cli::load_config(&config, &Overrides::default())?;
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<8} {}", s.name(), s.description());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("adiatomo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
