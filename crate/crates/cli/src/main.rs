use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use thermobound::Execution;
use thermobound_cli::config::RunConfig;
use thermobound_cli::{run, CliError};

/// Global Bayesian thermometry bounds and Monte-Carlo checks.
#[derive(Parser)]
#[command(name = "thermobound", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Directory for relative output paths.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,

    /// Do not list written files on stdout.
    #[arg(long)]
    quiet: bool,
}

fn execute(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let config = RunConfig::from_json(&text)
        .and_then(RunConfig::resolve)
        .map_err(CliError::Config)?;
    run::run(&config, &args.output_dir, Execution::default())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(paths) => {
            if !args.quiet {
                for p in paths {
                    println!("{}", p.display());
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
