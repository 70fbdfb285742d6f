use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};
use twl_cli::{run, CliError, Command, Format, RunConfig};

/// Position and orientation error bounds for single-anchor two-way
/// localization.
#[derive(Debug, Parser)]
#[command(name = "twl", version)]
struct Args {
    #[command(subcommand)]
    command: Command,

    /// TOML config; omitted keys take their defaults, so an empty file runs
    /// the reference scenario. Required; checked after parsing because clap
    /// rejects required globals placed after the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (stdout if absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

fn execute(args: &Args, config_path: &Path) -> Result<(), CliError> {
    let mut config = RunConfig::from_path(config_path)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
        config.validate()?;
    }
    let table = run(args.command, &config)?;
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(args.format, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            table.write(args.format, &mut w)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let Some(config_path) = &args.config else {
        Args::command()
            .error(
                ErrorKind::MissingRequiredArgument,
                "--config <CONFIG> is required",
            )
            .exit()
    };
    match execute(&args, config_path) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("twl: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
