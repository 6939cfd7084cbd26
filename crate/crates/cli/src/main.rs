use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellfid_cli::{config, run_to_file};
use clap::{Parser, Subcommand};

/// Exit status for configs that fail to parse or validate.
const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "bellfid", version, about = "Fidelity-estimation sweep runner")]
struct Cli {
    /// Write the CSV here instead of the config's output_path.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads. Output does not depend on this value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON config and write CSV.
    Run { config: PathBuf },
    /// Check a config and print it with defaults filled in.
    Validate { config: PathBuf },
}

fn load(path: &Path, output: Option<&Path>) -> Result<config::ExperimentConfig, ExitCode> {
    config::load(path, output).map_err(|err| {
        eprintln!("error: {}: {err}", path.display());
        ExitCode::from(EXIT_INVALID)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(err) => {
            eprintln!("error: cannot start thread pool: {err}");
            return ExitCode::FAILURE;
        }
    };

    match cli.command {
        Command::Validate { config } => match load(&config, cli.output.as_deref()) {
            Ok(cfg) => {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&cfg).expect("config serializes")
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config } => {
            let cfg = match load(&config, cli.output.as_deref()) {
                Ok(cfg) => cfg,
                Err(code) => return code,
            };
            match pool.install(|| run_to_file(&cfg, &cfg.output_path)) {
                Ok(rows) => {
                    eprintln!("wrote {rows} rows to {}", cfg.output_path.display());
                    ExitCode::SUCCESS
                }
                Err(err) => {
                    eprintln!("error: {err:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
