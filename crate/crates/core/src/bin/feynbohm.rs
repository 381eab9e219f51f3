//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on unreadable input or unwritable output,
//! 2 on configuration errors, 3 on numerical failure (the manifest is then
//! written with `complete = false`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use feynbohm::scenario::{execute, parse_config, ExecuteError, ScenarioConfig, ScenarioKind};

#[derive(Parser)]
#[command(name = "feynbohm", version, about = "Path sums, Bohmian trajectories and imaginary-time runs from config files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        /// Override every seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override `output.dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Print nothing on success.
        #[arg(long)]
        quiet: bool,
    },
    /// Parse and validate a config file, then print the resolved config.
    Validate {
        config: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
    /// List scenario names.
    ListScenarios {
        /// Print the default config of one scenario instead.
        #[arg(long)]
        defaults: Option<String>,
    },
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(1)
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("config error in {}:\n{e}", path.display());
        ExitCode::from(2)
    })
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListScenarios { defaults: None } => {
            for k in ScenarioKind::ALL {
                println!("{:<16} {}", k.name(), k.description());
            }
            ExitCode::SUCCESS
        }
        Command::ListScenarios { defaults: Some(name) } => match ScenarioKind::ALL.into_iter().find(|k| k.name() == name) {
            Some(k) => {
                print!("{}", ScenarioConfig::defaults(k).to_toml());
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: unknown scenario `{name}`");
                ExitCode::from(2)
            }
        },
        Command::Validate { config, quiet } => match load(&config) {
            Ok(cfg) => {
                if !quiet {
                    print!("{}", cfg.to_toml());
                }
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, seed, out_dir, quiet } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            if let Some(d) = out_dir {
                cfg.output.dir = d.to_string_lossy().into_owned();
            }
            let dir = PathBuf::from(&cfg.output.dir);
            match execute(&cfg, &dir) {
                Ok(manifest) => {
                    if !quiet {
                        println!(
                            "{}: {} files in {} ({:.2} s)",
                            manifest.scenario,
                            manifest.files.len() + 1,
                            dir.display(),
                            manifest.wall_time_seconds
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(ExecuteError::Numerical { error, .. }) => {
                    eprintln!("error: {error} (partial results in {})", dir.display());
                    ExitCode::from(3)
                }
                Err(e @ ExecuteError::Io(_)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
