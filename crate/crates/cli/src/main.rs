use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cgdyn_cli::{execute, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(
    name = "cgdyn",
    version,
    about = "Coarse-grained Langevin dynamics experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Use the full trajectory count for Monte Carlo runs.
        #[arg(long)]
        paper_scale: bool,
        #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
        threads: Option<u16>,
        /// Output directory; overrides the config's output_path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    ValidateConfig { config: PathBuf },
}

fn load(path: &Path) -> Result<(String, ExperimentConfig), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let cfg = ExperimentConfig::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((text, cfg))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ValidateConfig { config } => match load(&config) {
            Ok((_, cfg)) => {
                println!("{}: ok ({})", config.display(), cfg.experiment);
                ExitCode::SUCCESS
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            config,
            paper_scale,
            threads,
            out,
        } => {
            let (text, cfg) = match load(&config) {
                Ok(loaded) => loaded,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(2);
                }
            };
            let opts = RunOptions {
                paper_scale,
                threads: threads.map(usize::from),
                out,
            };
            match execute(&cfg, &text, &opts) {
                Ok(summary) => {
                    for f in &summary.manifest.files {
                        println!("{}", summary.output_dir.join(&f.name).display());
                    }
                    println!(
                        "{} finished in {:.2} s",
                        cfg.experiment, summary.manifest.wall_time_seconds
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
