use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use undulant::harness::{self, ExperimentConfig, Severity};

#[derive(Parser)]
#[command(
    name = "undulant",
    version,
    about = "FitzHugh-Nagumo dynamics on undulated cylinders"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a JSON config
    Run {
        config: PathBuf,
        /// Override the output directory of the config
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a config without running it
    Validate { config: PathBuf },
    /// Run the built-in operator, envelope and convergence checks
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

const CONFIG_OR_NUMERIC_ERROR: u8 = 2;

fn load(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(CONFIG_OR_NUMERIC_ERROR)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, output } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(dir) = output {
                cfg.output_dir = dir;
            }
            match harness::run(&cfg) {
                Ok(report) => {
                    for c in &report.checks {
                        println!("{c}");
                    }
                    println!("summary: {}", report.summary_path.display());
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(CONFIG_OR_NUMERIC_ERROR)
                }
            }
        }
        Command::Validate { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let diagnostics = harness::validate(&cfg);
            for d in &diagnostics {
                println!("{d}");
            }
            if diagnostics.iter().any(|d| d.severity == Severity::Error) {
                ExitCode::from(CONFIG_OR_NUMERIC_ERROR)
            } else {
                println!("ok");
                ExitCode::SUCCESS
            }
        }
        Command::Selftest { seed } => match harness::builtin_selftest(seed) {
            Ok(checks) => {
                for c in &checks {
                    println!("{c}");
                }
                if checks.iter().all(|c| c.passed) {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(1)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(CONFIG_OR_NUMERIC_ERROR)
            }
        },
    }
}
