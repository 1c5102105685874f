use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lorentz_lab::cli::{self, ExitStatus, RunConfig, RunOutcome, Severity};

#[derive(Parser)]
#[command(name = "lorentz-lab", version, about = "Numerical laboratory for Lipschitz Lorentzian singularity bounds")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Catalog operations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Report operations.
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List models and experiments.
    List,
}

#[derive(Subcommand)]
enum ReportAction {
    /// One line per report.toml found under a directory.
    Summarize { dir: PathBuf },
}

fn load(path: &PathBuf) -> Result<RunConfig, ExitCode> {
    RunConfig::from_path(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        exit(ExitStatus::Schema)
    })
}

fn exit(s: ExitStatus) -> ExitCode {
    ExitCode::from(s.code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match args.command {
        Command::Run { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match cli::run_checked(&cfg) {
                Ok(RunOutcome::Rejected(diags)) => {
                    for d in &diags {
                        eprintln!("{}: {d}", config.display());
                    }
                    exit(ExitStatus::Schema)
                }
                Ok(RunOutcome::Done(rep)) => {
                    let dir = cfg.output_dir();
                    for c in &rep.checks {
                        println!("[{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
                    }
                    let verdict = if rep.passed() { "PASS" } else { "FAIL" };
                    println!("{} {verdict} in {:.2} s -> {}", rep.experiment.name(), rep.runtime_s, dir.display());
                    exit(if rep.passed() { ExitStatus::Pass } else { ExitStatus::Fail })
                }
                Err(e) => {
                    eprintln!("cannot write report: {e}");
                    exit(ExitStatus::Fail)
                }
            }
        }
        Command::Validate { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let diags = cli::validate(&cfg);
            for d in &diags {
                println!("{d}");
            }
            if diags.is_empty() {
                println!("{}: ok", config.display());
                exit(ExitStatus::Pass)
            } else {
                let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
                println!("{} diagnostics ({errors} blocking)", diags.len());
                exit(ExitStatus::Schema)
            }
        }
        Command::Catalog { action: CatalogAction::List } => {
            print!("{}", cli::catalog_listing());
            exit(ExitStatus::Pass)
        }
        Command::Report { action: ReportAction::Summarize { dir } } => {
            let (text, status) = cli::summarize(&dir);
            print!("{text}");
            exit(status)
        }
    }
}
