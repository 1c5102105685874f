//! Library entry point of the `lorentz-lab run` subcommand: validate a TOML
//! config, run it into a directory and read back the report.

use lorentz_lab::cli::{run_in, validate, RunConfig};

const CONFIG: &str = r#"
experiment = "friedrichs_sweep"
seed = 1

[friedrichs]
case = "kink"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::from_toml(CONFIG)?;
    for d in validate(&cfg) {
        println!("{d}");
    }
    let dir = std::env::temp_dir().join("lorentz-lab-batch-example");
    let report = run_in(&cfg, &dir)?;
    for c in &report.checks {
        println!("[{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    println!("{:?} -> {} ({} files)", report.verdict, dir.display(), report.files.len());
    Ok(())
}
