//! Batch runner: TOML run configs, experiment dispatch, reports with CSV
//! sidecars and two-column plot data.

pub mod config;
mod experiments;
pub mod report;

use std::path::Path;
use std::time::Instant;

pub use config::{
    validate, CausalSection, ComparisonSection, CurvatureSection, Diagnostic, Experiment, FriedrichsKind,
    FriedrichsSection, GridSection, Integrand, MetricSection, OutputSection, RunConfig, SchemaError, SegmentSection,
    Severity, SweepSection, OUTPUT_ENV,
};
pub use report::{find_reports, read_header, ReportHeader, RunReport, Verdict, REPORT_FILE, VERSION};

use crate::comparison::Check;
use crate::error::Result;
use crate::metric::catalog::{describe, MODEL_NAMES};

/// Process exit status of the subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Pass = 0,
    Fail = 1,
    Schema = 2,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Runs the configured experiment, writing `report.toml` and its sidecars
/// into `dir`. Errors raised by the experiment become a FAIL report; only
/// I/O on the report itself is returned as an error.
pub fn run_in(cfg: &RunConfig, dir: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let mut files = report::Sidecars::new(dir)?;
    let outcome = experiments::dispatch(cfg, &mut files);
    let (checks, result, error) = match outcome {
        Ok(o) => (o.checks, o.result, None),
        Err(e) => (
            vec![Check { name: "execution".into(), pass: false, detail: e.to_string() }],
            toml::Table::new(),
            Some(e.to_string()),
        ),
    };
    let pass = error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.pass);
    let model = (!matches!(cfg.experiment, Experiment::Constants | Experiment::FriedrichsSweep)).then(|| cfg.metric.model.clone());
    let rep = RunReport {
        version: VERSION.to_string(),
        experiment: cfg.experiment,
        model,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        runtime_s: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
        error,
        files: files.into_files(),
        checks,
        config: cfg.clone(),
        result,
    };
    rep.write(dir)?;
    Ok(rep)
}

/// Runs into the configured (or environment-overridden) output directory.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    run_in(cfg, &cfg.output_dir())
}

/// Outcome of `run <config>`: diagnostics that block the run, or the report.
pub enum RunOutcome {
    Rejected(Vec<Diagnostic>),
    Done(Box<RunReport>),
}

impl RunOutcome {
    pub fn status(&self) -> ExitStatus {
        match self {
            RunOutcome::Rejected(_) => ExitStatus::Schema,
            RunOutcome::Done(r) if r.passed() => ExitStatus::Pass,
            RunOutcome::Done(_) => ExitStatus::Fail,
        }
    }
}

/// Validates, then runs unless an error-severity diagnostic is present.
/// Precondition diagnostics do not block: the experiment reports them as
/// failed checks.
pub fn run_checked(cfg: &RunConfig) -> Result<RunOutcome> {
    let blocking: Vec<Diagnostic> = validate(cfg).into_iter().filter(|d| d.severity == Severity::Error).collect();
    if !blocking.is_empty() {
        return Ok(RunOutcome::Rejected(blocking));
    }
    Ok(RunOutcome::Done(Box::new(run(cfg)?)))
}

/// `catalog list`: models and experiments, one per line.
pub fn catalog_listing() -> String {
    let mut s = String::from("models:\n");
    for m in MODEL_NAMES {
        s.push_str(&format!("  {m:<20} {}\n", describe(m).unwrap_or("")));
    }
    s.push_str("experiments:\n");
    for e in Experiment::ALL {
        s.push_str(&format!("  {:<20} {}\n", e.name(), e.describe()));
    }
    s
}

/// `report summarize <dir>`: one line per report found, and the exit
/// status (Schema when nothing readable is found, Fail if any run failed).
pub fn summarize(dir: &Path) -> (String, ExitStatus) {
    let paths = match find_reports(dir) {
        Ok(p) => p,
        Err(e) => return (format!("cannot read {}: {e}\n", dir.display()), ExitStatus::Schema),
    };
    if paths.is_empty() {
        return (format!("no {REPORT_FILE} found under {}\n", dir.display()), ExitStatus::Schema);
    }
    let mut out = format!("{:<40} {:<18} {:<20} {:<7} {:>10}  failed checks\n", "report", "experiment", "model", "verdict", "runtime_s");
    let mut status = ExitStatus::Pass;
    let (mut passed, mut total) = (0, 0);
    for p in &paths {
        let rel = p.parent().and_then(|d| d.strip_prefix(dir).ok()).map_or(String::new(), |r| r.display().to_string());
        let rel = if rel.is_empty() { ".".to_string() } else { rel };
        match read_header(p) {
            Ok(h) => {
                total += 1;
                let failed: Vec<&str> = h.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                let verdict = match h.verdict {
                    Verdict::Pass => {
                        passed += 1;
                        "PASS"
                    }
                    Verdict::Fail => {
                        status = ExitStatus::Fail;
                        "FAIL"
                    }
                };
                out.push_str(&format!(
                    "{rel:<40} {:<18} {:<20} {verdict:<7} {:>10.2}  {}\n",
                    h.experiment,
                    h.model.as_deref().unwrap_or("-"),
                    h.runtime_s,
                    if failed.is_empty() { "-".to_string() } else { failed.join(",") }
                ));
            }
            Err(e) => {
                status = ExitStatus::Schema;
                out.push_str(&format!("{rel:<40} unreadable: {e}\n"));
            }
        }
    }
    out.push_str(&format!("{passed}/{total} PASS\n"));
    (out, status)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(src: &str) -> RunConfig {
        RunConfig::from_toml(src).unwrap()
    }

    #[test]
    fn constants_run_writes_report_and_table() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg("experiment = \"constants\"\n[comparison.sweep]\nbetas = [-4.0, -3.0, -2.0]\nrhos = [-1.0, 0.0, 1.0]\n");
        let rep = run_in(&c, dir.path()).unwrap();
        assert!(rep.passed(), "{:?}", rep.checks);
        let text = std::fs::read_to_string(dir.path().join("constants.csv")).unwrap();
        assert!(text.starts_with("beta,rho,n,alpha,"));
        assert_eq!(text.lines().count(), 1 + 9);
        // ρ = −1, n = 4: |β| must exceed 3
        assert_eq!(text.lines().filter(|l| l.contains("inadmissible")).count(), 2);
        let saved = std::fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap();
        assert!(saved.contains(VERSION));
        assert!(saved.contains("[config]"));
        let back: RunReport = toml::from_str(&saved).unwrap();
        assert_eq!(back.config, c);
        assert!(back.files.contains(&"constants.csv".to_string()));
        assert!(back.files.iter().any(|f| f.ends_with(".dat")));
    }

    #[test]
    fn failed_experiment_is_a_fail_report() {
        let dir = tempfile::tempdir().unwrap();
        // B reaches past the crunch at t = 1: the regularity audit fails
        let c = cfg(
            "experiment = \"segment\"\n[metric]\nmodel = \"grw_eds_collapse\"\n[comparison]\nkappa = -1.0\nbeta = -2.0\neta = 0.6\nT = 0.5\n[comparison.segment.check]\naudit_points = 2\n",
        );
        let rep = run_in(&c, dir.path()).unwrap();
        assert!(!rep.passed());
        let failed: Vec<&str> = rep.failed_checks().iter().map(|c| c.name.as_str()).collect();
        assert!(failed.contains(&"regularity"), "{:?}", rep.checks);
    }

    #[test]
    fn blocking_diagnostics_reject_the_run() {
        let c = cfg("experiment = \"ricci_commutator\"\n[metric]\nmodel = \"no_such_model\"\n");
        let o = run_checked(&c).unwrap();
        assert_eq!(o.status(), ExitStatus::Schema);
    }

    #[test]
    fn summarize_reports() {
        let dir = tempfile::tempdir().unwrap();
        let (_, st) = summarize(dir.path());
        assert_eq!(st, ExitStatus::Schema);
        let c = cfg("experiment = \"constants\"\n[comparison.sweep]\nbetas = [-4.0]\nrhos = [0.0]\n");
        run_in(&c, &dir.path().join("a")).unwrap();
        let (text, st) = summarize(dir.path());
        assert_eq!(st, ExitStatus::Pass, "{text}");
        assert!(text.contains("constants") && text.contains("1/1 PASS"), "{text}");
        std::fs::create_dir_all(dir.path().join("b")).unwrap();
        std::fs::write(dir.path().join("b").join(REPORT_FILE), "verdict = 3").unwrap();
        assert_eq!(summarize(dir.path()).1, ExitStatus::Schema);
    }

    #[test]
    fn listing_names_everything() {
        let s = catalog_listing();
        for m in MODEL_NAMES {
            assert!(s.contains(m));
        }
        for e in Experiment::ALL {
            assert!(s.contains(e.name()));
        }
    }
}
