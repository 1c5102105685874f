//! The `lorentz-lab` binary end to end: exit codes, diagnostics and reports.

use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lorentz-lab")).args(args).current_dir(cwd).output().expect("spawn lorentz-lab")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn write(dir: &Path, name: &str, src: &str) -> String {
    std::fs::write(dir.join(name), src).unwrap();
    name.to_string()
}

#[test]
fn validate_accepts_shipped_configs() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for e in std::fs::read_dir(&configs).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            let o = bin(&["validate", p.to_str().unwrap()], &configs);
            assert_eq!(o.status.code(), Some(0), "{}: {}", p.display(), text(&o));
            seen += 1;
        }
    }
    assert!(seen >= 8);
}

#[test]
fn validate_reports_the_negative_curvature_domain_rule() {
    let d = tempfile::tempdir().unwrap();
    let f = write(
        d.path(),
        "h.toml",
        "experiment = \"hawking\"\n[metric]\nmodel = \"grw_two_slope\"\n[comparison]\nn = 4\nrho = -1.0\nbeta = -2.0\n",
    );
    let o = bin(&["validate", &f], d.path());
    let t = text(&o);
    assert_eq!(o.status.code(), Some(2), "{t}");
    assert!(t.contains("precondition") && t.contains("|β| > (n−1)√|ρ|"), "{t}");
    assert!(t.contains("0 blocking"), "{t}");
}

#[test]
fn validate_flags_unresolvable_epsilon() {
    let d = tempfile::tempdir().unwrap();
    // h = 2.2/352 = 0.00625, so the smallest ε = 0.0125 is 2h
    let f = write(
        d.path(),
        "r.toml",
        "experiment = \"ricci_commutator\"\n[metric]\nmodel = \"grw_two_slope\"\n[grid]\nresolution = 353\n",
    );
    let o = bin(&["validate", &f], d.path());
    let t = text(&o);
    assert_eq!(o.status.code(), Some(2), "{t}");
    assert!(t.contains("grid.resolution") && t.contains("not resolvable") && t.contains("ε/h = 2.00"), "{t}");
}

#[test]
fn schema_errors_exit_two_and_name_the_key() {
    let d = tempfile::tempdir().unwrap();
    let f = write(d.path(), "bad.toml", "experiment = \"hawking\"\n\n[grid]\nresolution = -5\n");
    for cmd in ["validate", "run"] {
        let o = bin(&[cmd, &f], d.path());
        let t = text(&o);
        assert_eq!(o.status.code(), Some(2), "{cmd}: {t}");
        assert!(t.contains("grid.resolution"), "{cmd}: {t}");
    }
    let f = write(d.path(), "typo.toml", "experiment = \"segment\"\n[causal]\npairz = 3\n");
    let t = text(&bin(&["validate", &f], d.path()));
    assert!(t.contains("causal.pairz") && !t.contains("pairz.pairz"), "{t}");
}

#[test]
fn run_exit_codes_and_summary() {
    let d = tempfile::tempdir().unwrap();
    let ok = write(
        d.path(),
        "c.toml",
        "experiment = \"constants\"\n[output]\ndir = \"out/c\"\n[comparison.sweep]\nbetas = [-4.0, -2.0]\nrhos = [0.0, 1.0]\n",
    );
    let o = bin(&["run", &ok], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("constants PASS"));
    for f in ["report.toml", "constants.csv"] {
        assert!(d.path().join("out/c").join(f).exists(), "{f}");
    }

    let fail = write(
        d.path(),
        "s.toml",
        "experiment = \"segment\"\n[output]\ndir = \"out/s\"\n[metric]\nmodel = \"grw_eds_collapse\"\n\
         [comparison]\nkappa = -1.0\nbeta = -2.0\neta = 0.6\nT = 0.5\n[comparison.segment.check]\naudit_points = 2\n",
    );
    let o = bin(&["run", &fail], d.path());
    let t = text(&o);
    assert_eq!(o.status.code(), Some(1), "{t}");
    assert!(t.contains("[FAIL] regularity"), "{t}");

    let o = bin(&["report", "summarize", "out"], d.path());
    let t = text(&o);
    assert_eq!(o.status.code(), Some(1), "{t}");
    assert!(t.contains("constants") && t.contains("segment") && t.contains("PASS") && t.contains("FAIL"), "{t}");

    let o = bin(&["report", "summarize", "out/c"], d.path());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));

    let empty = tempfile::tempdir().unwrap();
    let o = bin(&["report", "summarize", "."], empty.path());
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
}

#[test]
fn catalog_lists_models_and_experiments() {
    let d = tempfile::tempdir().unwrap();
    let o = bin(&["catalog", "list"], d.path());
    let t = text(&o);
    assert_eq!(o.status.code(), Some(0));
    for name in ["minkowski", "grw_two_slope", "grw_eds_collapse", "grw_smooth", "hawking", "tau_convergence", "segment"] {
        assert!(t.contains(name), "missing {name}:\n{t}");
    }
}
