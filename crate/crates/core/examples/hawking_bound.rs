//! Singularity bound sup τ_Σ ≤ α(β, 0) on the two-slope models: the sharp
//! case (m1 = m2 = 1) saturates the bound, the strict case (m1 = 0.5) does not.

use lorentz_lab::comparison::{hawking_experiment, HawkingConfig};
use lorentz_lab::metric::{catalog, ModelParams};

fn main() -> lorentz_lab::Result<()> {
    for (label, m1) in [("sharp", 1.0), ("strict", 0.5)] {
        let model = catalog::catalog("grw_two_slope", &ModelParams::new().with("m1", m1).with("m2", 1.0))?;
        let r = hawking_experiment(&model, &HawkingConfig::default())?;
        println!("{label}: β = {:.4}, α = {:.4}, sup τ_Σ = {:.4}", r.beta, r.alpha.unwrap_or(f64::NAN), r.sup_tau.unwrap_or(f64::NAN));
        for f in &r.floors {
            println!("  ε = {:<8} λ = {:.2e}  floor = {:+.3e}  negative part = {:.3e}", f.epsilon, f.lambda, f.floor, f.negative_part);
        }
        for c in &r.checks {
            println!("  [{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail);
        }
        println!("  verdict {} in {:.1} s", if r.verdict { "PASS" } else { "FAIL" }, r.runtime_s);
    }
    Ok(())
}
