//! Time separations under the inner approximants increase towards τ under
//! the Lipschitz two-slope metric.

use lorentz_lab::causal::{comoving_offset_pairs, tau_monotonicity_check, TauSearch};
use lorentz_lab::metric::{catalog, ModelParams};
use lorentz_lab::mollify::{FamilyConfig, RegularizedFamily};

fn main() -> lorentz_lab::Result<()> {
    let m = catalog::catalog("grw_two_slope", &ModelParams::new())?;
    let grid = m.grid(&[(-1.4, 0.8), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 5633)?;
    let fam = RegularizedFamily::build(&m.metric, &grid, &FamilyConfig::default())?;
    let pairs = comoving_offset_pairs(&m.metric, &[(-0.6, -0.1), (-0.3, 0.3), (-0.3, 0.3), (-0.3, 0.3)], (0.2, 0.6), 0.5, 5, 1);
    let r = tau_monotonicity_check(&m.metric, &fam, &pairs, &TauSearch::default(), true);
    for row in &r.rows {
        println!("τ_k {:.5?} → τ {:.5}  chain {}", row.tau_k, row.tau, row.chain_holds);
    }
    let gaps: Vec<String> = r.max_gap.iter().map(|g| format!("{g:.2e}")).collect();
    println!("max relative gap per ε [{}]", gaps.join(", "));
    Ok(())
}
