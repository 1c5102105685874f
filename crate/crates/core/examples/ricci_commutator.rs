//! ‖Ric[g_ε] − Ric[g]⋆ρ_ε‖ on the two-slope GRW metric, whose Ricci tensor
//! carries a delta layer on the kink t = 0.

use lorentz_lab::friedrichs::ricci_commutator;
use lorentz_lab::grid::Norm;
use lorentz_lab::metric::{catalog, ModelParams};
use lorentz_lab::mollify::{FamilyConfig, RegularizedFamily};

fn main() -> lorentz_lab::Result<()> {
    let m = catalog::catalog("grw_two_slope", &ModelParams::new())?;
    let grid = m.grid(&[(-0.9, 0.6), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 3841)?;
    let fam = RegularizedFamily::build(&m.metric, &grid, &FamilyConfig::default())?;
    let k = [(-0.3, 0.3), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)];
    let r = ricci_commutator(&m, &fam, &[1.0, 2.0], &k)?;
    for (eps, row) in r.epsilons.iter().zip(&r.table) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.3e}")).collect();
        println!("ε = {eps:<8} {}", cells.join("  "));
    }
    println!("L¹ final/initial {:.3}", r.ratio(Norm::L(1.0)).unwrap_or(f64::NAN));
    Ok(())
}
