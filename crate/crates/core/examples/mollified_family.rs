//! Regularized family of the two-slope GRW metric: the cone shifts λ_ε of
//! the inner and outer approximants shrink with ε.

use lorentz_lab::metric::{catalog, ModelParams};
use lorentz_lab::mollify::{FamilyConfig, RegularizedFamily};

fn main() -> lorentz_lab::Result<()> {
    let m = catalog::catalog("grw_two_slope", &ModelParams::new())?;
    let grid = m.grid(&[(-1.4, 0.8), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 5633)?;
    let fam = RegularizedFamily::build(&m.metric, &grid, &FamilyConfig::default())?;
    println!("trust region {:?}", fam.trust);
    for k in 0..fam.schedule.len() {
        println!(
            "ε = {:<8} inner margin {:.3e}  outer margin {:.3e}",
            fam.schedule[k], fam.inner_margins[k], fam.outer_margins[k]
        );
    }
    Ok(())
}
