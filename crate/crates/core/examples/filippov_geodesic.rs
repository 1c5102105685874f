//! A comoving geodesic through the two-slope kink, and the endpoint gaps of
//! the same geodesic integrated on the inner approximants.

use lorentz_lab::causal::{geodesic, proxy_endpoint_gaps, GeodesicOptions};
use lorentz_lab::metric::{catalog, ModelParams};
use lorentz_lab::mollify::{FamilyConfig, RegularizedFamily};

fn main() -> lorentz_lab::Result<()> {
    let m = catalog::catalog("grw_two_slope", &ModelParams::new())?;
    let (x0, v0) = (vec![-0.5, 0.0, 0.0, 0.0], vec![1.0, 0.2, 0.0, 0.0]);
    let opts = GeodesicOptions::default();
    let r = geodesic(&m.metric, &x0, &v0, 0.9, &opts)?;
    println!("status {:?}, kink crossings {}, energy drift {:.2e}", r.status, r.crossings.len(), r.energy_drift);
    println!("end point {:.6?}", r.last().x);
    let grid = m.grid(&[(-1.4, 0.8), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 5633)?;
    let fam = RegularizedFamily::build(&m.metric, &grid, &FamilyConfig::default())?;
    let gaps = proxy_endpoint_gaps(&m.metric, &fam.inner, &x0, &v0, 0.9, &opts)?;
    for (eps, gap) in fam.schedule.iter().zip(gaps) {
        println!("ε = {eps:<8} endpoint gap {gap:.3e}");
    }
    Ok(())
}
