//! Segment-type inequality on the unit box of Σ = {t = 0} in the collapsing
//! dust model; the worldvolume of Ω is 7/24 in closed form.

use lorentz_lab::comparison::{segment_check, ComparisonParams, SegmentConfig};
use lorentz_lab::curvature::Hypersurface;
use lorentz_lab::metric::{catalog, ModelParams};

fn main() -> lorentz_lab::Result<()> {
    let m = catalog::catalog("grw_eds_collapse", &ModelParams::new())?;
    let sigma = Hypersurface::slice(0.0, vec![(-2.0, 2.0); 3]);
    let p = ComparisonParams { kappa: -1.0, beta: -2.0, eta: 0.3, t: 0.5, ..Default::default() };
    let r = segment_check(&m.metric, &sigma, &[(0.0, 1.0); 3], &|_| 1.0, &p, &SegmentConfig::default())?;
    println!("lhs {:.6} ≤ rhs {:.6}: {}", r.lhs, r.rhs, r.pass);
    println!("C^A− {:.6}, σ(B) {:.6}, vol Ω {:.6} (7/24 = {:.6})", r.ca_minus, r.area, r.omega_integral, 7.0 / 24.0);
    Ok(())
}
