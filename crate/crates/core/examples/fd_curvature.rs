//! Finite-difference Ricci tensor of the cosh GRW model against its closed
//! form: second-order differences lose a factor ≈ 4 per halving of h.

use lorentz_lab::curvature::curvature_of;
use lorentz_lab::grid::FdScheme;
use lorentz_lab::metric::{catalog, ModelParams};

fn main() -> lorentz_lab::Result<()> {
    let m = catalog::catalog("grw_smooth", &ModelParams::new())?;
    let mut prev: Option<f64> = None;
    for res in [21, 41, 81, 161] {
        let grid = m.grid(&[(-1.0, 1.0); 4], res)?;
        let b = curvature_of(&m.metric, &grid, FdScheme::Central2)?;
        let inner = grid.box_from_coords(&[(-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]);
        let mut err = 0.0f64;
        for i in inner.indices() {
            err = err.max((b.ricci_at(&i) - m.ricci_exact(&grid.point(&i), 1.0)?).max_abs());
        }
        match prev {
            Some(p) => println!("h = {:.5}  error {err:.3e}  ratio {:.3}", grid.spacing()[0], p / err),
            None => println!("h = {:.5}  error {err:.3e}", grid.spacing()[0]),
        }
        prev = Some(err);
    }
    Ok(())
}
