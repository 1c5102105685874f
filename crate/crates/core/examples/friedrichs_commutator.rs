//! First-order Friedrichs commutator on the kink pair a = |x|, f = sign(x):
//! L^p norms decay along the schedule while L^∞ stays bounded.

use lorentz_lab::friedrichs::{commutator_sweep, kernel_mass, FriedrichsCase};
use lorentz_lab::grid::Norm;

fn main() -> lorentz_lab::Result<()> {
    let schedule: Vec<f64> = (0..5).map(|k| 0.2 * 0.5f64.powi(k)).collect();
    let case = FriedrichsCase::kink(8001, schedule.clone())?;
    let r = commutator_sweep(&case, 0)?;
    for (k, eps) in r.epsilons.iter().enumerate() {
        let row: Vec<String> = r.norms.iter().zip(&r.table[k]).map(|(n, v)| format!("{n:?} {v:.3e}")).collect();
        println!("ε = {eps:<8} {}", row.join("  "));
    }
    println!("L¹ final/initial {:.3}, L∞ within 3× median: {}", r.ratio(Norm::L(1.0)).unwrap_or(f64::NAN), r.bounded(3.0));
    for eps in schedule {
        let m = kernel_mass(&case, eps, 0)?;
        println!("ε = {eps:<8} kernel mass {:.4} / {:.4} (bound {:.4})", m.over_x, m.over_y, m.bound);
    }
    Ok(())
}
