//! The comparison constants over a small (β, ρ) table for n = 4: the bound
//! α(β, ρ), the residual K(β, α, ρ) and C^{A−} at T = α.

use lorentz_lab::comparison::{const_alpha, const_ca_minus, const_k, ComparisonParams};

fn main() -> lorentz_lab::Result<()> {
    let n = 4;
    println!("{:>6} {:>6} {:>12} {:>12} {:>12}", "beta", "rho", "alpha", "K(alpha)", "C^A-");
    for rho in [-1.0, 0.0, 1.0] {
        for beta in [-6.0, -4.0, -2.0] {
            match const_alpha(beta, rho, n) {
                Ok(alpha) => {
                    let p = ComparisonParams { n, beta, rho, t: alpha, kappa: -1.0, eta: 0.5 };
                    println!(
                        "{beta:>6} {rho:>6} {alpha:>12.6} {:>12.1e} {:>12.6}",
                        const_k(&p)?,
                        const_ca_minus(&p)?
                    );
                }
                Err(e) => println!("{beta:>6} {rho:>6}   inadmissible: {e}"),
            }
        }
    }
    Ok(())
}
