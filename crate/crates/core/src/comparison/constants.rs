use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The constants bundle (n, κ, β, ρ, η, T) of the comparison results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonParams {
    pub n: usize,
    /// Timelike Ricci lower bound, Ric ≥ nκ; κ < 0.
    pub kappa: f64,
    /// Mean curvature bound; β < 0.
    pub beta: f64,
    /// Strong-energy shift, Ric ≥ (n−1)ρ on unit timelike vectors.
    pub rho: f64,
    pub eta: f64,
    #[serde(rename = "T")]
    pub t: f64,
}

impl Default for ComparisonParams {
    fn default() -> Self {
        Self { n: 4, kappa: -4.0, beta: -4.0, rho: 0.0, eta: 1.0, t: 1.0 }
    }
}

impl ComparisonParams {
    pub fn new(n: usize, kappa: f64, beta: f64, rho: f64, eta: f64, t: f64) -> Self {
        Self { n, kappa, beta, rho, eta, t }
    }

    fn nm1(&self) -> f64 {
        self.n as f64 - 1.0
    }

    /// Field-level range checks.
    pub fn check(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Domain(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.beta < 0.0) {
            return Err(Error::Domain(format!("β must be negative, got {}", self.beta)));
        }
        if !self.rho.is_finite() {
            return Err(Error::Domain("ρ must be finite".into()));
        }
        Ok(())
    }

    /// Hypotheses of the singularity bound: β < 0 and, for ρ < 0,
    /// |β| > (n−1)√|ρ|.
    pub fn hawking_diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Err(e) = self.check() {
            out.push(e.to_string());
            return out;
        }
        if self.rho < 0.0 {
            let need = self.nm1() * (-self.rho).sqrt();
            if !(self.beta.abs() > need) {
                out.push(format!("ρ = {} < 0 needs |β| > (n−1)√|ρ| = {need}, got |β| = {}", self.rho, self.beta.abs()));
            }
        }
        out
    }

    /// All cross-field hypotheses (segment-type comparison and singularity
    /// bound), one message per violated rule.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = self.hawking_diagnostics();
        if self.check().is_err() {
            return out;
        }
        let nm1 = self.nm1();
        if !(self.kappa < 0.0) {
            out.push(format!("κ must be negative, got {}", self.kappa));
        } else if self.beta < -nm1 * (-self.kappa).sqrt() {
            out.push(format!(
                "β = {} violates β ≥ −(n−1)√|κ| = {}",
                self.beta,
                -nm1 * (-self.kappa).sqrt()
            ));
        }
        if !(self.eta > 0.0) {
            out.push(format!("η must be positive, got {}", self.eta));
        }
        if !(self.t > 0.0) {
            out.push(format!("T must be positive, got {}", self.t));
        }
        if self.rho > 0.0 && self.rho.sqrt() * self.t > FRAC_PI_2 {
            out.push(format!("ρ > 0 needs √ρ·T ≤ π/2, got {}", self.rho.sqrt() * self.t));
        }
        out
    }
}

/// sinh(a)/sinh(b) for 0 ≤ a ≤ b without overflow.
fn sinh_ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 1.0;
    }
    if a == 0.0 {
        return 0.0;
    }
    (a - b).exp() * (-2.0 * a).exp_m1() / (-2.0 * b).exp_m1()
}

/// Backwards area comparison constant (sinh(η√|κ|)/sinh((T+η)√|κ|))^{n−1}.
pub fn const_ca_minus(p: &ComparisonParams) -> Result<f64> {
    if p.n < 2 {
        return Err(Error::Domain(format!("n must be at least 2, got {}", p.n)));
    }
    if !(p.kappa < 0.0) || !(p.eta > 0.0) || !(p.t >= 0.0) {
        return Err(Error::Domain(format!(
            "C^A− needs κ < 0, η > 0, T ≥ 0 (got κ={}, η={}, T={})",
            p.kappa, p.eta, p.t
        )));
    }
    let k = (-p.kappa).sqrt();
    let r = sinh_ratio(p.eta * k, (p.t + p.eta) * k);
    // κ → 0⁻ makes both arguments vanish; the ratio tends to η/(T+η)
    let r = if r.is_finite() { r } else { p.eta / (p.t + p.eta) };
    Ok(r.powi(p.n as i32 - 1))
}

/// K(β, T, ρ) in its three branches.
pub fn const_k(p: &ComparisonParams) -> Result<f64> {
    p.check()?;
    if !(p.t > 0.0) {
        return Err(Error::Domain(format!("K needs T > 0, got {}", p.t)));
    }
    let (b, nm1, t) = (p.beta.abs(), p.nm1(), p.t);
    if p.rho == 0.0 {
        Ok(b - nm1 / t)
    } else if p.rho < 0.0 {
        let s = (-p.rho).sqrt();
        Ok(b - nm1 * s / (s * t).tanh())
    } else {
        let s = p.rho.sqrt();
        if s * t > FRAC_PI_2 {
            return Err(Error::Domain(format!("K needs √ρ·T ≤ π/2, got {}", s * t)));
        }
        Ok(b - nm1 * s / (s * t).tan())
    }
}

/// α(β, ρ): the root of T ↦ K(β, T, ρ), the Hawking bound on sup τ_Σ.
pub fn const_alpha(beta: f64, rho: f64, n: usize) -> Result<f64> {
    ComparisonParams { n, beta, rho, ..Default::default() }.check()?;
    let (b, nm1) = (beta.abs(), n as f64 - 1.0);
    if rho == 0.0 {
        return Ok(nm1 / b);
    }
    if rho < 0.0 {
        let s = (-rho).sqrt();
        let z = b / (nm1 * s);
        if !(z > 1.0) {
            return Err(Error::Domain(format!("ρ < 0 needs |β| > (n−1)√|ρ| = {}, got |β| = {b}", nm1 * s)));
        }
        // coth⁻¹ z = ½ ln((z+1)/(z−1))
        return Ok(0.5 * (2.0 / (z - 1.0)).ln_1p() / s);
    }
    let s = rho.sqrt();
    let alpha = (nm1 * s / b).atan() / s;
    debug_assert!(alpha < FRAC_PI_2 / s);
    Ok(alpha)
}

/// Test function h of the second-variation argument.
#[derive(Clone)]
pub enum HChoice {
    /// 1 − t/T.
    Affine,
    /// sinh(√|ρ|(T−t))/sinh(√|ρ|T), for ρ < 0.
    Sinh,
    /// sin(√ρ(T−t))/sin(√ρT), for ρ > 0.
    Sin,
    /// A user-supplied h with its derivative.
    Custom {
        h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        dh: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for HChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HChoice::Affine => "Affine",
            HChoice::Sinh => "Sinh",
            HChoice::Sin => "Sin",
            HChoice::Custom { .. } => "Custom",
        })
    }
}

impl HChoice {
    /// The choice matching the sign of ρ.
    pub fn canonical(rho: f64) -> Self {
        if rho == 0.0 {
            HChoice::Affine
        } else if rho < 0.0 {
            HChoice::Sinh
        } else {
            HChoice::Sin
        }
    }
}

type Pair = Box<dyn Fn(f64) -> (f64, f64)>;

fn h_pair(choice: &HChoice, p: &ComparisonParams) -> Result<Pair> {
    let t = p.t;
    Ok(match choice {
        HChoice::Affine => Box::new(move |s| (1.0 - s / t, -1.0 / t)),
        HChoice::Sinh => {
            if !(p.rho < 0.0) {
                return Err(Error::InvalidTestFunction("the sinh choice needs ρ < 0".into()));
            }
            let k = (-p.rho).sqrt();
            let d = (k * t).sinh();
            Box::new(move |s| ((k * (t - s)).sinh() / d, -k * (k * (t - s)).cosh() / d))
        }
        HChoice::Sin => {
            if !(p.rho > 0.0) {
                return Err(Error::InvalidTestFunction("the sin choice needs ρ > 0".into()));
            }
            let k = p.rho.sqrt();
            if !(k * t < std::f64::consts::PI) {
                return Err(Error::InvalidTestFunction(format!("the sin choice needs √ρ·T < π, got {}", k * t)));
            }
            let d = (k * t).sin();
            Box::new(move |s| ((k * (t - s)).sin() / d, -k * (k * (t - s)).cos() / d))
        }
        HChoice::Custom { h, dh } => {
            let (h0, ht) = (h(0.0), h(t));
            if (h0 - 1.0).abs() > 1e-9 || ht.abs() > 1e-9 {
                return Err(Error::InvalidTestFunction(format!("need h(0)=1 and h(T)=0, got {h0} and {ht}")));
            }
            for i in 0..=1000 {
                let s = t * i as f64 / 1000.0;
                let v = h(s);
                if !(v.abs() <= 1.0 + 1e-12) {
                    return Err(Error::InvalidTestFunction(format!("|h({s})| = {} exceeds 1", v.abs())));
                }
            }
            let (h, dh) = (h.clone(), dh.clone());
            Box::new(move |s| (h(s), dh(s)))
        }
    })
}

/// |β| + ∫₀ᵀ [−(n−1)ḣ² + h²·profile(t)] dt − K(β, T, ρ), by composite Simpson
/// on `panels` panels. With the canonical h and profile ≡ (n−1)ρ the
/// second-variation bookkeeping makes this vanish.
pub fn index_form(choice: &HChoice, p: &ComparisonParams, profile: &dyn Fn(f64) -> f64, panels: usize) -> Result<f64> {
    let k = const_k(p)?;
    let h = h_pair(choice, p)?;
    let panels = panels.max(1);
    let nm1 = p.nm1();
    let f = |s: f64| {
        let (v, d) = h(s);
        -nm1 * d * d + v * v * profile(s)
    };
    let w = p.t / panels as f64;
    let mut acc = 0.0;
    for i in 0..panels {
        let a = i as f64 * w;
        acc += f(a) + 4.0 * f(a + 0.5 * w) + f(a + w);
    }
    Ok(p.beta.abs() + acc * w / 6.0 - k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, beta: f64, rho: f64, t: f64) -> ComparisonParams {
        ComparisonParams { n, beta, rho, t, ..Default::default() }
    }

    #[test]
    fn ca_minus_examples() {
        let p = |n, kappa, eta, t| ComparisonParams { n, kappa, eta, t, ..Default::default() };
        assert_eq!(const_ca_minus(&p(5, -2.0, 0.3, 0.0)).unwrap(), 1.0);
        let v = const_ca_minus(&p(2, -1.0, 1.0, 1.0)).unwrap();
        assert!((v - 1f64.sinh() / 2f64.sinh()).abs() < 1e-15);
        assert!((v - 0.324027).abs() < 1e-6);
        assert!((const_ca_minus(&p(3, -1e-10, 1.0, 1.0)).unwrap() - 0.25).abs() < 1e-8);
        // large arguments do not overflow: ≈ e^{−(n−1)T√|κ|}
        let big = const_ca_minus(&p(4, -400.0, 1.0, 1.0)).unwrap();
        assert!((big.ln() + 60.0).abs() < 1e-9, "{big}");
        assert!(const_ca_minus(&p(4, 0.0, 1.0, 1.0)).is_err());
        assert!(const_ca_minus(&p(4, -1.0, 0.0, 1.0)).is_err());
        assert!(const_ca_minus(&p(4, -1.0, 1.0, -0.1)).is_err());
    }

    #[test]
    fn k_examples() {
        assert!((const_k(&params(4, -4.0, 0.0, 1.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((const_k(&params(4, -4.0, -1.0, 50.0)).unwrap() - 1.0).abs() < 1e-10);
        assert!(const_k(&params(4, -4.0, 1.0, 1.6)).is_err());
        assert!(const_k(&params(4, -4.0, 0.0, 0.0)).is_err());
        for rho in [0.0, -1.0, 1.0] {
            let n = 4;
            let b = if rho < 0.0 { -3.5 } else { -3.0 };
            let a = const_alpha(b, rho, n).unwrap();
            assert!(const_k(&params(n, b, rho, a)).unwrap().abs() < 1e-12, "ρ={rho}");
        }
    }

    #[test]
    fn alpha_examples() {
        assert!((const_alpha(-3.0, 0.0, 4).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(const_alpha(-3.0, -1.0, 4), Err(Error::Domain(_))));
        let a = const_alpha(-1e-12, 1.0, 4).unwrap();
        assert!((a - FRAC_PI_2).abs() < 1e-9);
        assert!(const_alpha(0.0, 0.0, 4).is_err());
    }

    #[test]
    fn index_form_branches_vanish() {
        let v = index_form(&HChoice::Affine, &params(4, -4.0, 0.0, 1.0), &|_| 0.0, 1).unwrap();
        assert!(v.abs() < 1e-12);
        let p = params(4, -4.0, -1.0, 1.0);
        let v = index_form(&HChoice::Sinh, &p, &|_| -3.0, 10_000).unwrap();
        assert!(v.abs() < 1e-6);
        let p = params(4, -4.0, 1.0, std::f64::consts::FRAC_PI_3);
        let v = index_form(&HChoice::Sin, &p, &|_| 3.0, 10_000).unwrap();
        assert!(v.abs() < 1e-6);
    }

    #[test]
    fn non_canonical_h_is_not_sharp() {
        // affine h against a negative ρ profile overshoots the sinh optimum
        let p = params(4, -4.0, -1.0, 1.0);
        let v = index_form(&HChoice::Affine, &p, &|_| -3.0, 1000).unwrap();
        assert!(v < -1e-3);
    }

    #[test]
    fn invalid_custom_h_is_refused() {
        let p = params(4, -4.0, 0.0, 1.0);
        let bad = HChoice::Custom { h: Arc::new(|s| 1.0 - 0.5 * s), dh: Arc::new(|_| -0.5) };
        assert!(matches!(index_form(&bad, &p, &|_| 0.0, 10), Err(Error::InvalidTestFunction(_))));
        let tall = HChoice::Custom { h: Arc::new(|s| (1.0 - s) * (1.0 + 3.0 * s)), dh: Arc::new(|s| 2.0 - 6.0 * s) };
        assert!(index_form(&tall, &p, &|_| 0.0, 10).is_err());
        let ok = HChoice::Custom { h: Arc::new(|s| (1.0 - s) * (1.0 - s)), dh: Arc::new(|s| -2.0 * (1.0 - s)) };
        // ∫ −3·4(1−s)² = −4, so the value is 4 − 4 − 1
        let v = index_form(&ok, &p, &|_| 0.0, 100).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
        assert!(index_form(&HChoice::Sin, &p, &|_| 0.0, 10).is_err());
    }

    #[test]
    fn diagnostics_cite_the_domain_rule() {
        let d = ComparisonParams { n: 4, beta: -2.0, rho: -1.0, ..Default::default() }.diagnostics();
        assert!(d.iter().any(|m| m.contains("|β| > (n−1)√|ρ| = 3")), "{d:?}");
        assert!(ComparisonParams { n: 4, beta: -1.5, kappa: -1.0, ..Default::default() }.diagnostics().is_empty());
    }
}
