use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{gauss_legendre, Grid};

/// Radial mollifier profile on the unit ball (unnormalized).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// exp(1/(r² − 1)) for r < 1.
    StandardBump,
    /// (1 − r²)³ for r < 1.
    PolynomialBump,
}

impl Profile {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "standard_bump" => Ok(Profile::StandardBump),
            "polynomial_bump" => Ok(Profile::PolynomialBump),
            other => Err(Error::InvalidParam(format!(
                "unknown mollifier profile `{other}` (standard_bump, polynomial_bump)"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Profile::StandardBump => "standard_bump",
            Profile::PolynomialBump => "polynomial_bump",
        }
    }

    pub fn value(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - r * r;
        match self {
            Profile::StandardBump => (-1.0 / q).exp(),
            Profile::PolynomialBump => q * q * q,
        }
    }

    /// dρ/dr.
    pub fn derivative(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        let q = 1.0 - r * r;
        match self {
            Profile::StandardBump => (-1.0 / q).exp() * (-2.0 * r / (q * q)),
            Profile::PolynomialBump => -6.0 * r * q * q,
        }
    }
}

/// Composite Gauss–Legendre quadrature of `f` over [a, b].
pub(crate) fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(c + 0.5 * h * xi);
        }
    }
    0.5 * h * s
}

fn gamma_half(n: usize) -> f64 {
    // Γ(n/2) for integer n ≥ 1
    let mut g = if n % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if n % 2 == 0 { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere S^{n−1} ⊂ ℝⁿ (|S⁰| = 2).
pub fn sphere_area(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// Normalization constant c with ∫_{ℝⁿ} c·ρ(|x|) dx = 1.
pub fn normalization(profile: Profile, n: usize) -> f64 {
    let radial = quad(|r| profile.value(r) * r.powi(n as i32 - 1), 0.0, 1.0, 64, 20);
    1.0 / (sphere_area(n) * radial)
}

/// A mollifier ρ_ε discretized on a grid. Homogeneous axes are integrated
/// out analytically, so the stencil lives on the regular axes only.
#[derive(Clone, Debug)]
pub struct MollifierKernel {
    profile: Profile,
    epsilon: f64,
    dim: usize,
    normalization: f64,
    regular_axes: Vec<usize>,
    half_width: Vec<usize>,
    spacing: Vec<f64>,
    /// (offset per regular axis, weight); weights sum to 1.
    stencil: Vec<(Vec<isize>, f64)>,
}

impl MollifierKernel {
    pub fn new(profile: Profile, epsilon: f64, grid: &Grid) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidParam(format!("epsilon must be positive, got {epsilon}")));
        }
        let floor = 4.0 * grid.max_spacing();
        if epsilon < floor * (1.0 - 1e-9) {
            return Err(Error::UnderResolved { epsilon, floor });
        }
        let dim = grid.dim();
        let regular_axes = grid.regular_axes();
        let spacing: Vec<f64> = regular_axes.iter().map(|&a| grid.spacing()[a]).collect();
        let half_width: Vec<usize> = spacing.iter().map(|h| (epsilon / h + 1e-9).floor() as usize).collect();
        let c = normalization(profile, dim);
        let hidden = dim - regular_axes.len();

        let mut cell = 1.0;
        for h in &spacing {
            cell *= h;
        }
        let widths: Vec<usize> = half_width.iter().map(|hw| 2 * hw + 1).collect();
        let count: usize = widths.iter().product();
        let mut stencil = Vec::new();
        for mut flat in 0..count {
            let mut offsets = vec![0isize; widths.len()];
            for k in (0..widths.len()).rev() {
                offsets[k] = (flat % widths[k]) as isize - half_width[k] as isize;
                flat /= widths[k];
            }
            let s2: f64 = offsets.iter().zip(&spacing).map(|(o, h)| (*o as f64 * h).powi(2)).sum();
            if s2 < epsilon * epsilon {
                let w = marginal_density(profile, c, dim, hidden, epsilon, s2.sqrt()) * cell;
                if w > 0.0 {
                    stencil.push((offsets, w));
                }
            }
        }
        let total: f64 = stencil.iter().map(|(_, w)| w).sum();
        if !(total > 0.0) {
            return Err(Error::UnderResolved { epsilon, floor });
        }
        for (_, w) in &mut stencil {
            *w /= total;
        }
        Ok(Self { profile, epsilon, dim, normalization: c, regular_axes, half_width, spacing, stencil })
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn regular_axes(&self) -> &[usize] {
        &self.regular_axes
    }

    /// Stencil half-width in cells per regular axis.
    pub fn half_width(&self) -> &[usize] {
        &self.half_width
    }

    pub fn stencil(&self) -> &[(Vec<isize>, f64)] {
        &self.stencil
    }

    pub fn weight_sum(&self) -> f64 {
        self.stencil.iter().map(|(_, w)| w).sum()
    }

    /// ρ_ε(z) = ε^{−n} c ρ(|z|/ε) in the full chart dimension.
    pub fn density(&self, z: &[f64]) -> f64 {
        let r = z.iter().map(|c| c * c).sum::<f64>().sqrt() / self.epsilon;
        self.normalization * self.profile.value(r) / self.epsilon.powi(self.dim as i32)
    }

    /// ∇ρ_ε(z).
    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let norm = z.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            return vec![0.0; z.len()];
        }
        let d = self.normalization * self.profile.derivative(norm / self.epsilon) / self.epsilon.powi(self.dim as i32 + 1);
        z.iter().map(|c| d * c / norm).collect()
    }

    /// Density of ρ_ε integrated over every axis but one, at offset `s`
    /// along that axis: the mollification of a unit single layer.
    pub fn line_density(&self, s: f64) -> f64 {
        marginal_density(self.profile, self.normalization, self.dim, self.dim - 1, self.epsilon, s.abs())
    }

    /// ∫_{ℝⁿ} |∇ρ| for the unit-scale normalized profile.
    pub fn gradient_mass(&self) -> f64 {
        let n = self.dim;
        let p = self.profile;
        self.normalization * sphere_area(n) * quad(|r| p.derivative(r).abs() * r.powi(n as i32 - 1), 0.0, 1.0, 64, 20)
    }

    /// Discrete second moment Σ w z_a² along a regular axis.
    pub fn second_moment(&self, axis: usize) -> f64 {
        let k = self.regular_axes.iter().position(|&a| a == axis).expect("regular axis");
        self.stencil
            .iter()
            .map(|(o, w)| w * (o[k] as f64 * self.spacing[k]).powi(2))
            .sum()
    }
}

/// Density of ρ_ε integrated over `hidden` extra dimensions at distance `s`
/// from the origin of the remaining ones.
fn marginal_density(profile: Profile, c: f64, n: usize, hidden: usize, eps: f64, s: f64) -> f64 {
    let scale = c / eps.powi(n as i32);
    if hidden == 0 {
        return scale * profile.value(s / eps);
    }
    let rmax = (eps * eps - s * s).max(0.0).sqrt();
    if rmax == 0.0 {
        return 0.0;
    }
    let f = |r: f64| profile.value((s * s + r * r).sqrt() / eps) * r.powi(hidden as i32 - 1);
    scale * sphere_area(hidden) * quad(f, 0.0, rmax, 8, 16)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(h: f64) -> Grid {
        let n = (2.0 / h).round() as usize + 1;
        Grid::new(&[(-1.0, 1.0)], &[n]).unwrap()
    }

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((sphere_area(2) - 2.0 * pi).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * pi).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * pi * pi).abs() < 1e-13);
    }

    #[test]
    fn stencil_half_width_and_mass() {
        let k = MollifierKernel::new(Profile::StandardBump, 0.1, &line(0.01)).unwrap();
        assert_eq!(k.half_width(), &[10]);
        assert!((k.weight_sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn under_resolved_is_refused() {
        let g = line(0.01);
        assert!(matches!(
            MollifierKernel::new(Profile::StandardBump, 0.02, &g),
            Err(Error::UnderResolved { .. })
        ));
        assert!(MollifierKernel::new(Profile::StandardBump, 0.04, &g).is_ok());
    }

    #[test]
    fn standard_bump_normalized_in_1d() {
        // independent oracle: fine trapezoid over [−1, 1] (all derivatives vanish at ±1)
        let c = normalization(Profile::StandardBump, 1);
        let n = 200_000;
        let h = 2.0 / n as f64;
        let s: f64 = (0..=n)
            .map(|i| {
                let x = -1.0 + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * Profile::StandardBump.value(x.abs())
            })
            .sum::<f64>()
            * h;
        assert!((c * s - 1.0).abs() < 1e-12, "{}", c * s);
        assert!((1.0 / c - 0.443_993_816_168_079_4).abs() < 1e-12);
    }

    #[test]
    fn marginal_matches_full_kernel_mass() {
        // the marginal over 3 hidden axes must integrate to one over the remaining axis
        let c = normalization(Profile::PolynomialBump, 4);
        let eps = 0.3;
        let m = quad(|s| marginal_density(Profile::PolynomialBump, c, 4, 3, eps, s.abs()), -eps, eps, 64, 16);
        assert!((m - 1.0).abs() < 1e-10, "{m}");
    }

    #[test]
    fn line_density_integrates_to_one() {
        let g = Grid::new(&[(-1.0, 1.0), (-1.0, 1.0)], &[201, 201]).unwrap();
        let k = MollifierKernel::new(Profile::StandardBump, 0.2, &g).unwrap();
        let m = quad(|s| k.line_density(s), -0.2, 0.2, 64, 16);
        assert!((m - 1.0).abs() < 1e-10, "{m}");
        // 1D: ∫|ρ'| = 2 max ρ = 2c/e
        let k1 = MollifierKernel::new(Profile::StandardBump, 0.2, &line(0.01)).unwrap();
        assert!((k1.gradient_mass() - 2.0 * k1.normalization() / std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let k = MollifierKernel::new(Profile::StandardBump, 0.2, &line(0.01)).unwrap();
        let z = 0.07;
        let fd = (k.density(&[z + 1e-6]) - k.density(&[z - 1e-6])) / 2e-6;
        assert!((k.gradient(&[z])[0] - fd).abs() < 1e-6 * fd.abs().max(1.0));
    }
}
