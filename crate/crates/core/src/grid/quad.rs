use super::{Grid, IndexBox, SampledField};
use crate::error::{Error, Result};

/// Integration region: a lattice sub-box, a coordinate box, or a point mask.
#[derive(Clone, Debug)]
pub enum Region {
    Full,
    Valid,
    Box(IndexBox),
    Coords(Vec<(f64, f64)>),
    Mask(Vec<bool>),
}

impl Region {
    fn resolve(&self, field: &SampledField) -> Result<(IndexBox, Option<&[bool]>)> {
        let grid = field.grid();
        let b = match self {
            Region::Full => grid.full_box(),
            Region::Valid => field.valid().clone(),
            Region::Box(b) => b.intersect(&grid.full_box()),
            Region::Coords(c) => grid.box_from_coords(c),
            Region::Mask(m) => {
                if m.len() != grid.len() {
                    return Err(Error::GridMismatch);
                }
                if !m.iter().any(|&x| x) {
                    return Err(Error::EmptyRegion);
                }
                return Ok((grid.full_box(), Some(m)));
            }
        };
        if b.is_empty() {
            return Err(Error::EmptyRegion);
        }
        Ok((b, None))
    }
}

/// Norm selector for [`lp_norm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    L(f64),
    Inf,
}

impl Norm {
    pub fn label(self) -> String {
        match self {
            Norm::L(p) => format!("{p}"),
            Norm::Inf => "inf".into(),
        }
    }
}

/// Product trapezoid weights for the lattice points of `b`, in row-major
/// order. Homogeneous axes are weighted by their nominal extent.
pub fn trapezoid_weights(grid: &Grid, b: &IndexBox) -> Vec<f64> {
    let axis_weights: Vec<Vec<f64>> = (0..grid.dim())
        .map(|a| {
            if grid.is_homogeneous(a) {
                return vec![grid.spacing()[a]];
            }
            let h = grid.spacing()[a];
            let (lo, hi) = (b.lo[a], b.hi[a]);
            (lo..=hi)
                .map(|i| if lo == hi { 0.0 } else if i == lo || i == hi { 0.5 * h } else { h })
                .collect()
        })
        .collect();
    b.indices()
        .iter()
        .map(|idx| {
            idx.iter()
                .enumerate()
                .map(|(a, &i)| axis_weights[a][i - b.lo[a]])
                .product()
        })
        .collect()
}

/// Composite trapezoid integral of a scalar field (component 0 of a tensor
/// field) over `region`. Summation order is fixed (row-major).
pub fn integrate(field: &SampledField, region: &Region) -> Result<f64> {
    integrate_with(field, region, |v| v[0])
}

pub(crate) fn integrate_with<F>(field: &SampledField, region: &Region, f: F) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let grid = field.grid();
    let (b, mask) = region.resolve(field)?;
    let weights = trapezoid_weights(grid, &b);
    let mut sum = 0.0;
    for (idx, w) in b.indices().iter().zip(weights) {
        let flat = grid.flat(idx);
        if mask.is_some_and(|m| !m[flat]) {
            continue;
        }
        sum += w * f(field.at(flat));
    }
    Ok(sum)
}

/// L^p norm of the pointwise Frobenius norm of the components.
pub fn lp_norm(field: &SampledField, region: &Region, norm: Norm) -> Result<f64> {
    let frob = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    match norm {
        Norm::Inf => {
            let grid = field.grid();
            let (b, mask) = region.resolve(field)?;
            let mut m: f64 = 0.0;
            for idx in b.indices() {
                let flat = grid.flat(&idx);
                if mask.is_some_and(|mk| !mk[flat]) {
                    continue;
                }
                m = m.max(frob(field.at(flat)));
            }
            Ok(m)
        }
        Norm::L(p) => {
            if !(p >= 1.0) {
                return Err(Error::InvalidParam(format!("L^p norm needs p >= 1, got {p}")));
            }
            let s = integrate_with(field, region, |v| frob(v).powf(p))?;
            Ok(s.powf(1.0 / p))
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_scalar;
    use proptest::prelude::*;

    fn line(lo: f64, hi: f64, n: usize) -> Grid {
        Grid::new(&[(lo, hi)], &[n]).unwrap()
    }

    #[test]
    fn constant_over_unit_interval() {
        let f = sample_scalar(&line(0.0, 1.0, 11), |_| 1.0).unwrap();
        assert!((integrate(&f, &Region::Full).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn affine_is_exact() {
        let f = sample_scalar(&line(0.0, 1.0, 101), |x| x[0]).unwrap();
        assert!((integrate(&f, &Region::Full).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sine_error_oracle() {
        let pi = std::f64::consts::PI;
        let f = sample_scalar(&line(0.0, pi, 101), |x| x[0].sin()).unwrap();
        let v = integrate(&f, &Region::Full).unwrap();
        // trapezoid error ≈ (b−a)h²/12 · mean|f''| = π·h²/12 · 2/π
        let h = pi / 100.0;
        assert!((v - 2.0).abs() <= 2e-4);
        assert!(((2.0 - v) - h * h / 6.0).abs() < 1e-7);
    }

    #[test]
    fn empty_region_errors() {
        let f = sample_scalar(&line(0.0, 1.0, 11), |_| 1.0).unwrap();
        assert!(matches!(integrate(&f, &Region::Coords(vec![(2.0, 3.0)])), Err(Error::EmptyRegion)));
        assert!(matches!(integrate(&f, &Region::Mask(vec![false; 11])), Err(Error::EmptyRegion)));
    }

    #[test]
    fn homogeneous_axis_weighted_by_extent() {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 3.0)], &[11, 2])
            .unwrap()
            .with_homogeneous_axes(&[1])
            .unwrap();
        let f = sample_scalar(&g, |x| x[0]).unwrap();
        assert!((integrate(&f, &Region::Full).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn lp_norms_of_constant() {
        let f = sample_scalar(&line(0.0, 2.0, 21), |_| -3.0).unwrap();
        assert!((lp_norm(&f, &Region::Full, Norm::L(1.0)).unwrap() - 6.0).abs() < 1e-12);
        assert!((lp_norm(&f, &Region::Full, Norm::L(2.0)).unwrap() - 18f64.sqrt()).abs() < 1e-12);
        assert_eq!(lp_norm(&f, &Region::Full, Norm::Inf).unwrap(), 3.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1usize, 2, 3, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-12, "n={n} deg={deg}");
            }
        }
    }

    proptest! {
        #[test]
        fn additive_and_homogeneous(c in -4.0f64..4.0, split in 1usize..39) {
            let g = line(-1.0, 1.0, 41);
            let f = sample_scalar(&g, |x| (3.0 * x[0]).cos() + x[0]).unwrap();
            let whole = integrate(&f, &Region::Full).unwrap();
            let left = integrate(&f, &Region::Box(IndexBox { lo: vec![0], hi: vec![split] })).unwrap();
            let right = integrate(&f, &Region::Box(IndexBox { lo: vec![split], hi: vec![40] })).unwrap();
            prop_assert!((whole - left - right).abs() < 1e-12);
            let scaled = sample_scalar(&g, |x| c * ((3.0 * x[0]).cos() + x[0])).unwrap();
            prop_assert!((integrate(&scaled, &Region::Full).unwrap() - c * whole).abs() < 1e-12);
        }
    }
}
