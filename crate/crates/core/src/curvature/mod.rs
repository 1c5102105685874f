//! Christoffel symbols and Ricci curvature by finite differences, Ricci scans
//! over unit timelike directions, and slab mean curvature.

mod slab;

pub use slab::{
    leaf_normal, mean_bound_check, mean_curvature_convergence, slab_mean_curvature, FlowField, Hypersurface, MeanBoundReport,
    MeanConvergenceReport, SlabCurvature, SlabData, DEFAULT_HALFWIDTHS,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{fd_partial, FdScheme, Grid, IndexBox, SampledField, TensorRank};
use crate::metric::{christoffel_from, orthonormal_frame, Mat, MetricField};

/// Christoffel symbols and Ricci tensor sampled on a grid.
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    /// Γ^i_{jk} at component `i*n*n + j*n + k`.
    pub gamma: SampledField,
    pub ricci: SampledField,
    /// Region that keeps a full interior stencil for both derivative passes.
    pub valid: IndexBox,
}

impl CurvatureBundle {
    pub fn ricci_at(&self, index: &[usize]) -> Mat {
        let n = self.ricci.grid().dim();
        Mat::from_slice(n, self.ricci.at_index(index))
    }

    /// Multilinear interpolation of the Ricci samples.
    pub fn ricci_interp(&self, x: &[f64]) -> Mat {
        let n = self.ricci.grid().dim();
        Mat::from_slice(n, &self.ricci.interpolate(x))
    }
}

fn stencil_cells(grid: &Grid, scheme: FdScheme) -> Vec<usize> {
    let half = scheme.width() / 2;
    (0..grid.dim()).map(|a| if grid.is_homogeneous(a) { 0 } else { half }).collect()
}

/// Γ^i_{jk} = ½ g^{il}(∂_j g_{lk} + ∂_k g_{jl} − ∂_l g_{jk}) from metric samples.
pub fn christoffel(metric: &SampledField, scheme: FdScheme) -> Result<SampledField> {
    let grid = metric.grid();
    let n = grid.dim();
    let dg = (0..n).map(|a| fd_partial(metric, a, scheme)).collect::<Result<Vec<_>>>()?;
    let valid = metric.valid().clone();
    let mut out = vec![0.0; grid.len() * n * n * n];
    let failed = out
        .par_chunks_mut(n * n * n)
        .enumerate()
        .map(|(p, dst)| {
            if !valid.contains(&grid.unflat(p)) {
                return None;
            }
            let ginv = match Mat::from_slice(n, metric.at(p)).inverse() {
                Ok(m) => m,
                Err(_) => return Some(p),
            };
            let d: Vec<Mat> = dg.iter().map(|f| Mat::from_slice(n, f.at(p))).collect();
            dst.copy_from_slice(&christoffel_from(&ginv, &d));
            None
        })
        .filter_map(|x| x)
        .min();
    if let Some(p) = failed {
        let det = Mat::from_slice(n, metric.at(p)).det();
        return Err(Error::NearSingular { det });
    }
    Ok(SampledField::new(grid.clone(), TensorRank::CONNECTION, false, out)?.with_valid(valid))
}

/// Ric_{jk} = ∂_i Γ^i_{jk} − ∂_j Γ^i_{ik} + Γ^i_{ip}Γ^p_{jk} − Γ^i_{jp}Γ^p_{ik}.
pub fn ricci(metric: &SampledField, scheme: FdScheme) -> Result<CurvatureBundle> {
    let gamma = christoffel(metric, scheme)?;
    let grid = gamma.grid();
    let n = grid.dim();
    let n2 = n * n;
    let dgam = (0..n).map(|a| fd_partial(&gamma, a, scheme)).collect::<Result<Vec<_>>>()?;
    let valid = gamma.valid().clone();
    let mut out = vec![0.0; grid.len() * n2];
    out.par_chunks_mut(n2).enumerate().for_each(|(p, dst)| {
        if !valid.contains(&grid.unflat(p)) {
            return;
        }
        let gm = gamma.at(p);
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for i in 0..n {
                    s += dgam[i].at(p)[i * n2 + j * n + k] - dgam[j].at(p)[i * n2 + i * n + k];
                    for q in 0..n {
                        s += gm[i * n2 + i * n + q] * gm[q * n2 + j * n + k] - gm[i * n2 + j * n + q] * gm[q * n2 + i * n + k];
                    }
                }
                dst[j * n + k] = s;
                dst[k * n + j] = s;
            }
        }
    });
    let cells = stencil_cells(grid, scheme);
    let inner = valid.shrink(&cells).shrink(&cells);
    let ricci = SampledField::new(grid.clone(), TensorRank::BILINEAR, true, out)?.with_valid(valid);
    Ok(CurvatureBundle { gamma, ricci, valid: inner })
}

/// Curvature of a metric field on `grid`; sampled metrics on the same
/// lattice reuse their samples (plus any cone shift).
pub fn curvature_of(metric: &MetricField, grid: &Grid, scheme: FdScheme) -> Result<CurvatureBundle> {
    let samples = match metric.samples() {
        Some(s) if s.grid() == grid && metric.shift() == 0.0 => s.clone(),
        Some(s) if s.grid() == grid => {
            let theta = metric.time_covector().to_vec();
            let lam = metric.shift();
            s.map_points(TensorRank::BILINEAR, true, |v, out| {
                Mat::from_slice(grid.dim(), v).add_outer(&theta, lam).write_to(out)
            })?
            .with_valid(s.valid().clone())
        }
        _ => metric.sample_on(grid)?,
    };
    ricci(&samples, scheme)
}

/// Pointwise Ricci tensor of a metric with callable derivatives: central
/// differences of Γ with step `h`. Near a kink `side` picks the branch.
pub fn ricci_at(metric: &MetricField, x: &[f64], side: f64, h: f64) -> Result<Mat> {
    let n = metric.dim();
    let n2 = n * n;
    let gm = metric.christoffel_at(x, side)?;
    let mut dgam = Vec::with_capacity(n);
    let mut xp = x.to_vec();
    for a in 0..n {
        xp[a] = x[a] + h;
        let gp = metric.christoffel_at(&xp, side)?;
        xp[a] = x[a] - h;
        let gq = metric.christoffel_at(&xp, side)?;
        xp[a] = x[a];
        dgam.push(gp.iter().zip(&gq).map(|(p, q)| (p - q) / (2.0 * h)).collect::<Vec<_>>());
    }
    Ok(Mat::from_fn(n, |j, k| {
        let mut s = 0.0;
        for i in 0..n {
            s += dgam[i][i * n2 + j * n + k] - dgam[j][i * n2 + i * n + k];
            for q in 0..n {
                s += gm[i * n2 + i * n + q] * gm[q * n2 + j * n + k] - gm[i * n2 + j * n + q] * gm[q * n2 + i * n + k];
            }
        }
        s
    }))
}

/// Minimum of Ric(X,X) over g-unit future timelike X with ‖X‖ ≤ bound.
#[derive(Clone, Debug, PartialEq)]
pub struct TimelikeMin {
    pub min: f64,
    pub point: Vec<f64>,
    pub vector: Vec<f64>,
    pub points_scanned: usize,
}

/// Unit directions in the spatial span of an orthonormal frame: coordinate
/// axes of both signs plus seeded Gaussian directions and their negatives.
pub fn spatial_directions(k: usize, random: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for a in 0..k {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; k];
            v[a] = s;
            dirs.push(v);
        }
    }
    if k > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random {
            let v: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            let v: Vec<f64> = v.iter().map(|c| c / norm).collect();
            dirs.push(v.iter().map(|c| -c).collect());
            dirs.push(v);
        }
    }
    dirs
}

fn euclid2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum()
}

/// Exact minimization along each boost plane cosh(s)e₀ + sinh(s)w: the
/// quadratic form is A cosh² + 2B cosh sinh + C sinh², minimized at the
/// endpoints or at tanh 2s = −2B/(A+C).
pub fn min_unit_timelike(ric: &Mat, g: &Mat, orientation: &[f64], bound: f64, dirs: &[Vec<f64>]) -> Option<(f64, Vec<f64>)> {
    let frame = orthonormal_frame(g, orientation).ok()?;
    let n = g.dim();
    let e0 = &frame[0];
    if euclid2(e0) > bound * bound {
        return None;
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for om in dirs {
        let mut w = vec![0.0; n];
        for (a, c) in om.iter().enumerate() {
            for i in 0..n {
                w[i] += c * frame[a + 1][i];
            }
        }
        let at = |s: f64| -> Vec<f64> { (0..n).map(|i| s.cosh() * e0[i] + s.sinh() * w[i]).collect() };
        let fits = |s: f64| euclid2(&at(s)) <= bound * bound;
        let mut hi = 0.5;
        while fits(hi) && hi < 20.0 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if fits(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let smax = lo;
        let a = ric.quad(e0);
        let b = ric.form(e0, &w);
        let c = ric.quad(&w);
        let mut cands = vec![0.0, smax];
        if (a + c).abs() > 0.0 {
            let r = -2.0 * b / (a + c);
            if r.abs() < 1.0 {
                let s = 0.5 * r.atanh();
                if s > 0.0 && s < smax {
                    cands.push(s);
                }
            }
        }
        for s in cands {
            let v = a * s.cosh().powi(2) + 2.0 * b * s.cosh() * s.sinh() + c * s.sinh().powi(2);
            if best.as_ref().map_or(true, |(m, _)| v < *m) {
                best = Some((v, at(s)));
            }
        }
    }
    best
}

/// Scan of Ric(X,X) over g-unit timelike X (‖X‖ ≤ `bound`) at the lattice
/// points of `region` ∩ the bundle's valid box.
pub fn ricci_timelike_min(
    bundle: &CurvatureBundle,
    g: &MetricField,
    region: &IndexBox,
    bound: f64,
    seed: u64,
) -> Result<TimelikeMin> {
    let grid = bundle.ricci.grid();
    let n = grid.dim();
    let b = region.intersect(&bundle.valid);
    if b.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let dirs = spatial_directions(n - 1, 24, seed);
    let idx = b.indices();
    let per_point: Vec<Option<(f64, Vec<f64>)>> = idx
        .par_iter()
        .map(|i| {
            let x = grid.point(i);
            min_unit_timelike(&bundle.ricci_at(i), &g.at(&x), g.orientation(), bound, &dirs)
        })
        .collect();
    let mut best: Option<TimelikeMin> = None;
    for (i, r) in idx.iter().zip(per_point) {
        if let Some((v, x)) = r {
            if best.as_ref().map_or(true, |b| v < b.min) {
                best = Some(TimelikeMin { min: v, point: grid.point(i), vector: x, points_scanned: 0 });
            }
        }
    }
    let mut best = best.ok_or(Error::EmptyRegion)?;
    best.points_scanned = idx.len();
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog, ModelParams};

    fn model(name: &str, p: ModelParams) -> crate::metric::SpacetimeModel {
        catalog::catalog(name, &p).unwrap()
    }

    #[test]
    fn minkowski_curvature_vanishes() {
        let g = Grid::new(&[(-1.0, 1.0); 3], &[9, 9, 9]).unwrap();
        let b = curvature_of(&MetricField::minkowski(3), &g, FdScheme::Central2).unwrap();
        assert!(b.gamma.values().iter().all(|v| *v == 0.0));
        assert!(b.ricci.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn exp_grw_christoffels() {
        let m = model("grw_smooth", ModelParams::new().with_text("scale", "exp"));
        let grid = m.grid(&[(-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 201).unwrap();
        let gam = christoffel(&m.metric.sample_on(&grid).unwrap(), FdScheme::Central4).unwrap();
        let n = 4;
        for i in [0, 50, 100, 200] {
            let t = grid.coord(0, i);
            let c = gam.at_index(&[i, 0, 0, 0]);
            assert!((c[n + 1] - (2.0 * t).exp()).abs() < 1e-6);
            assert!((c[n * n + 1] - 1.0).abs() < 1e-6);
            // lower-index symmetry
            assert_eq!(c[n * n + 1], c[n * n + n]);
        }
    }

    #[test]
    fn cosh_grw_ricci_matches_closed_form() {
        let m = model("grw_smooth", ModelParams::new());
        let grid = m.grid(&[(-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 401).unwrap();
        let b = curvature_of(&m.metric, &grid, FdScheme::Central4).unwrap();
        for i in b.valid.indices() {
            let x = grid.point(&i);
            let exact = m.ricci_exact(&x, 1.0).unwrap();
            assert!((b.ricci_at(&i) - exact).max_abs() < 1e-7, "{x:?}");
            assert!((b.ricci_at(&i)[(0, 0)] + 3.0).abs() < 1e-7);
        }
        assert!(b.ricci.symmetry_defect() <= 1e-10);
    }

    #[test]
    fn central2_error_quarters_per_halving() {
        let m = model("grw_smooth", ModelParams::new());
        let mut errs = Vec::new();
        for res in [21, 41, 81, 161] {
            let grid = m.grid(&[(-1.0, 1.0); 4], res).unwrap();
            let b = curvature_of(&m.metric, &grid, FdScheme::Central2).unwrap();
            let trust = grid.box_from_coords(&[(-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]);
            let e = trust
                .indices()
                .iter()
                .map(|i| (b.ricci_at(i) - m.ricci_exact(&grid.point(i), 1.0).unwrap()).max_abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            assert!((3.0..=5.0).contains(&r), "{errs:?}");
        }
    }

    #[test]
    fn eds_ricci_at_origin() {
        let m = model("grw_eds_collapse", ModelParams::new());
        let r = ricci_at(&m.metric, &[0.0, 0.1, 0.2, 0.3], 1.0, 1e-4).unwrap();
        assert!((r[(0, 0)] - 2.0 / 3.0).abs() < 1e-6);
        assert!((r - m.ricci_exact(&[0.0, 0.1, 0.2, 0.3], 1.0).unwrap()).max_abs() < 1e-6);
    }

    #[test]
    fn eds_timelike_floor_is_at_rest_at_t0() {
        let m = model("grw_eds_collapse", ModelParams::new());
        let grid = m.grid(&[(-0.1, 0.6), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 141).unwrap();
        let b = curvature_of(&m.metric, &grid, FdScheme::Central4).unwrap();
        let region = grid.box_from_coords(&[(0.0, 0.5), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)]);
        let r = ricci_timelike_min(&b, &m.metric, &region, 3.0, 1).unwrap();
        assert!((r.min - 2.0 / 3.0).abs() < 1e-6, "{r:?}");
        assert!(r.point[0].abs() < 1e-12);
        assert!((r.vector[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn minkowski_floor_is_zero() {
        let g = Grid::new(&[(-1.0, 1.0); 3], &[5, 5, 5]).unwrap();
        let mk = MetricField::minkowski(3);
        let b = curvature_of(&mk, &g, FdScheme::Central2).unwrap();
        let r = ricci_timelike_min(&b, &mk, &g.full_box(), 3.0, 2).unwrap();
        assert_eq!(r.min, 0.0);
    }

    #[test]
    fn boost_plane_minimum_is_exact() {
        // Ric = diag(1, −1.5) in 2D Minkowski: Ric(X,X) = 1 − 0.5 sinh², min at the bound.
        let ric = Mat::diag(&[1.0, -1.5]);
        let g = Mat::minkowski(2);
        let (v, x) = min_unit_timelike(&ric, &g, &[1.0, 0.0], 3.0, &spatial_directions(1, 0, 0)).unwrap();
        let s = 9.0f64.acosh() / 2.0;
        assert!((v - (s.cosh().powi(2) - 1.5 * s.sinh().powi(2))).abs() < 1e-9);
        assert!((euclid2(&x) - 9.0).abs() < 1e-9);
        // an indefinite off-diagonal form attains an interior stationary point
        let ric = Mat::from_slice(2, &[2.0, 1.0, 1.0, 2.0]);
        let (v, _) = min_unit_timelike(&ric, &g, &[1.0, 0.0], 3.0, &spatial_directions(1, 0, 0)).unwrap();
        // 2cosh2s − sinh2s·... = (A+C)/2 cosh2s + B sinh2s + (A−C)/2 → min √(4−1) = √3
        assert!((v - 3.0f64.sqrt()).abs() < 1e-9, "{v}");
    }
}
