//! Mollifiers, grid convolution, regularized metrics g_ε and the
//! cone-adjusted approximants ǧ_ε ≺ g ≺ ĝ_ε.

mod kernel;

pub use kernel::{normalization, sphere_area, MollifierKernel, Profile};
#[cfg(test)]
pub(crate) use kernel::quad;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, IndexBox, SampledField};
use crate::metric::{build_audit_set, cones_narrower_on, random_points, AuditConfig, AuditSet, Mat, MetricField};

/// Default schedule ε_k = 0.2·2^{−k}, k = 0..5.
pub fn default_schedule() -> Vec<f64> {
    (0..5).map(|k| 0.2 * 0.5f64.powi(k)).collect()
}

fn check_kernel_grid(kernel: &MollifierKernel, grid: &Grid) -> Result<()> {
    if kernel.dim() != grid.dim() || kernel.regular_axes() != grid.regular_axes().as_slice() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Valid box after convolving a field whose valid box is `valid`.
pub fn shrunken_valid(valid: &IndexBox, kernel: &MollifierKernel) -> IndexBox {
    let mut cells = vec![0; valid.lo.len()];
    for (k, &a) in kernel.regular_axes().iter().enumerate() {
        cells[a] = kernel.half_width()[k];
    }
    valid.shrink(&cells)
}

/// Component-wise convolution with the discretized kernel.
///
/// Values are computed on the input's valid box shrunk by the kernel
/// half-width; outside it the input values are carried over unchanged and the
/// output's valid box marks where the result is a mollification.
pub fn convolve(field: &SampledField, kernel: &MollifierKernel) -> Result<SampledField> {
    let grid = field.grid();
    check_kernel_grid(kernel, grid)?;
    let valid = shrunken_valid(field.valid(), kernel);
    let axes = kernel.regular_axes();
    let taps: Vec<(isize, f64)> = kernel
        .stencil()
        .iter()
        .map(|(o, w)| {
            let off: isize = o.iter().zip(axes).map(|(d, &a)| d * grid.strides()[a] as isize).sum();
            (off, *w)
        })
        .collect();
    let ncomp = field.ncomp();
    let src = field.values();
    let mut out = src.to_vec();
    out.par_chunks_mut(ncomp).enumerate().for_each(|(p, dst)| {
        let idx = grid.unflat(p);
        if !valid.contains(&idx) {
            return;
        }
        dst.fill(0.0);
        for &(off, w) in &taps {
            let q = (p as isize - off) as usize;
            for c in 0..ncomp {
                dst[c] += w * src[q * ncomp + c];
            }
        }
    });
    Ok(SampledField::new(grid.clone(), field.rank(), field.is_symmetric(), out)?.with_valid(valid))
}

/// g_ε = g ⋆ ρ_ε sampled on `grid`, with a pointwise Lorentzian audit on the
/// valid region.
pub fn regularize_metric(g: &MetricField, grid: &Grid, kernel: &MollifierKernel) -> Result<MetricField> {
    let samples = match g.samples() {
        Some(s) if s.grid() == grid && g.shift() == 0.0 => s.clone(),
        _ => g.sample_on(grid)?,
    };
    let smoothed = convolve(&samples, kernel)?;
    let n = grid.dim();
    let bad = smoothed
        .valid()
        .indices()
        .into_par_iter()
        .find_first(|idx| !Mat::from_slice(n, smoothed.at_index(idx)).is_lorentzian());
    if let Some(idx) = bad {
        return Err(Error::SignatureLoss { point: grid.point(&idx) });
    }
    MetricField::sampled(smoothed, g, format!("g_eps[{}]", kernel.epsilon()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeMode {
    /// ǧ_ε = g_ε + λ dt⊗dt: strictly narrower cones than g.
    Inner,
    /// ĝ_ε = g_ε − λ dt⊗dt: strictly wider cones than g.
    Outer,
}

/// Geometric search for the cone margin λ_ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConeSearch {
    pub floor: f64,
    pub cap: f64,
    /// Relative bracket width at which bisection stops.
    pub rel_tol: f64,
    pub safety: f64,
}

impl Default for ConeSearch {
    fn default() -> Self {
        Self { floor: 1e-8, cap: 0.5, rel_tol: 0.01, safety: 1.5 }
    }
}

fn nests(g_eps: &MetricField, g: &MetricField, mode: ConeMode, lambda: f64, audit: &AuditSet) -> bool {
    match mode {
        ConeMode::Inner => cones_narrower_on(&g_eps.shifted(lambda, "inner"), g, audit).holds,
        ConeMode::Outer => cones_narrower_on(g, &g_eps.shifted(-lambda, "outer"), audit).holds,
    }
}

/// Shifts g_ε by ∓λ dt⊗dt with λ the smallest audited value achieving
/// nesting against g, times the safety factor.
pub fn adjust_cones(
    g_eps: &MetricField,
    g: &MetricField,
    mode: ConeMode,
    audit: &AuditSet,
    search: &ConeSearch,
) -> Result<(MetricField, f64)> {
    let mut hi = search.floor;
    let mut lo = 0.0;
    while !nests(g_eps, g, mode, hi, audit) {
        lo = hi;
        hi *= 2.0;
        if hi > search.cap {
            if nests(g_eps, g, mode, search.cap, audit) {
                hi = search.cap;
                break;
            }
            return Err(Error::NoNesting { cap: search.cap });
        }
    }
    if lo > 0.0 {
        while hi / lo > 1.0 + search.rel_tol {
            let mid = (lo * hi).sqrt();
            if nests(g_eps, g, mode, mid, audit) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let lambda = hi * search.safety;
    let (shift, tag) = match mode {
        ConeMode::Inner => (lambda, format!("g_check[{}]", g_eps.tag())),
        ConeMode::Outer => (-lambda, format!("g_hat[{}]", g_eps.tag())),
    };
    let adjusted = g_eps.shifted(shift, tag);
    for x in &audit.points {
        if !adjusted.at(x).is_lorentzian() {
            return Err(Error::SignatureLoss { point: x.clone() });
        }
    }
    Ok((adjusted, lambda))
}

/// a·(f∗ρ_ε) and (a·f)∗ρ_ε on the shrunken valid region.
pub fn friedrichs_weighted_convolve(
    a: &SampledField,
    f: &SampledField,
    kernel: &MollifierKernel,
) -> Result<(SampledField, SampledField)> {
    if a.grid() != f.grid() || a.ncomp() != 1 || f.ncomp() != 1 {
        return Err(Error::GridMismatch);
    }
    let fc = convolve(f, kernel)?;
    let valid = fc.valid().intersect(&shrunken_valid(a.valid(), kernel));
    let left: Vec<f64> = a.values().iter().zip(fc.values()).map(|(x, y)| x * y).collect();
    let af: Vec<f64> = a.values().iter().zip(f.values()).map(|(x, y)| x * y).collect();
    let af = SampledField::scalar(a.grid().clone(), af)?.with_valid(a.valid().intersect(f.valid()));
    let right = convolve(&af, kernel)?;
    Ok((
        SampledField::scalar(a.grid().clone(), left)?.with_valid(valid.clone()),
        right.with_valid(valid),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyConfig {
    pub profile: Profile,
    pub schedule: Vec<f64>,
    pub audit_points: usize,
    pub audit: AuditConfig,
    pub search: ConeSearch,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            profile: Profile::StandardBump,
            schedule: default_schedule(),
            audit_points: 313,
            audit: AuditConfig::default(),
            search: ConeSearch::default(),
        }
    }
}

/// g together with g_ε, ǧ_ε, ĝ_ε along a strictly decreasing ε schedule.
#[derive(Clone, Debug)]
pub struct RegularizedFamily {
    pub base: MetricField,
    pub profile: Profile,
    pub grid: Grid,
    pub schedule: Vec<f64>,
    pub smoothed: Vec<MetricField>,
    pub inner: Vec<MetricField>,
    pub outer: Vec<MetricField>,
    pub inner_margins: Vec<f64>,
    pub outer_margins: Vec<f64>,
    /// Coordinate box on which every member is a genuine mollification.
    pub trust: Vec<(f64, f64)>,
    pub audit: AuditSet,
}

impl RegularizedFamily {
    pub fn build(base: &MetricField, grid: &Grid, cfg: &FamilyConfig) -> Result<Self> {
        if cfg.schedule.is_empty() || cfg.schedule.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidParam("epsilon schedule must be strictly decreasing".into()));
        }
        let kernels = cfg
            .schedule
            .iter()
            .map(|&e| MollifierKernel::new(cfg.profile, e, grid))
            .collect::<Result<Vec<_>>>()?;
        let trust_box = shrunken_valid(&grid.full_box(), &kernels[0]);
        if trust_box.is_empty() {
            return Err(Error::EmptyRegion);
        }
        let trust = trust_box.coords(grid);
        let points = random_points(&trust, cfg.audit_points, cfg.audit.seed);
        let audit = build_audit_set(base, &points, &cfg.audit)?;
        let members = kernels
            .par_iter()
            .map(|k| {
                let smooth = regularize_metric(base, grid, k)?;
                let (inner, li) = adjust_cones(&smooth, base, ConeMode::Inner, &audit, &cfg.search)?;
                let (outer, lo) = adjust_cones(&smooth, base, ConeMode::Outer, &audit, &cfg.search)?;
                Ok((smooth, inner, outer, li, lo))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut fam = RegularizedFamily {
            base: base.clone(),
            profile: cfg.profile,
            grid: grid.clone(),
            schedule: cfg.schedule.clone(),
            smoothed: Vec::new(),
            inner: Vec::new(),
            outer: Vec::new(),
            inner_margins: Vec::new(),
            outer_margins: Vec::new(),
            trust,
            audit,
        };
        for (s, i, o, li, lo) in members {
            fam.smoothed.push(s);
            fam.inner.push(i);
            fam.outer.push(o);
            fam.inner_margins.push(li);
            fam.outer_margins.push(lo);
        }
        Ok(fam)
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn len(&self) -> usize {
        self.schedule.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedule.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_scalar, Region};
    use crate::metric::{catalog, ModelParams};
    use proptest::prelude::*;

    fn line(n: usize) -> Grid {
        Grid::new(&[(-1.0, 1.0)], &[n]).unwrap()
    }

    #[test]
    fn constants_are_preserved() {
        let g = line(401);
        let k = MollifierKernel::new(Profile::StandardBump, 0.1, &g).unwrap();
        let f = sample_scalar(&g, |_| 2.5).unwrap();
        let c = convolve(&f, &k).unwrap();
        for idx in c.valid().indices() {
            assert!((c.at_index(&idx)[0] - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn affine_is_preserved() {
        let g = line(401);
        let k = MollifierKernel::new(Profile::PolynomialBump, 0.1, &g).unwrap();
        let f = sample_scalar(&g, |x| 3.0 * x[0] - 1.0).unwrap();
        let c = convolve(&f, &k).unwrap();
        for idx in c.valid().indices() {
            assert!((c.at_index(&idx)[0] - f.at_index(&idx)[0]).abs() < 1e-10);
        }
        assert_eq!(c.valid().lo[0], 20);
        assert!(c.checked_at(&[5]).is_err());
    }

    #[test]
    fn abs_at_origin_matches_first_moment() {
        let g = line(2001);
        let eps = 0.1;
        let k = MollifierKernel::new(Profile::StandardBump, eps, &g).unwrap();
        let f = sample_scalar(&g, |x| x[0].abs()).unwrap();
        let c = convolve(&f, &k).unwrap();
        let v = c.at(1000)[0];
        // oracle: ∫|z| ρ_ε(z) dz = ε·2c∫₀¹ r ρ(r) dr
        let norm = normalization(Profile::StandardBump, 1);
        let m1 = eps * 2.0 * norm * quad(|r| r * Profile::StandardBump.value(r), 0.0, 1.0, 64, 16);
        assert!(v > 0.0 && v < eps);
        assert!((v - m1).abs() < 1e-4 * m1, "{v} vs {m1}");
    }

    #[test]
    fn minkowski_is_fixed() {
        let m = catalog::catalog("minkowski", &ModelParams::new()).unwrap();
        let grid = m.grid(&[(-1.0, 1.0); 4], 201).unwrap();
        let k = MollifierKernel::new(Profile::StandardBump, 0.1, &grid).unwrap();
        let ge = regularize_metric(&m.metric, &grid, &k).unwrap();
        let x = [0.2, 0.1, -0.3, 0.4];
        assert!((ge.at(&x) - Mat::minkowski(4)).max_abs() < 1e-14);
    }

    #[test]
    fn two_slope_mollification_closed_form() {
        let (m1, m2) = (0.5, 1.0);
        let m = catalog::catalog("grw_two_slope", &ModelParams::new().with("m1", m1).with("m2", m2)).unwrap();
        let grid = m.grid(&[(-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 1001).unwrap();
        let eps = 0.05;
        let k = MollifierKernel::new(Profile::StandardBump, eps, &grid).unwrap();
        let ge = regularize_metric(&m.metric, &grid, &k).unwrap();
        let m2nd = k.second_moment(0);
        let s = ge.samples().unwrap();
        let mut worst: f64 = 0.0;
        for idx in s.valid().indices() {
            let t = grid.coord(0, idx[0]);
            if t.abs() < eps + 1e-9 {
                continue;
            }
            let slope = if t < 0.0 { m1 } else { m2 };
            let a = 1.0 - slope * t;
            // (a²)∗ρ = a² + ȧ² M₂ for quadratic a² away from the kink
            let expect = a * a + slope * slope * m2nd;
            worst = worst.max((s.at_index(&idx)[5] - expect).abs());
            assert_eq!(s.at_index(&idx)[0], -1.0);
        }
        assert!(worst < 1e-10, "{worst}");
        // C¹ across t = 0: the unit slope jump of a² is gone, only O(h/ε) remains
        let i0 = grid.index_of(0, 0.0).unwrap();
        let h = grid.spacing()[0];
        let v = |i: usize| s.at(i)[5];
        let left = (v(i0) - v(i0 - 1)) / h;
        let right = (v(i0 + 1) - v(i0)) / h;
        assert!((left - right).abs() < 0.1, "{left} {right}");
    }

    #[test]
    fn sup_deviation_below_lipschitz_bound() {
        let m = catalog::catalog("grw_two_slope", &ModelParams::new()).unwrap();
        let grid = m.grid(&[(-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 501).unwrap();
        for eps in [0.2, 0.1, 0.05] {
            let k = MollifierKernel::new(Profile::StandardBump, eps, &grid).unwrap();
            let ge = regularize_metric(&m.metric, &grid, &k).unwrap();
            let s = ge.samples().unwrap();
            // Lip(a²) = max 2a|ȧ| on the padded region t ∈ [−0.5, 0.5]
            let lip = 2.0 * 1.25 * 0.5f64.max(0.5 * 1.0);
            for idx in s.valid().indices() {
                let t = grid.coord(0, idx[0]);
                let a = 1.0 - if t < 0.0 { 0.5 } else { 1.0 } * t;
                assert!((s.at_index(&idx)[5] - a * a).abs() <= lip * eps);
            }
        }
    }

    #[test]
    fn minkowski_cones_at_floor() {
        let g = MetricField::minkowski(4);
        let pts = random_points(&[(-1.0, 1.0); 4], 20, 1);
        let audit = build_audit_set(&g, &pts, &AuditConfig::default()).unwrap();
        let search = ConeSearch::default();
        let (inner, li) = adjust_cones(&g, &g, ConeMode::Inner, &audit, &search).unwrap();
        let (outer, lo) = adjust_cones(&g, &g, ConeMode::Outer, &audit, &search).unwrap();
        assert_eq!(li, search.floor * search.safety);
        assert_eq!(lo, search.floor * search.safety);
        assert!(cones_narrower_on(&inner, &g, &audit).holds);
        assert!(cones_narrower_on(&g, &outer, &audit).holds);
    }

    #[test]
    fn two_slope_family_nests_and_margins_decrease() {
        let m = catalog::catalog("grw_two_slope", &ModelParams::new()).unwrap();
        let grid = m.grid(&[(-0.75, 0.75), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 961).unwrap();
        let fam = RegularizedFamily::build(&m.metric, &grid, &FamilyConfig::default()).unwrap();
        assert!(fam.audit.len() >= 10_000);
        for k in 0..fam.len() {
            assert!(cones_narrower_on(&fam.inner[k], &m.metric, &fam.audit).holds);
            assert!(cones_narrower_on(&m.metric, &fam.outer[k], &fam.audit).holds);
            // ǧ_ε(X,X) = g_ε(X,X) + λ (dt X)² ≥ g_ε(X,X), exactly
            for (x, vs) in fam.audit.points.iter().zip(&fam.audit.vectors).take(20) {
                for v in vs {
                    let d = fam.inner[k].quad(x, v) - fam.smoothed[k].quad(x, v);
                    assert!((d - fam.inner_margins[k] * v[0] * v[0]).abs() < 1e-12);
                }
            }
        }
        for w in fam.inner_margins.windows(2) {
            assert!(w[1] < w[0], "{:?}", fam.inner_margins);
        }
        // ǧ_{ε/2} has wider cones than ǧ_ε on the audit set
        for k in 0..fam.len() - 1 {
            assert!(cones_narrower_on(&fam.inner[k], &fam.inner[k + 1], &fam.audit).holds, "k={k}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn monotone_on_nonnegative_fields(vals in proptest::collection::vec(0.0f64..5.0, 101)) {
            let g = line(101);
            let k = MollifierKernel::new(Profile::StandardBump, 0.1, &g).unwrap();
            let f = SampledField::scalar(g, vals).unwrap();
            let c = convolve(&f, &k).unwrap();
            prop_assert!(c.values().iter().all(|&v| v >= 0.0));
        }

        #[test]
        fn linear_in_the_field(a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let g = line(201);
            let k = MollifierKernel::new(Profile::PolynomialBump, 0.08, &g).unwrap();
            let f1 = sample_scalar(&g, |x| x[0].sin()).unwrap();
            let f2 = sample_scalar(&g, |x| x[0].abs()).unwrap();
            let mix = sample_scalar(&g, |x| a * x[0].sin() + b * x[0].abs()).unwrap();
            let (c1, c2, cm) = (convolve(&f1, &k).unwrap(), convolve(&f2, &k).unwrap(), convolve(&mix, &k).unwrap());
            for i in 0..201 {
                prop_assert!((cm.get(i, 0) - a * c1.get(i, 0) - b * c2.get(i, 0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lp_error_halves_for_lipschitz_input() {
        let g = line(4001);
        let f = sample_scalar(&g, |x| x[0].abs()).unwrap();
        let region = Region::Coords(vec![(-0.7, 0.7)]);
        let mut prev = f64::INFINITY;
        for eps in default_schedule() {
            let k = MollifierKernel::new(Profile::StandardBump, eps, &g).unwrap();
            let c = convolve(&f, &k).unwrap();
            let diff: Vec<f64> = c.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
            let d = SampledField::scalar(g.clone(), diff).unwrap();
            let n = crate::grid::lp_norm(&d, &region, crate::grid::Norm::L(1.0)).unwrap();
            assert!(n <= 0.6 * prev, "eps={eps}: {n} vs {prev}");
            prev = n;
        }
    }

    #[test]
    fn weighted_convolve_cases() {
        let g = line(2001);
        let eps = 0.1;
        let k = MollifierKernel::new(Profile::StandardBump, eps, &g).unwrap();
        // a constant → equal outputs
        let a = sample_scalar(&g, |_| 1.7).unwrap();
        let f = sample_scalar(&g, |x| x[0].signum()).unwrap();
        let (l, r) = friedrichs_weighted_convolve(&a, &f, &k).unwrap();
        for idx in l.valid().indices() {
            assert!((l.at_index(&idx)[0] - r.at_index(&idx)[0]).abs() < 1e-13);
        }
        // a = f = x → difference −m₂ε² (m₂ for the unit-scale profile)
        let x = sample_scalar(&g, |x| x[0]).unwrap();
        let (l, r) = friedrichs_weighted_convolve(&x, &x, &k).unwrap();
        let norm = normalization(Profile::StandardBump, 1);
        let m2 = 2.0 * norm * quad(|r| r * r * Profile::StandardBump.value(r), 0.0, 1.0, 64, 16);
        for idx in l.valid().indices() {
            let d = l.at_index(&idx)[0] - r.at_index(&idx)[0];
            assert!((d + m2 * eps * eps).abs() < 1e-6, "{d}");
        }
        // grid mismatch
        let other = sample_scalar(&line(1001), |_| 1.0).unwrap();
        assert!(matches!(friedrichs_weighted_convolve(&other, &x, &k), Err(Error::GridMismatch)));
    }
}
