//! Friedrichs-type commutators a_ε(f∗ρ_ε) − (af)∗ρ_ε, their derivatives and
//! kernel masses, and the Ricci-level commutator of regularized metrics.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curvature::curvature_of;
use crate::error::{Error, Result};
use crate::grid::{fd_partial, lp_norm, sample, sample_scalar, FdScheme, Grid, Norm, Region, SampledField, TensorRank};
use crate::metric::{Mat, SpacetimeModel};
use crate::mollify::{convolve, MollifierKernel, Profile, RegularizedFamily};

/// How a_ε is formed from a.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AEpsMode {
    /// 1/((1/a)∗ρ_ε): a is an inverse-metric component, the smoothing acts on g.
    TrueInverse,
    /// a_ε = a.
    Frozen,
    /// a∗ρ_ε.
    Mollified,
}

/// A scalar commutator case on a grid: a Lipschitz, f bounded.
#[derive(Clone, Debug)]
pub struct FriedrichsCase {
    pub name: String,
    pub a: SampledField,
    pub f: SampledField,
    pub mode: AEpsMode,
    /// Coordinate box K on which norms are taken.
    pub k_region: Vec<(f64, f64)>,
    pub schedule: Vec<f64>,
    pub p_list: Vec<f64>,
    pub profile: Profile,
}

/// Exponents used by the sweeps unless configured otherwise.
pub const DEFAULT_P: [f64; 3] = [1.0, 2.0, 4.0];

impl FriedrichsCase {
    pub fn new(
        name: impl Into<String>,
        a: SampledField,
        f: SampledField,
        mode: AEpsMode,
        schedule: Vec<f64>,
    ) -> Result<Self> {
        if a.grid() != f.grid() || a.ncomp() != 1 || f.ncomp() != 1 {
            return Err(Error::GridMismatch);
        }
        if schedule.is_empty() || schedule.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::InvalidParam("schedule must be a nonempty list of positive ε".into()));
        }
        let margin = 3.0 * schedule.iter().cloned().fold(0.0, f64::max);
        let k_region: Vec<(f64, f64)> = a
            .grid()
            .bounds()
            .iter()
            .enumerate()
            .map(|(ax, &(lo, hi))| if a.grid().is_homogeneous(ax) { (lo, hi) } else { (lo + margin, hi - margin) })
            .collect();
        if k_region.iter().any(|(lo, hi)| lo >= hi) {
            return Err(Error::EmptyRegion);
        }
        Ok(Self {
            name: name.into(),
            a,
            f,
            mode,
            k_region,
            schedule,
            p_list: DEFAULT_P.to_vec(),
            profile: Profile::StandardBump,
        })
    }

    pub fn with_region(mut self, k: Vec<(f64, f64)>) -> Self {
        self.k_region = k;
        self
    }

    pub fn with_p(mut self, p: Vec<f64>) -> Self {
        self.p_list = p;
        self
    }

    pub fn with_profile(mut self, p: Profile) -> Self {
        self.profile = p;
        self
    }

    /// a = |x|, f = sign(x) on [−1, 1].
    pub fn kink(resolution: usize, schedule: Vec<f64>) -> Result<Self> {
        let grid = Grid::new(&[(-1.0, 1.0)], &[resolution])?;
        let a = sample_scalar(&grid, |x| x[0].abs())?;
        let f = sample_scalar(&grid, |x| if x[0] > 0.0 { 1.0 } else if x[0] < 0.0 { -1.0 } else { 0.0 })?;
        Self::new("kink", a, f, AEpsMode::Frozen, schedule)
    }

    /// The two-slope scale factor a(t): a = g^{xx} = 1/a², f = ∂_t g_xx.
    pub fn two_slope(m1: f64, m2: f64, resolution: usize, mode: AEpsMode, schedule: Vec<f64>) -> Result<Self> {
        if !(m1 > 0.0 && m1 <= m2) {
            return Err(Error::InvalidParam(format!("need 0 < m1 <= m2, got m1={m1}, m2={m2}")));
        }
        let hi = (0.9 / m2).min(0.9);
        let grid = Grid::new(&[(-0.9, hi)], &[resolution])?;
        let slope = move |t: f64| if t < 0.0 { m1 } else { m2 };
        let a = sample_scalar(&grid, |x| (1.0 - slope(x[0]) * x[0]).powi(-2))?;
        let f = sample_scalar(&grid, |x| {
            let t = x[0];
            if t == 0.0 {
                -(m1 + m2)
            } else {
                -2.0 * slope(t) * (1.0 - slope(t) * t)
            }
        })?;
        Self::new(format!("two_slope(m1={m1},m2={m2})"), a, f, mode, schedule)
    }

    fn region(&self) -> Region {
        Region::Coords(self.k_region.clone())
    }

    fn kernel(&self, eps: f64) -> Result<MollifierKernel> {
        MollifierKernel::new(self.profile, eps, self.a.grid())
    }

    fn norms(&self) -> Vec<Norm> {
        let mut v: Vec<Norm> = self.p_list.iter().map(|&p| Norm::L(p)).collect();
        v.push(Norm::Inf);
        v
    }
}

fn a_eps(case: &FriedrichsCase, kernel: &MollifierKernel) -> Result<SampledField> {
    match case.mode {
        AEpsMode::Frozen => Ok(case.a.clone()),
        AEpsMode::Mollified => convolve(&case.a, kernel),
        AEpsMode::TrueInverse => {
            if case.a.values().iter().any(|v| v.abs() <= 1e-12) {
                return Err(Error::Domain("true_inverse mode needs a bounded away from 0".into()));
            }
            let inv = SampledField::scalar(case.a.grid().clone(), case.a.values().iter().map(|v| 1.0 / v).collect())?
                .with_valid(case.a.valid().clone());
            let sm = convolve(&inv, kernel)?;
            let valid = sm.valid().clone();
            Ok(SampledField::scalar(case.a.grid().clone(), sm.values().iter().map(|v| 1.0 / v).collect())?.with_valid(valid))
        }
    }
}

#[derive(Clone, Debug)]
pub struct Commutator0 {
    pub field: SampledField,
    /// sup over K.
    pub sup: f64,
}

/// a_ε(f∗ρ_ε) − (af)∗ρ_ε on the shrunken valid region.
pub fn commutator0(case: &FriedrichsCase, eps: f64) -> Result<Commutator0> {
    let kernel = case.kernel(eps)?;
    let ae = a_eps(case, &kernel)?;
    let fc = convolve(&case.f, &kernel)?;
    let af = SampledField::scalar(
        case.a.grid().clone(),
        case.a.values().iter().zip(case.f.values()).map(|(a, f)| a * f).collect(),
    )?;
    let afc = convolve(&af, &kernel)?;
    let valid = fc.valid().intersect(ae.valid()).intersect(afc.valid());
    let vals: Vec<f64> = (0..case.a.grid().len())
        .map(|p| {
            if valid.contains(&case.a.grid().unflat(p)) {
                ae.at(p)[0] * fc.at(p)[0] - afc.at(p)[0]
            } else {
                0.0
            }
        })
        .collect();
    let field = SampledField::scalar(case.a.grid().clone(), vals)?.with_valid(valid);
    let sup = lp_norm(&field, &case.region(), Norm::Inf)?;
    Ok(Commutator0 { field, sup })
}

#[derive(Clone, Debug)]
pub struct Commutator1 {
    pub field: SampledField,
    pub norms: Vec<(Norm, f64)>,
}

/// ∂_j of the zero-order commutator and its L^p(K) norms (p_list and ∞).
pub fn commutator1(case: &FriedrichsCase, eps: f64, axis: usize) -> Result<Commutator1> {
    let c0 = commutator0(case, eps)?;
    let field = fd_partial(&c0.field, axis, FdScheme::Central2)?;
    let region = case.region();
    let norms = case
        .norms()
        .into_iter()
        .map(|n| Ok((n, lp_norm(&field, &region, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Commutator1 { field, norms })
}

/// Norm table over an ε schedule × exponents.
#[derive(Clone, Debug, PartialEq)]
pub struct NormReport {
    pub label: String,
    pub epsilons: Vec<f64>,
    pub norms: Vec<Norm>,
    /// `table[k][i]`: norm `i` at ε_k.
    pub table: Vec<Vec<f64>>,
}

impl NormReport {
    pub fn column(&self, norm: Norm) -> Option<Vec<f64>> {
        let i = self.norms.iter().position(|n| *n == norm)?;
        Some(self.table.iter().map(|r| r[i]).collect())
    }

    /// final / initial along the schedule.
    pub fn ratio(&self, norm: Norm) -> Option<f64> {
        let c = self.column(norm)?;
        Some(c.last()? / c.first()?)
    }

    /// Each entry at most (1 + tol) times its predecessor.
    pub fn monotone(&self, norm: Norm, tol: f64) -> Option<bool> {
        let c = self.column(norm)?;
        Some(c.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol)))
    }

    pub fn median(&self, norm: Norm) -> Option<f64> {
        let mut c = self.column(norm)?;
        c.sort_by(f64::total_cmp);
        let m = c.len();
        Some(if m % 2 == 1 { c[m / 2] } else { 0.5 * (c[m / 2 - 1] + c[m / 2]) })
    }

    /// L^∞ entries all within `factor` × their schedule median.
    pub fn bounded(&self, factor: f64) -> bool {
        match (self.column(Norm::Inf), self.median(Norm::Inf)) {
            (Some(c), Some(m)) => c.iter().all(|v| *v <= factor * m),
            _ => true,
        }
    }

    fn flag(&self, k: usize, i: usize) -> &'static str {
        if self.norms[i] == Norm::Inf {
            let m = self.median(Norm::Inf).unwrap_or(f64::INFINITY);
            return if self.table[k][i] <= 3.0 * m { "bounded" } else { "unbounded" };
        }
        if k == 0 {
            "initial"
        } else if self.table[k][i] <= self.table[k - 1][i] {
            "decreasing"
        } else {
            "increasing"
        }
    }

    /// CSV with columns epsilon, p, norm, trend_flag.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epsilon", "p", "norm", "trend_flag"])?;
        for (k, eps) in self.epsilons.iter().enumerate() {
            for (i, n) in self.norms.iter().enumerate() {
                w.write_record([format!("{eps:.17e}"), n.label(), format!("{:.17e}", self.table[k][i]), self.flag(k, i).into()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// One two-column file (ε, norm) per exponent: `<stem>_p<label>.dat`.
    pub fn write_plot_data(&self, dir: &Path, stem: &str) -> Result<Vec<std::path::PathBuf>> {
        let mut out = Vec::new();
        for (i, n) in self.norms.iter().enumerate() {
            let path = dir.join(format!("{stem}_p{}.dat", n.label()));
            let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
            for (k, eps) in self.epsilons.iter().enumerate() {
                writeln!(f, "{eps:.17e} {:.17e}", self.table[k][i])?;
            }
            f.flush()?;
            out.push(path);
        }
        Ok(out)
    }
}

/// commutator1 norms across the case's schedule.
pub fn commutator_sweep(case: &FriedrichsCase, axis: usize) -> Result<NormReport> {
    let rows = case
        .schedule
        .par_iter()
        .map(|&e| commutator1(case, e, axis).map(|c| c.norms.iter().map(|(_, v)| *v).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport {
        label: format!("{} d/dx{axis}", case.name),
        epsilons: case.schedule.clone(),
        norms: case.norms(),
        table: rows,
    })
}

/// Largest difference quotient between lattice neighbours on the regular
/// axes inside `region`.
pub fn lipschitz_estimate(field: &SampledField, region: &[(f64, f64)]) -> f64 {
    let grid = field.grid();
    let b = grid.box_from_coords(region);
    let mut lip: f64 = 0.0;
    for idx in b.indices() {
        for a in grid.regular_axes() {
            if idx[a] + 1 > b.hi[a] {
                continue;
            }
            let mut j = idx.clone();
            j[a] += 1;
            let d = (field.at_index(&j)[0] - field.at_index(&idx)[0]).abs() / grid.spacing()[a];
            lip = lip.max(d);
        }
    }
    lip
}

#[derive(Clone, Debug, PartialEq)]
pub struct KernelMass {
    /// max_y ∫_K |k_ε(x,y)| dx
    pub over_x: f64,
    /// max_{x∈K} ∫ |k_ε(x,y)| dy
    pub over_y: f64,
    /// (1 + ∫|∇ρ|)·Lip(a, K′)
    pub bound: f64,
}

/// Masses of k_ε(x,y) = ∂_j a(x) ρ_ε(x−y) + (a(x) − a(y)) ∂_j ρ_ε(x−y) on a
/// one-dimensional case.
pub fn kernel_mass(case: &FriedrichsCase, eps: f64, axis: usize) -> Result<KernelMass> {
    let grid = case.a.grid();
    if grid.dim() != 1 || axis != 0 {
        return Err(Error::InvalidParam("kernel_mass is evaluated on one-dimensional cases".into()));
    }
    let kernel = case.kernel(eps)?;
    let da = fd_partial(&case.a, 0, FdScheme::Central2)?;
    let h = grid.spacing()[0];
    let kbox = grid.box_from_coords(&case.k_region);
    let (klo, khi) = (kbox.lo[0], kbox.hi[0]);
    let reach = (eps / h).ceil() as usize + 1;
    let npts = grid.len();
    let a = case.a.values();
    let k = |x: usize, y: usize| -> f64 {
        let z = grid.coord(0, x) - grid.coord(0, y);
        da.at(x)[0] * kernel.density(&[z]) + (a[x] - a[y]) * kernel.gradient(&[z])[0]
    };
    let trap = |i: usize, lo: usize, hi: usize| if i == lo || i == hi { 0.5 * h } else { h };
    let over_y = (klo..=khi)
        .into_par_iter()
        .map(|x| {
            let lo = x.saturating_sub(reach);
            let hi = (x + reach).min(npts - 1);
            (lo..=hi).map(|y| trap(y, 0, npts - 1) * k(x, y).abs()).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    let over_x = (klo.saturating_sub(reach)..=(khi + reach).min(npts - 1))
        .into_par_iter()
        .map(|y| {
            let lo = y.saturating_sub(reach).max(klo);
            let hi = (y + reach).min(khi);
            if lo > hi {
                return 0.0;
            }
            (lo..=hi).map(|x| trap(x, klo, khi) * k(x, y).abs()).sum::<f64>()
        })
        .reduce(|| 0.0, f64::max);
    let emax = case.schedule.iter().cloned().fold(eps, f64::max);
    let kprime: Vec<(f64, f64)> = case.k_region.iter().map(|&(lo, hi)| (lo - emax, hi + emax)).collect();
    let bound = (1.0 + kernel.gradient_mass()) * lipschitz_estimate(&case.a, &kprime);
    Ok(KernelMass { over_x, over_y, bound })
}

/// sup_K |a_ε − a| for each mode at one ε.
pub fn mode_discrepancy(case: &FriedrichsCase, eps: f64) -> Result<Vec<(AEpsMode, f64)>> {
    let kernel = case.kernel(eps)?;
    [AEpsMode::TrueInverse, AEpsMode::Frozen, AEpsMode::Mollified]
        .into_iter()
        .filter(|m| *m != AEpsMode::TrueInverse || case.a.values().iter().all(|v| v.abs() > 1e-12))
        .map(|mode| {
            let c = FriedrichsCase { mode, ..case.clone() };
            let ae = a_eps(&c, &kernel)?;
            let d: Vec<f64> = ae.values().iter().zip(case.a.values()).map(|(x, y)| x - y).collect();
            let d = SampledField::scalar(case.a.grid().clone(), d)?.with_valid(ae.valid().clone());
            Ok((mode, lp_norm(&d, &Region::Coords(case.k_region.clone()), Norm::Inf)?))
        })
        .collect()
}

/// Ric[g] ⋆ ρ_ε from the certified decomposition: regular part convolved on
/// the lattice plus the delta coefficient times the mollified single layer.
pub fn mollified_distributional_ricci(model: &SpacetimeModel, grid: &Grid, kernel: &MollifierKernel) -> Result<SampledField> {
    let n = grid.dim();
    let kink = model.metric.kink().cloned();
    let regular = sample(grid, TensorRank::BILINEAR, true, |x, out| {
        let side = kink.as_ref().map_or(1.0, |k| k.signed_distance(x));
        let m = if side == 0.0 {
            match (model.ricci_exact(x, -1.0), model.ricci_exact(x, 1.0)) {
                (Ok(a), Ok(b)) => (a + b).scale(0.5),
                _ => Mat::zeros(n),
            }
        } else {
            model.ricci_exact(x, side.signum()).unwrap_or_else(|_| Mat::zeros(n))
        };
        m.write_to(out)
    })?;
    model.ricci_exact(&grid.point_flat(0), 1.0)?;
    let mut smooth = convolve(&regular, kernel)?;
    if let Some(d) = &model.known.delta {
        let part = &d.value;
        let valid = smooth.valid().clone();
        let ncomp = smooth.ncomp();
        let coeff = part.coefficient.to_vec();
        for (p, chunk) in smooth.values_mut().chunks_mut(ncomp).enumerate() {
            let s = part.kink.signed_distance(&grid.point_flat(p));
            let w = kernel.line_density(s);
            if w != 0.0 && valid.contains(&grid.unflat(p)) {
                for (c, dc) in chunk.iter_mut().zip(&coeff) {
                    *c += w * dc;
                }
            }
        }
    }
    Ok(smooth)
}

fn require_decomposition(model: &SpacetimeModel) -> Result<()> {
    if model.known.ricci.is_none() || (model.metric.kink().is_some() && model.known.delta.is_none()) {
        return Err(Error::MissingDecomposition(model.name.clone()));
    }
    Ok(())
}

/// ‖Ric[g_ε] − Ric[g]⋆ρ_ε‖_{L^p(K)} across the family's schedule.
pub fn ricci_commutator(
    model: &SpacetimeModel,
    family: &RegularizedFamily,
    p_list: &[f64],
    k_region: &[(f64, f64)],
) -> Result<NormReport> {
    require_decomposition(model)?;
    let grid = &family.grid;
    let mut norms: Vec<Norm> = p_list.iter().map(|&p| Norm::L(p)).collect();
    norms.push(Norm::Inf);
    let region = Region::Coords(k_region.to_vec());
    let rows = (0..family.len())
        .into_par_iter()
        .map(|k| {
            let kernel = MollifierKernel::new(family.profile, family.schedule[k], grid)?;
            let lhs = curvature_of(&family.smoothed[k], grid, FdScheme::Central4)?;
            let rhs = mollified_distributional_ricci(model, grid, &kernel)?;
            let diff: Vec<f64> = lhs.ricci.values().iter().zip(rhs.values()).map(|(a, b)| a - b).collect();
            let valid = lhs.valid.intersect(rhs.valid());
            let d = SampledField::new(grid.clone(), TensorRank::BILINEAR, true, diff)?.with_valid(valid);
            check_inside(&d, k_region)?;
            norms.iter().map(|n| lp_norm(&d, &region, *n)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport { label: format!("ricci_commutator {}", model.name), epsilons: family.schedule.clone(), norms, table: rows })
}

fn check_inside(field: &SampledField, k_region: &[(f64, f64)]) -> Result<()> {
    let b = field.grid().box_from_coords(k_region);
    if b.intersect(field.valid()) != b {
        return Err(Error::OutsideValidRegion(b.lo.clone()));
    }
    Ok(())
}

pub type VectorField = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// ‖(Ric[g]⋆ρ_ε)(X,Y) − (Ric[g](X,Y))⋆ρ_ε‖_{L^p(K)}; the single-layer part
/// is contracted with X, Y at the foot point on the kink.
pub fn ricci_commutator_fields(
    model: &SpacetimeModel,
    family: &RegularizedFamily,
    x_field: VectorField,
    y_field: VectorField,
    p_list: &[f64],
    k_region: &[(f64, f64)],
) -> Result<NormReport> {
    require_decomposition(model)?;
    let grid = &family.grid;
    let n = grid.dim();
    let mut norms: Vec<Norm> = p_list.iter().map(|&p| Norm::L(p)).collect();
    norms.push(Norm::Inf);
    let region = Region::Coords(k_region.to_vec());
    let kink = model.metric.kink().cloned();
    let contracted = sample_scalar(grid, |x| {
        let side = kink.as_ref().map_or(1.0, |k| k.signed_distance(x));
        let r = |s: f64| model.ricci_exact(x, s).map(|m| m.form(&x_field(x), &y_field(x))).unwrap_or(0.0);
        if side == 0.0 {
            0.5 * (r(-1.0) + r(1.0))
        } else {
            r(side.signum())
        }
    })?;
    let rows = (0..family.len())
        .into_par_iter()
        .map(|k| {
            let kernel = MollifierKernel::new(family.profile, family.schedule[k], grid)?;
            let lhs_t = mollified_distributional_ricci(model, grid, &kernel)?;
            let mut rhs = convolve(&contracted, &kernel)?;
            if let Some(d) = &model.known.delta {
                let part = &d.value;
                let nn: f64 = part.kink.normal.iter().map(|c| c * c).sum();
                for (p, v) in rhs.values_mut().iter_mut().enumerate() {
                    let x = grid.point_flat(p);
                    let s = part.kink.signed_distance(&x);
                    let w = kernel.line_density(s);
                    if w != 0.0 {
                        let foot: Vec<f64> = x.iter().zip(&part.kink.normal).map(|(xi, ni)| xi - s * ni / nn).collect();
                        *v += w * part.coefficient.form(&x_field(&foot), &y_field(&foot));
                    }
                }
            }
            let valid = lhs_t.valid().intersect(rhs.valid());
            let diff: Vec<f64> = (0..grid.len())
                .map(|p| {
                    let x = grid.point_flat(p);
                    Mat::from_slice(n, lhs_t.at(p)).form(&x_field(&x), &y_field(&x)) - rhs.at(p)[0]
                })
                .collect();
            let d = SampledField::scalar(grid.clone(), diff)?.with_valid(valid);
            check_inside(&d, k_region)?;
            norms.iter().map(|nm| lp_norm(&d, &region, *nm)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormReport {
        label: format!("ricci_commutator_fields {}", model.name),
        epsilons: family.schedule.clone(),
        norms,
        table: rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog, ModelParams};
    use crate::mollify::{default_schedule, quad, FamilyConfig};

    fn schedule() -> Vec<f64> {
        (0..5).map(|k| 0.2 * 0.5f64.powi(k)).collect()
    }

    #[test]
    fn constant_a_commutes() {
        let grid = Grid::new(&[(-1.0, 1.0)], &[2001]).unwrap();
        let a = sample_scalar(&grid, |_| 1.5).unwrap();
        let f = sample_scalar(&grid, |x| x[0].signum()).unwrap();
        let case = FriedrichsCase::new("const", a, f, AEpsMode::Frozen, schedule()).unwrap();
        for e in schedule() {
            assert!(commutator0(&case, e).unwrap().sup < 1e-14);
            let c1 = commutator1(&case, e, 0).unwrap();
            assert!(c1.norms.iter().all(|(_, v)| *v < 1e-10), "{:?}", c1.norms);
            let km = kernel_mass(&case, e, 0).unwrap();
            assert!(km.over_x < 1e-12 && km.over_y < 1e-12);
        }
    }

    #[test]
    fn zero_order_commutator_is_linear_in_eps() {
        let grid = Grid::new(&[(-1.0, 1.0)], &[8001]).unwrap();
        let a = sample_scalar(&grid, |x| x[0].abs()).unwrap();
        let f = sample_scalar(&grid, |_| 1.0).unwrap();
        let case = FriedrichsCase::new("abs", a, f, AEpsMode::Frozen, schedule()).unwrap();
        let sups: Vec<f64> = schedule().iter().map(|&e| commutator0(&case, e).unwrap().sup).collect();
        for (e, s) in schedule().iter().zip(&sups) {
            assert!(*s <= e * (1.0 + 1e-9) && *s > 0.0);
        }
        for w in sups.windows(2) {
            assert!((w[1] / w[0] - 0.5).abs() < 0.1, "{sups:?}");
        }
        // at x = 0 the commutator is −(|x|∗ρ)(0) = −ε·2c∫₀¹ rρ(r)dr
        let c = crate::mollify::normalization(Profile::StandardBump, 1);
        let m1 = 2.0 * c * quad(|r| r * Profile::StandardBump.value(r), 0.0, 1.0, 64, 16);
        let c0 = commutator0(&case, 0.1).unwrap();
        assert!((c0.field.at(4000)[0] + 0.1 * m1).abs() < 1e-4 * m1);
    }

    #[test]
    fn kink_case_sweep_meets_thresholds() {
        let case = FriedrichsCase::kink(8001, schedule()).unwrap();
        let r = commutator_sweep(&case, 0).unwrap();
        assert!(r.ratio(Norm::L(1.0)).unwrap() <= 0.2, "{r:?}");
        assert!(r.ratio(Norm::L(2.0)).unwrap() <= 0.35);
        for p in DEFAULT_P {
            assert!(r.monotone(Norm::L(p), 0.0).unwrap());
        }
        assert!(r.bounded(3.0));
    }

    #[test]
    fn smooth_a_step_f_rate() {
        // a = 1 + x²/2 smooth, f = step: ‖∂C‖_{L^p} ~ ε^{1/p}
        let grid = Grid::new(&[(-1.0, 1.0)], &[8001]).unwrap();
        let a = sample_scalar(&grid, |x| 1.0 + 0.5 * x[0] * x[0] + x[0]).unwrap();
        let f = sample_scalar(&grid, |x| if x[0] >= 0.0 { 1.0 } else { 0.0 }).unwrap();
        let case = FriedrichsCase::new("step", a, f, AEpsMode::Frozen, schedule()).unwrap();
        let r = commutator_sweep(&case, 0).unwrap();
        for p in DEFAULT_P {
            let c = r.column(Norm::L(p)).unwrap();
            let rate = (c[0] / c[4]).ln() / 16f64.ln();
            assert!((rate - 1.0 / p).abs() < 0.15, "p={p} rate={rate}");
        }
    }

    #[test]
    fn locality_and_constant_shift() {
        let case = FriedrichsCase::kink(4001, schedule()).unwrap();
        let eps = 0.05;
        let c0 = commutator0(&case, eps).unwrap();
        let grid = case.a.grid().clone();
        for i in c0.field.valid().indices() {
            let x = grid.coord(0, i[0]);
            if x.abs() > 2.0 * eps {
                assert!(c0.field.at_index(&i)[0].abs() < 1e-14);
            }
        }
        let shifted_a = sample_scalar(&grid, |x| x[0].abs() + 4.0).unwrap();
        let shifted = FriedrichsCase::new("kink+4", shifted_a, case.f.clone(), AEpsMode::Frozen, schedule()).unwrap();
        let c1 = commutator0(&shifted, eps).unwrap();
        for (u, v) in c0.field.values().iter().zip(c1.field.values()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn kernel_masses_are_uniform_and_bounded() {
        let grid = Grid::new(&[(-1.0, 1.0)], &[8001]).unwrap();
        let a = sample_scalar(&grid, |x| x[0]).unwrap();
        let f = sample_scalar(&grid, |_| 1.0).unwrap();
        let case = FriedrichsCase::new("linear", a, f, AEpsMode::Frozen, schedule()).unwrap();
        let masses: Vec<KernelMass> = schedule().iter().map(|&e| kernel_mass(&case, e, 0).unwrap()).collect();
        for m in &masses {
            assert!(m.over_x <= m.bound && m.over_y <= m.bound, "{m:?}");
        }
        let xs: Vec<f64> = masses.iter().map(|m| m.over_y).collect();
        let (lo, hi) = xs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), v| (l.min(*v), h.max(*v)));
        assert!(hi <= 1.1 * lo, "{xs:?}");
    }

    #[test]
    fn two_slope_true_inverse_case() {
        let case = FriedrichsCase::two_slope(0.5, 1.0, 8001, AEpsMode::TrueInverse, schedule()).unwrap();
        let r = commutator_sweep(&case, 0).unwrap();
        assert!(r.ratio(Norm::L(1.0)).unwrap() <= 0.25, "{r:?}");
        assert!(r.ratio(Norm::L(2.0)).unwrap() <= 0.35);
        assert!(r.bounded(3.0));
        let d = mode_discrepancy(&case, 0.05).unwrap();
        assert_eq!(d.len(), 3);
        // |a_ε − a| = O(ε) for every mode
        assert!(d.iter().all(|(_, v)| *v < 0.05 * 10.0));
        assert!(matches!(
            mode_discrepancy(&FriedrichsCase::kink(401, vec![0.2]).unwrap(), 0.2).unwrap().len(),
            2
        ));
    }

    #[test]
    fn ricci_commutator_two_slope() {
        let m = catalog::catalog("grw_two_slope", &ModelParams::new()).unwrap();
        let grid = m.grid(&[(-0.9, 0.6), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 3841).unwrap();
        let fam = RegularizedFamily::build(&m.metric, &grid, &FamilyConfig::default()).unwrap();
        let k = vec![(-0.3, 0.3), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)];
        let r = ricci_commutator(&m, &fam, &[1.0, 2.0], &k).unwrap();
        assert!(r.ratio(Norm::L(1.0)).unwrap() <= 0.25, "{r:?}");
        assert!(r.bounded(3.0), "{r:?}");

        // non-constant X: trend as for the tensor
        let xf: VectorField = Arc::new(|x: &[f64]| vec![1.0 + 0.5 * x[0], 0.0, 0.0, 0.0]);
        let r = ricci_commutator_fields(&m, &fam, xf.clone(), xf, &[1.0], &k).unwrap();
        assert!(r.ratio(Norm::L(1.0)).unwrap() <= 0.25, "{r:?}");
        // constant X: linearity makes the difference vanish
        let cf: VectorField = Arc::new(|_: &[f64]| vec![1.0, 0.3, 0.0, 0.0]);
        let r = ricci_commutator_fields(&m, &fam, cf.clone(), cf, &[1.0], &k).unwrap();
        assert!(r.table.iter().flatten().all(|v| *v < 1e-10), "{r:?}");
    }

    #[test]
    fn ricci_commutator_smooth_is_noise() {
        let m = catalog::catalog("grw_smooth", &ModelParams::new()).unwrap();
        let grid = m.grid(&[(-1.0, 1.0); 4], 1601).unwrap();
        let fam = RegularizedFamily::build(&m.metric, &grid, &FamilyConfig { schedule: default_schedule(), ..Default::default() }).unwrap();
        let k = vec![(-0.3, 0.3), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)];
        let r = ricci_commutator(&m, &fam, &[1.0], &k).unwrap();
        // both sides converge to the smooth tensor; the residue is O(ε²)
        let c = r.column(Norm::Inf).unwrap();
        assert!(c.iter().zip(&fam.schedule).all(|(v, e)| *v < 2.0 * e * e), "{c:?}");
    }

    #[test]
    fn report_csv_and_plot_files() {
        let case = FriedrichsCase::kink(2001, vec![0.2, 0.1]).unwrap();
        let r = commutator_sweep(&case, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        r.write_csv(&dir.path().join("n.csv")).unwrap();
        let text = std::fs::read_to_string(dir.path().join("n.csv")).unwrap();
        assert!(text.starts_with("epsilon,p,norm,trend_flag"));
        assert_eq!(text.lines().count(), 1 + 2 * 4);
        let files = r.write_plot_data(dir.path(), "kink").unwrap();
        assert_eq!(files.len(), 4);
    }
}
