use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geodesic::{normal_geodesic, sigma_frame, GeodesicOptions, GeodesicResult, GeodesicStatus};
use super::tau::{tau_seeded, tau_sigma, Lengths, TauEstimate, TauSearch};
use crate::curvature::Hypersurface;
use crate::error::{Error, Result};
use crate::grid::gauss_legendre;
use crate::metric::{Mat, MetricField};
use crate::mollify::RegularizedFamily;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CutConfig {
    /// τ_Σ(exp(t)) ≤ t·(1 + rel_tol) counts as not cut.
    pub rel_tol: f64,
    /// Bisection stops at this bracket width, relative to Tmax.
    pub t_tol: f64,
    pub geodesic: GeodesicOptions,
    pub search: TauSearch,
}

impl Default for CutConfig {
    fn default() -> Self {
        Self { rel_tol: 0.005, t_tol: 1e-3, geodesic: GeodesicOptions::default(), search: TauSearch::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutResult {
    pub value: f64,
    /// Set when the normal geodesic stopped before Tmax.
    pub stopped: Option<GeodesicStatus>,
    /// (t, τ_Σ(exp(t))) pairs examined.
    pub evaluations: Vec<(f64, f64)>,
}

/// Largest t ≤ Tmax (up to the bisection tolerance) at which the normal
/// geodesic from σ(y) still realizes τ_Σ.
pub fn cut_function(metric: &MetricField, sigma: &Hypersurface, y: &[f64], tmax: f64, cfg: &CutConfig) -> Result<CutResult> {
    let geo = normal_geodesic(metric, sigma, y, tmax, &cfg.geodesic)?;
    let stopped = (geo.status != GeodesicStatus::ReachedT).then_some(geo.status);
    let reach = if stopped.is_some() { geo.final_parameter() } else { tmax };
    let mut evaluations = Vec::new();
    let mut is_cut = |t: f64| -> Result<bool> {
        if t <= 0.0 {
            return Ok(false);
        }
        let (x, _) = geo.state_at(t).ok_or_else(|| Error::Domain(format!("no geodesic state at {t}")))?;
        let ts = tau_sigma(metric, sigma, &x, &cfg.search)?.value;
        evaluations.push((t, ts));
        Ok(ts > t * (1.0 + cfg.rel_tol))
    };
    if !is_cut(reach)? {
        return Ok(CutResult { value: reach, stopped, evaluations });
    }
    let (mut lo, mut hi) = (0.0, reach);
    while hi - lo > cfg.t_tol * tmax {
        let mid = 0.5 * (lo + hi);
        if is_cut(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CutResult { value: lo, stopped, evaluations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalityReport {
    pub targets: Vec<Vec<f64>>,
    /// Per target: max_i |g(γ̇,X_i)|/(‖γ̇‖‖X_i‖) at the witness base point.
    pub ratios: Vec<f64>,
    /// The same as a rapidity, in degrees.
    pub defects_deg: Vec<f64>,
    pub max_deg: f64,
    pub tau: Vec<f64>,
}

impl OrthogonalityReport {
    pub fn pass(&self, tol_deg: f64) -> bool {
        self.max_deg <= tol_deg
    }
}

/// Defect of the first witness segment against Σ, from a quadratic fit of the
/// first three nodes.
pub fn witness_defect(metric: &MetricField, sigma: &Hypersurface, head: &[Vec<f64>]) -> Result<f64> {
    if head.len() < 3 {
        return Err(Error::DegenerateWitness(format!("{} nodes, need 3", head.len())));
    }
    let (x0, x1, x2) = (&head[0], &head[1], &head[2]);
    let h1: f64 = metric.time(&x1.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
    let h2: f64 = metric.time(&x2.iter().zip(x1).map(|(a, b)| a - b).collect::<Vec<_>>());
    if !(h1 > 0.0 && h2 > 0.0) {
        return Err(Error::DegenerateWitness("witness nodes are not time-ordered".into()));
    }
    // derivative at x0 of the parabola through the three nodes, in time
    let v: Vec<f64> = (0..x0.len())
        .map(|i| {
            let d1 = (x1[i] - x0[i]) / h1;
            let d2 = (x2[i] - x1[i]) / h2;
            d1 - h1 * (d2 - d1) / (h1 + h2)
        })
        .collect();
    let (base, frame, _) = sigma_frame(metric, sigma, &x0[1..])?;
    let g = metric.at(&base);
    let vv = g.quad(&v);
    if !(vv < 0.0) {
        return Err(Error::DegenerateWitness("initial velocity is not timelike".into()));
    }
    Ok(frame
        .iter()
        .map(|e| g.form(&v, e).abs() / ((-vv).sqrt() * g.quad(e).sqrt()))
        .fold(0.0, f64::max))
}

pub fn defect_degrees(ratio: f64) -> f64 {
    ratio.asinh().to_degrees()
}

/// Starting-direction defect of the τ_Σ witnesses for each target.
pub fn orthogonality_check(metric: &MetricField, sigma: &Hypersurface, targets: &[Vec<f64>], cfg: &TauSearch) -> Result<OrthogonalityReport> {
    let rows = targets
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let t = tau_sigma(metric, sigma, p, &cfg.with_seed(cfg.seed.wrapping_add(i as u64)))?;
            if t.witness.is_empty() {
                return Err(Error::DegenerateWitness(format!("no causal path from Σ to {p:?}")));
            }
            let r = witness_defect(metric, sigma, &t.witness.nodes)?;
            Ok((r, t.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let defects_deg: Vec<f64> = ratios.iter().map(|&r| defect_degrees(r)).collect();
    Ok(OrthogonalityReport {
        targets: targets.to_vec(),
        max_deg: defects_deg.iter().cloned().fold(0.0, f64::max),
        ratios,
        defects_deg,
        tau: rows.iter().map(|r| r.1).collect(),
    })
}

/// Defect (degrees) after each logged refinement level of a τ_Σ search.
pub fn defect_trace(metric: &MetricField, sigma: &Hypersurface, est: &TauEstimate) -> Result<Vec<f64>> {
    est.refinement_log
        .iter()
        .map(|s| witness_defect(metric, sigma, &s.head).map(defect_degrees))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OmegaConfig {
    /// Gauss–Legendre points along each normal geodesic.
    pub t_points: usize,
    /// Gauss–Legendre points per axis of B.
    pub y_points: usize,
    /// Cap each line at the audited cut value (expensive); otherwise only
    /// at the geodesic's stopping parameter.
    pub cut_audit: bool,
    pub fd_step: f64,
    pub geodesic: GeodesicOptions,
    pub cut: CutConfig,
}

impl Default for OmegaConfig {
    fn default() -> Self {
        Self {
            t_points: 24,
            y_points: 2,
            cut_audit: false,
            fd_step: 1e-5,
            geodesic: GeodesicOptions::default(),
            cut: CutConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaLine {
    pub y: Vec<f64>,
    /// min(T, stop, cut) for this base point.
    pub horizon: f64,
    /// ∫₀^horizon f(exp(t, y)) dt.
    pub line_integral: f64,
    pub stopped: Option<GeodesicStatus>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaIntegral {
    /// ∫_B ∫₀^{horizon} f 𝒜 dt dσ.
    pub value: f64,
    /// σ(B).
    pub area: f64,
    pub lines: Vec<OmegaLine>,
}

impl OmegaIntegral {
    /// inf over the B-grid of the line integrals.
    pub fn line_inf(&self) -> f64 {
        self.lines.iter().map(|l| l.line_integral).fold(f64::INFINITY, f64::min)
    }

    pub fn flagged(&self) -> Vec<Vec<f64>> {
        self.lines.iter().filter(|l| l.stopped.is_some()).map(|l| l.y.clone()).collect()
    }
}

fn tensor_rule(bounds: &[(f64, f64)], k: usize) -> Vec<(Vec<f64>, f64)> {
    let (x, w) = gauss_legendre(k.max(1));
    let mut out = vec![(Vec::new(), 1.0)];
    for &(lo, hi) in bounds {
        let half = 0.5 * (hi - lo);
        out = out
            .into_iter()
            .flat_map(|(p, wp)| {
                x.iter().zip(&w).map(move |(xi, wi)| {
                    let mut q = p.clone();
                    q.push(lo + half * (xi + 1.0));
                    (q, wp * wi * half)
                })
            })
            .collect();
    }
    out
}

/// ∫_{Ω_T⁺(B)} f dvol_g in the normal chart (t, y) ↦ exp_Σ⁺(t, σ(y)), with
/// the volume density |det ∂exp| √|det g| (= 𝒜 times the area density of Σ).
/// Also returns the per-line integrals ∫ f(exp(t, y)) dt.
pub fn omega_integral(
    metric: &MetricField,
    sigma: &Hypersurface,
    b: &[(f64, f64)],
    t_max: f64,
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    cfg: &OmegaConfig,
) -> Result<OmegaIntegral> {
    if b.len() + 1 != metric.dim() {
        return Err(Error::InvalidParam("B must be a box in Σ's coordinates".into()));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidParam(format!("T must be positive, got {t_max}")));
    }
    let rule = tensor_rule(b, cfg.y_points);
    let (tx, tw) = gauss_legendre(cfg.t_points.max(1));
    let k = b.len();
    let h = cfg.fd_step;
    let parts = rule
        .par_iter()
        .map(|(y, wy)| -> Result<(OmegaLine, f64, f64)> {
            let centre = normal_geodesic(metric, sigma, y, t_max, &cfg.geodesic)?;
            let mut horizon = centre.final_parameter().min(t_max);
            let stopped = (centre.status != GeodesicStatus::ReachedT).then_some(centre.status);
            if cfg.cut_audit {
                horizon = horizon.min(cut_function(metric, sigma, y, t_max, &cfg.cut)?.value);
            }
            let shifted: Vec<(GeodesicResult, GeodesicResult)> = (0..k)
                .map(|i| {
                    let mut yp = y.clone();
                    let mut ym = y.clone();
                    yp[i] += h;
                    ym[i] -= h;
                    Ok((
                        normal_geodesic(metric, sigma, &yp, horizon, &cfg.geodesic)?,
                        normal_geodesic(metric, sigma, &ym, horizon, &cfg.geodesic)?,
                    ))
                })
                .collect::<Result<_>>()?;
            let (_, frame, _) = sigma_frame(metric, sigma, y)?;
            let g0 = metric.at(&sigma.point(y));
            let area_density = Mat::from_fn(k, |i, j| g0.form(&frame[i], &frame[j])).det().sqrt();
            let (mut vol, mut line) = (0.0, 0.0);
            for (xi, wi) in tx.iter().zip(&tw) {
                let t = 0.5 * horizon * (xi + 1.0);
                let w = 0.5 * horizon * wi;
                let (x, v) = centre.state_at(t).ok_or_else(|| Error::Domain("normal geodesic stopped early".into()))?;
                let fx = f(&x);
                line += w * fx;
                if fx == 0.0 {
                    continue;
                }
                let mut cols = vec![v];
                for (p, m) in &shifted {
                    let xp = p.state_at(t).map(|s| s.0);
                    let xm = m.state_at(t).map(|s| s.0);
                    let (Some(xp), Some(xm)) = (xp, xm) else {
                        return Err(Error::Domain("neighbouring normal geodesic stopped early".into()));
                    };
                    cols.push(xp.iter().zip(&xm).map(|(a, c)| (a - c) / (2.0 * h)).collect());
                }
                let n = cols.len();
                let jac = Mat::from_fn(n, |r, c| cols[c][r]);
                let density = jac.det().abs() * metric.at(&x).det().abs().sqrt();
                vol += w * fx * density;
            }
            Ok((OmegaLine { y: y.clone(), horizon, line_integral: line, stopped }, wy * vol, wy * area_density))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = OmegaIntegral { value: 0.0, area: 0.0, lines: Vec::new() };
    for (line, v, a) in parts {
        out.value += v;
        out.area += a;
        out.lines.push(line);
    }
    Ok(out)
}

/// Spacetime volume of Ω_T⁺(B).
pub fn omega_volume(metric: &MetricField, sigma: &Hypersurface, b: &[(f64, f64)], t_max: f64, cfg: &OmegaConfig) -> Result<OmegaIntegral> {
    omega_integral(metric, sigma, b, t_max, &|_| 1.0, cfg)
}

/// Random pairs p ≪ q in a coordinate box whose straight segment is
/// timelike with margin: q = p + (Δt, offset), |offset| ≤ spread·Δt.
pub fn comoving_offset_pairs(
    metric: &MetricField,
    p_box: &[(f64, f64)],
    dt: (f64, f64),
    spread: f64,
    count: usize,
    seed: u64,
) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ev = Lengths::new(metric, 5);
    let n = metric.dim();
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 * count {
        tries += 1;
        let p: Vec<f64> = p_box.iter().map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo }).collect();
        let step = rng.gen_range(dt.0..dt.1);
        let mut q = p.clone();
        q[0] += step;
        for c in q.iter_mut().skip(1).take(n - 1) {
            *c += spread * step * rng.gen_range(-1.0..1.0) / ((n - 1) as f64).sqrt();
        }
        if ev.segment(&p, &q).is_some() && ev.audit(&p, &q) > 1e-3 * step * step {
            out.push((p, q));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityRow {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// τ under each inner approximant, in schedule order.
    pub tau_k: Vec<f64>,
    pub tau: f64,
    pub chain_holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonotonicityReport {
    pub epsilons: Vec<f64>,
    pub rows: Vec<MonotonicityRow>,
    /// max over pairs of (τ − τ_k)/τ, per ε.
    pub max_gap: Vec<f64>,
    pub gap_decreasing: bool,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub seed: u64,
}

impl MonotonicityReport {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.chain_holds).count()
    }

    pub fn final_gap(&self) -> f64 {
        self.max_gap.last().copied().unwrap_or(0.0)
    }
}

/// τ under ǧ_{ε_1}, …, ǧ_{ε_K} and g for each pair. With `warm`, each search
/// is additionally seeded with the previous metric's witness (a ǧ_k-causal
/// path is ǧ_{k+1}-causal).
pub fn tau_monotonicity_check(
    base: &MetricField,
    family: &RegularizedFamily,
    pairs: &[(Vec<f64>, Vec<f64>)],
    cfg: &TauSearch,
    warm: bool,
) -> MonotonicityReport {
    let (abs_tol, rel_tol) = (1e-6, 0.005);
    let rows: Vec<MonotonicityRow> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (p, q))| {
            let search = cfg.with_seed(cfg.seed.wrapping_add(i as u64));
            let mut seeds: Vec<Vec<Vec<f64>>> = Vec::new();
            let mut run = |g: &MetricField| {
                let t = tau_seeded(g, p, q, &search, &seeds);
                if warm && !t.witness.is_empty() {
                    seeds = vec![t.witness.nodes.clone()];
                }
                t.value
            };
            let tau_k: Vec<f64> = family.inner.iter().map(&mut run).collect();
            let tau = run(base);
            let mut chain: Vec<f64> = tau_k.clone();
            chain.push(tau);
            let chain_holds = chain.windows(2).all(|w| w[0] <= w[1] * (1.0 + rel_tol) + abs_tol);
            MonotonicityRow { p: p.clone(), q: q.clone(), tau_k, tau, chain_holds }
        })
        .collect();
    let max_gap: Vec<f64> = (0..family.len())
        .map(|k| {
            rows.iter()
                .filter(|r| r.tau > 0.0)
                .map(|r| (r.tau - r.tau_k[k]) / r.tau)
                .fold(0.0, f64::max)
        })
        .collect();
    let gap_decreasing = max_gap.windows(2).all(|w| w[1] <= w[0] + abs_tol);
    MonotonicityReport { epsilons: family.schedule.clone(), rows, max_gap, gap_decreasing, abs_tol, rel_tol, seed: cfg.seed }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog, ModelParams};

    fn slice(t0: f64) -> Hypersurface {
        Hypersurface::slice(t0, vec![(-1.0, 1.0); 3])
    }

    #[test]
    fn minkowski_is_never_cut() {
        let g = MetricField::minkowski(4);
        let c = cut_function(&g, &slice(0.0), &[0.1, 0.0, 0.2], 1.5, &CutConfig::default()).unwrap();
        assert_eq!(c.value, 1.5);
        assert!(c.stopped.is_none());
    }

    #[test]
    fn eds_cut_is_the_singularity() {
        let m = catalog::catalog("grw_eds_collapse", &ModelParams::new()).unwrap();
        let c = cut_function(&m.metric, &slice(0.0), &[0.0; 3], 2.0, &CutConfig::default()).unwrap();
        assert_eq!(c.stopped, Some(GeodesicStatus::HitSingularity));
        assert!((c.value - 1.0).abs() < 1e-3, "{}", c.value);
        // self-consistency: τ_Σ(exp(t)) = t below the cut
        for (t, ts) in &c.evaluations {
            assert!((ts - t).abs() <= 0.005 * t);
        }
    }

    #[test]
    fn tilted_sigma_cut_detected() {
        // Σ = {t = −|y|/2 smoothed}: normals from a concave-from-the-future
        // ridge stop maximizing once neighbouring normals cross
        let g = MetricField::minkowski(2);
        let sigma = Hypersurface::graph(std::sync::Arc::new(|y: &[f64]| -0.5 * (y[0] * y[0] + 0.01).sqrt()), vec![(-2.0, 2.0)], "ridge");
        let c = cut_function(&g, &sigma, &[0.0], 2.0, &CutConfig::default()).unwrap();
        assert!(c.value < 2.0 && c.value > 0.0, "{c:?}");
    }

    #[test]
    fn orthogonality_minkowski_and_two_slope() {
        let cfg = TauSearch::default();
        let targets = crate::metric::random_points(&[(0.2, 0.8), (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)], 4, 3);
        let r = orthogonality_check(&MetricField::minkowski(4), &slice(0.0), &targets, &cfg).unwrap();
        assert!(r.pass(2.0), "{:?}", r.defects_deg);
        let m = catalog::catalog("grw_two_slope", &ModelParams::new()).unwrap();
        let targets = crate::metric::random_points(&[(-0.2, 0.8), (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)], 4, 4);
        let r = orthogonality_check(&m.metric, &slice(-0.5), &targets, &cfg).unwrap();
        assert!(r.pass(2.0), "{:?}", r.defects_deg);
    }

    #[test]
    fn non_orthogonal_seed_is_straightened() {
        let g = MetricField::minkowski(3);
        let sigma = Hypersurface::slice(0.0, vec![(-1.0, 1.0); 2]);
        let p = vec![1.0, 0.0, 0.0];
        // tilted by rapidity ~ 0.35 at the base
        let seed: Vec<Vec<f64>> = (0..=16)
            .map(|i| {
                let s = i as f64 / 16.0;
                vec![s, -0.35 * (1.0 - s), 0.0]
            })
            .collect();
        let cfg = TauSearch { restarts: 0, sigma_resolution: 1, ..Default::default() };
        let est = crate::causal::tau_sigma_seeded(&g, &sigma, &p, &cfg, &[seed]).unwrap();
        let trace = defect_trace(&g, &sigma, &est).unwrap();
        assert!(trace[0] > 15.0, "{trace:?}");
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + 1e-9), "{trace:?}");
        assert!(*trace.last().unwrap() < 2.0);
    }

    #[test]
    fn omega_volumes() {
        let cfg = OmegaConfig::default();
        let unit = vec![(0.0, 1.0); 3];
        let v = omega_volume(&MetricField::minkowski(4), &slice(0.0), &unit, 1.0, &cfg).unwrap();
        assert!((v.value - 1.0).abs() < 1e-8 && (v.area - 1.0).abs() < 1e-10);
        let eds = catalog::catalog("grw_eds_collapse", &ModelParams::new()).unwrap();
        let v = omega_volume(&eds.metric, &slice(0.0), &unit, 0.5, &cfg).unwrap();
        let exact = (1.0 - 0.125) / 3.0;
        assert!((v.value - exact).abs() < 0.01 * exact, "{}", v.value);
        // warped product: area(B)·∫(a/a₀)^{n−1} dt for a = cosh
        let cosh = catalog::catalog("grw_smooth", &ModelParams::new()).unwrap();
        let b = vec![(0.0, 0.5); 3];
        let v = omega_volume(&cosh.metric, &slice(0.0), &b, 0.8, &cfg).unwrap();
        let (x, w) = gauss_legendre(30);
        let exact: f64 = x.iter().zip(&w).map(|(x, w)| 0.4 * w * (0.4 * (x + 1.0)).cosh().powi(3)).sum::<f64>() * 0.125;
        assert!((v.value - exact).abs() < 1e-6 * exact, "{} vs {exact}", v.value);
    }

    #[test]
    fn omega_integral_of_a_bump_off_the_region() {
        let bump = |x: &[f64]| if x[1] > 3.0 { 1.0 } else { 0.0 };
        let r = omega_integral(&MetricField::minkowski(3), &Hypersurface::slice(0.0, vec![(-1.0, 1.0); 2]), &[(0.0, 1.0); 2], 1.0, &bump, &OmegaConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.line_inf(), 0.0);
    }

    #[test]
    fn monotone_chain_on_minkowski_family() {
        let m = catalog::catalog("minkowski", &ModelParams::new()).unwrap();
        let grid = m.grid(&[(-1.0, 1.0); 4], 641).unwrap();
        let fam = RegularizedFamily::build(&m.metric, &grid, &Default::default()).unwrap();
        let pairs = comoving_offset_pairs(&m.metric, &[(-0.5, 0.0), (-0.5, 0.5), (-0.5, 0.5), (-0.5, 0.5)], (0.2, 0.5), 0.6, 5, 9);
        assert_eq!(pairs.len(), 5);
        let r = tau_monotonicity_check(&m.metric, &fam, &pairs, &TauSearch::default(), true);
        assert_eq!(r.violations(), 0);
        assert!(r.final_gap() < 1e-6, "{:?}", r.max_gap);
    }
}
