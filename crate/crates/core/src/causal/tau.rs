use std::io::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::geodesic::check_time_axis;
use crate::curvature::Hypersurface;
use crate::error::{Error, Result};
use crate::grid::gauss_legendre;
use crate::metric::{Kink, MetricField, MAX_DIM};

/// Broken-path search settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TauSearch {
    /// Node count at which the main phase starts (coarser levels seed it).
    pub initial_nodes: usize,
    pub max_nodes: usize,
    /// Node doubling stops once a level gains less than this, relatively.
    pub rel_gain: f64,
    /// Extra randomly perturbed seeds.
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Gauss–Legendre points per segment piece.
    pub quad_points: usize,
    /// Base points per axis of Σ for the coarse τ_Σ scan.
    pub sigma_resolution: usize,
    pub seed: u64,
}

impl Default for TauSearch {
    fn default() -> Self {
        Self {
            initial_nodes: 16,
            max_nodes: 128,
            rel_gain: 1e-4,
            restarts: 2,
            max_sweeps: 300,
            quad_points: 5,
            sigma_resolution: 5,
            seed: 0,
        }
    }
}

impl TauSearch {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

/// A piecewise-affine curve with the per-segment causal audit min −g(γ̇,γ̇).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CausalPath {
    pub nodes: Vec<Vec<f64>>,
    pub character_audit: Vec<f64>,
}

impl CausalPath {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn segments(&self) -> usize {
        self.nodes.len().saturating_sub(1)
    }

    /// Lorentzian length; `None` unless every segment is future-directed causal.
    pub fn length(&self, metric: &MetricField, quad_points: usize) -> Option<f64> {
        let ev = Lengths::new(metric, quad_points);
        self.nodes.windows(2).map(|w| ev.segment(&w[0], &w[1])).sum()
    }

    /// Columns: node, x0..x{n-1}, audit (of the segment starting at the node).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let n = self.nodes.first().map_or(0, Vec::len);
        let mut header = vec!["node".to_string()];
        header.extend((0..n).map(|i| format!("x{i}")));
        header.push("audit".into());
        w.write_record(&header)?;
        for (i, x) in self.nodes.iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(x.iter().map(|c| format!("{c:.17e}")));
            rec.push(self.character_audit.get(i).map_or(String::new(), |a| format!("{a:.17e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementStep {
    pub iteration: usize,
    pub nodes: usize,
    pub value: f64,
    /// First three nodes of the current best path.
    pub head: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TauEstimate {
    /// Length of the witness: a lower bound of the time separation.
    pub value: f64,
    pub witness: CausalPath,
    pub refinement_log: Vec<RefinementStep>,
    /// Richardson extrapolation of the last two levels; not certified.
    pub upper_hint: Option<f64>,
    pub seed: u64,
}

impl TauEstimate {
    fn empty(seed: u64) -> Self {
        Self { value: 0.0, witness: CausalPath::default(), refinement_log: Vec::new(), upper_hint: None, seed }
    }

    /// Columns: iteration, nodes, value.
    pub fn write_log_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "iteration,nodes,value")?;
        for s in &self.refinement_log {
            writeln!(f, "{},{},{:.17e}", s.iteration, s.nodes, s.value)?;
        }
        f.flush()?;
        Ok(())
    }
}

/// Segment lengths by per-piece Gauss–Legendre quadrature, split at kinks.
pub(crate) struct Lengths<'a> {
    g: &'a MetricField,
    kink: Option<Kink>,
    rule: Vec<(f64, f64)>,
}

const CAUSAL_TOL: f64 = 1e-12;

impl<'a> Lengths<'a> {
    pub(crate) fn new(g: &'a MetricField, quad_points: usize) -> Self {
        let (x, w) = gauss_legendre(quad_points.max(1));
        let rule = x.iter().zip(&w).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect();
        Self { g, kink: g.kink().cloned(), rule }
    }

    fn speed(&self, a: &[f64], d: &[f64], s: f64, norm2: f64) -> Option<f64> {
        let n = a.len();
        let mut x = [0.0; MAX_DIM];
        for i in 0..n {
            x[i] = a[i] + s * d[i];
        }
        let x = &x[..n];
        if !self.g.in_domain(x) {
            return None;
        }
        let q = -self.g.quad(x, d);
        if q < -CAUSAL_TOL * norm2 || !q.is_finite() {
            return None;
        }
        Some(q.max(0.0).sqrt())
    }

    /// min of −g(γ̇,γ̇) at the endpoints and midpoint.
    pub(crate) fn audit(&self, a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = b.iter().zip(a).map(|(p, q)| p - q).collect();
        [0.0, 0.5, 1.0]
            .iter()
            .map(|&s| {
                let x: Vec<f64> = a.iter().zip(&d).map(|(p, q)| p + s * q).collect();
                -self.g.quad(&x, &d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Length of the affine segment a → b, `None` unless it is future-directed
    /// causal at the audit points and every quadrature point.
    pub(crate) fn segment(&self, a: &[f64], b: &[f64]) -> Option<f64> {
        let n = a.len();
        let mut d = [0.0; MAX_DIM];
        for i in 0..n {
            d[i] = b[i] - a[i];
        }
        let d = &d[..n];
        if self.g.time(d) <= 0.0 {
            return None;
        }
        let norm2: f64 = d.iter().map(|c| c * c).sum();
        for s in [0.0, 0.5, 1.0] {
            self.speed(a, d, s, norm2)?;
        }
        let mut cut = None;
        if let Some(k) = &self.kink {
            let (da, db) = (k.signed_distance(a), k.signed_distance(b));
            if da * db < 0.0 {
                cut = Some(da / (da - db));
            }
        }
        let pieces: &[(f64, f64)] = &match cut {
            Some(c) => [(0.0, c), (c, 1.0)],
            None => [(0.0, 1.0), (1.0, 1.0)],
        };
        let mut total = 0.0;
        for &(lo, hi) in pieces {
            if hi <= lo {
                continue;
            }
            for &(x, w) in &self.rule {
                total += (hi - lo) * w * self.speed(a, d, lo + (hi - lo) * x, norm2)?;
            }
        }
        Some(total)
    }
}

/// Path under optimization with cached segment lengths.
struct Work {
    nodes: Vec<Vec<f64>>,
    seg: Vec<f64>,
}

impl Work {
    fn new(ev: &Lengths, nodes: Vec<Vec<f64>>) -> Option<Self> {
        let seg = nodes.windows(2).map(|w| ev.segment(&w[0], &w[1])).collect::<Option<Vec<_>>>()?;
        Some(Self { nodes, seg })
    }

    fn value(&self) -> f64 {
        self.seg.iter().sum()
    }

    fn refined(&self, ev: &Lengths) -> Option<Self> {
        let mut nodes = Vec::with_capacity(2 * self.nodes.len() - 1);
        for w in self.nodes.windows(2) {
            nodes.push(w[0].clone());
            nodes.push(w[0].iter().zip(&w[1]).map(|(a, b)| 0.5 * (a + b)).collect());
        }
        nodes.push(self.nodes.last()?.clone());
        Self::new(ev, nodes)
    }

    fn head(&self) -> Vec<Vec<f64>> {
        self.nodes.iter().take(3).cloned().collect()
    }
}

/// Parabolic line search along s ↦ f(s) from f(0) = f0 with probe step d.
/// Infeasible probes are pulled back towards 0 by halving.
fn line_search(f: impl Fn(f64) -> Option<f64>, f0: f64, d: f64) -> Option<(f64, f64)> {
    let probe = |s: f64| {
        let mut t = s;
        for _ in 0..8 {
            if let Some(v) = f(t) {
                return Some((t, v));
            }
            t *= 0.5;
        }
        None
    };
    let p = probe(d);
    let m = probe(-d);
    let mut best = (0.0, f0);
    for c in [p, m].into_iter().flatten() {
        if c.1 > best.1 {
            best = c;
        }
    }
    if let (Some((sp, fp)), Some((sm, fm))) = (p, m) {
        if sp == d && sm == -d {
            let curv = fp + fm - 2.0 * f0;
            if curv < 0.0 {
                let s = (d * (fp - fm) / (-2.0 * curv)).clamp(-4.0 * d, 4.0 * d);
                if let Some(v) = f(s) {
                    if v > best.1 {
                        best = (s, v);
                    }
                }
            }
        }
    }
    (best.0 != 0.0).then_some(best)
}

struct Optimizer<'a> {
    ev: Lengths<'a>,
    dirs: Vec<Vec<f64>>,
    sigma: Option<&'a Hypersurface>,
    cfg: &'a TauSearch,
}

impl<'a> Optimizer<'a> {
    fn new(g: &'a MetricField, cfg: &'a TauSearch, sigma: Option<&'a Hypersurface>) -> Self {
        // Euclidean orthonormal basis of ker θ: interior nodes keep their time
        let n = g.dim();
        let th = g.time_covector();
        let t2: f64 = th.iter().map(|c| c * c).sum();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        for k in 0..n {
            let mut v: Vec<f64> = (0..n).map(|i| if i == k { 1.0 } else { 0.0 } - th[k] * th[i] / t2).collect();
            for e in &dirs {
                let c: f64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
                for (a, b) in v.iter_mut().zip(e) {
                    *a -= c * b;
                }
            }
            let nv = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if nv > 1e-8 && dirs.len() < n - 1 {
                dirs.push(v.iter().map(|c| c / nv).collect());
            }
        }
        Self { ev: Lengths::new(g, cfg.quad_points), dirs, sigma, cfg }
    }

    fn start_point(&self, y: &[f64]) -> Option<Vec<f64>> {
        let sigma = self.sigma?;
        if y.iter().zip(&sigma.domain).any(|(c, &(lo, hi))| *c < lo || *c > hi) {
            return None;
        }
        Some(sigma.point(y))
    }

    /// One Gauss–Seidel sweep; returns (gain, largest accepted move).
    fn sweep(&self, w: &mut Work, d: f64, backward: bool) -> (f64, f64) {
        let m = w.nodes.len() - 1;
        let before = w.value();
        let mut max_move: f64 = 0.0;
        let mut order: Vec<usize> = (1..m).collect();
        if self.sigma.is_some() {
            order.insert(0, 0);
        }
        if backward {
            order.reverse();
        }
        for i in order {
            if i == 0 {
                let k = w.nodes[0].len() - 1;
                for c in 0..k {
                    let y0 = w.nodes[0][1..].to_vec();
                    let f = |s: f64| {
                        let mut y = y0.clone();
                        y[c] += s;
                        self.ev.segment(&self.start_point(&y)?, &w.nodes[1])
                    };
                    if let Some((s, v)) = line_search(f, w.seg[0], d) {
                        let mut y = y0;
                        y[c] += s;
                        w.nodes[0] = self.start_point(&y).expect("accepted point lies on Σ");
                        w.seg[0] = v;
                        max_move = max_move.max(s.abs());
                    }
                }
                continue;
            }
            for e in &self.dirs {
                let x0 = w.nodes[i].clone();
                let (prev, next) = (&w.nodes[i - 1], &w.nodes[i + 1]);
                let f = |s: f64| {
                    let x: Vec<f64> = x0.iter().zip(e).map(|(a, b)| a + s * b).collect();
                    Some(self.ev.segment(prev, &x)? + self.ev.segment(&x, next)?)
                };
                if let Some((s, _)) = line_search(f, w.seg[i - 1] + w.seg[i], d) {
                    let x: Vec<f64> = x0.iter().zip(e).map(|(a, b)| a + s * b).collect();
                    let (l0, l1) = (self.ev.segment(&w.nodes[i - 1], &x), self.ev.segment(&x, &w.nodes[i + 1]));
                    if let (Some(l0), Some(l1)) = (l0, l1) {
                        w.nodes[i] = x;
                        w.seg[i - 1] = l0;
                        w.seg[i] = l1;
                        max_move = max_move.max(s.abs());
                    }
                }
            }
        }
        (w.value() - before, max_move)
    }

    fn relax(&self, w: &mut Work, sweeps: usize) -> usize {
        let m = w.nodes.len() - 1;
        let span = self.ev.g.time(&w.nodes[m]) - self.ev.g.time(&w.nodes[0]);
        let dt = (span / m as f64).abs().max(1e-12);
        let (d_min, d_max) = (1e-9 * dt, 0.5 * dt);
        let mut d = 0.1 * dt;
        let mut quiet = 0;
        for k in 0..sweeps {
            let (gain, mv) = self.sweep(w, d, k % 2 == 1);
            d = if mv > 0.0 { (2.0 * mv).clamp(d_min, d_max) } else { 0.25 * d };
            if gain <= 1e-13 * w.value().max(1e-300) {
                quiet += 1;
            } else {
                quiet = 0;
            }
            if d < d_min || quiet >= 3 {
                return k + 1;
            }
        }
        sweeps
    }

    /// Coarse levels up to `initial_nodes`, then doubling until the relative
    /// gain falls below `rel_gain`.
    fn run(&self, seeds: Vec<Vec<Vec<f64>>>, warm: Vec<Vec<Vec<f64>>>, seed: u64) -> TauEstimate {
        let mut log = Vec::new();
        let mut iteration = 0;
        let mut best: Option<(Work, Vec<f64>)> = None;
        let consider = |w: Work, levels: Vec<f64>, best: &mut Option<(Work, Vec<f64>)>| {
            if best.as_ref().is_none_or(|(b, _)| w.value() > b.value()) {
                *best = Some((w, levels));
            }
        };
        let initial = self.cfg.initial_nodes.max(2);
        for nodes in seeds {
            let Some(mut w) = Work::new(&self.ev, nodes) else { continue };
            while w.nodes.len() - 1 < initial {
                self.relax(&mut w, self.cfg.max_sweeps);
                w = match w.refined(&self.ev) {
                    Some(r) => r,
                    None => break,
                };
            }
            consider(w, Vec::new(), &mut best);
        }
        for nodes in warm {
            if let Some(w) = Work::new(&self.ev, nodes) {
                log.push(RefinementStep { iteration, nodes: w.nodes.len(), value: w.value(), head: w.head() });
                iteration += 1;
                consider(w, Vec::new(), &mut best);
            }
        }
        let Some((mut w, mut levels)) = best else {
            return TauEstimate::empty(seed);
        };
        loop {
            self.relax(&mut w, self.cfg.max_sweeps);
            let v = w.value();
            log.push(RefinementStep { iteration, nodes: w.nodes.len(), value: v, head: w.head() });
            iteration += 1;
            let gain = levels.last().map(|&prev: &f64| (v - prev) / prev.max(1e-300));
            levels.push(v);
            if gain.is_some_and(|g| g < self.cfg.rel_gain) || 2 * (w.nodes.len() - 1) > self.cfg.max_nodes {
                break;
            }
            match w.refined(&self.ev) {
                Some(r) => w = r,
                None => break,
            }
        }
        let value = w.value();
        let upper_hint = match levels.as_slice() {
            [.., a, b] if b >= a => Some(b + (b - a) / 3.0),
            _ => None,
        };
        let character_audit = w.nodes.windows(2).map(|p| self.ev.audit(&p[0], &p[1])).collect();
        TauEstimate {
            value,
            witness: CausalPath { nodes: w.nodes, character_audit },
            refinement_log: log,
            upper_hint,
            seed,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Certified lower bound of τ(p, q) by broken-path search. Returns 0 with an
/// empty witness when no future-directed causal path is found.
pub fn tau(metric: &MetricField, p: &[f64], q: &[f64], cfg: &TauSearch) -> TauEstimate {
    tau_seeded(metric, p, q, cfg, &[])
}

/// As [`tau`], additionally refining the given seed paths (which must run
/// from p to q); the best result wins.
pub fn tau_seeded(metric: &MetricField, p: &[f64], q: &[f64], cfg: &TauSearch, warm: &[Vec<Vec<f64>>]) -> TauEstimate {
    let opt = Optimizer::new(metric, cfg, None);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let span = (metric.time(q) - metric.time(p)).abs();
    let mid: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut seeds = vec![vec![p.to_vec(), mid.clone(), q.to_vec()]];
    let mut tries = 0;
    while seeds.len() < 1 + cfg.restarts && tries < 50 * (cfg.restarts + 1) {
        tries += 1;
        let mut x = mid.clone();
        for e in &opt.dirs {
            let c = 0.25 * span * gaussian(&mut rng);
            for (a, b) in x.iter_mut().zip(e) {
                *a += c * b;
            }
        }
        let cand = vec![p.to_vec(), x, q.to_vec()];
        if Work::new(&opt.ev, cand.clone()).is_some() {
            seeds.push(cand);
        }
    }
    let warm = warm
        .iter()
        .filter(|s| s.len() >= 2 && s[0] == p && s[s.len() - 1] == q)
        .cloned()
        .collect();
    opt.run(seeds, warm, cfg.seed)
}

/// Certified lower bound of τ_Σ(p) = sup_{x∈Σ} τ(x, p); the base point of
/// the witness is free to move on Σ.
pub fn tau_sigma(metric: &MetricField, sigma: &Hypersurface, p: &[f64], cfg: &TauSearch) -> Result<TauEstimate> {
    tau_sigma_seeded(metric, sigma, p, cfg, &[])
}

pub fn tau_sigma_seeded(
    metric: &MetricField,
    sigma: &Hypersurface,
    p: &[f64],
    cfg: &TauSearch,
    warm: &[Vec<Vec<f64>>],
) -> Result<TauEstimate> {
    check_time_axis(metric)?;
    if sigma.side(p) <= 0.0 {
        return Err(Error::InvalidParam("p must lie to the future of Σ".into()));
    }
    let opt = Optimizer::new(metric, cfg, Some(sigma));
    let mut scored: Vec<(f64, Vec<f64>)> = sigma
        .base_points(cfg.sigma_resolution.max(1))
        .into_iter()
        .chain(std::iter::once(clamp_to(&sigma.domain, &p[1..])))
        .filter_map(|y| {
            let x = sigma.point(&y);
            opt.ev.segment(&x, p).map(|v| (v, y))
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seeds: Vec<Vec<Vec<f64>>> = scored
        .iter()
        .take(1 + cfg.restarts)
        .map(|(_, y)| {
            let x = sigma.point(y);
            let mid = x.iter().zip(p).map(|(a, b)| 0.5 * (a + b)).collect();
            vec![x, mid, p.to_vec()]
        })
        .collect();
    if seeds.is_empty() {
        // no straight drop is causal: try random base points with a bent path
        for _ in 0..50 * (cfg.restarts + 1) {
            let y: Vec<f64> = sigma.domain.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.gen::<f64>()).collect();
            let x = sigma.point(&y);
            let mut mid: Vec<f64> = p.to_vec();
            mid[0] = 0.5 * (x[0] + p[0]);
            let cand = vec![x, mid, p.to_vec()];
            if Work::new(&opt.ev, cand.clone()).is_some() {
                seeds.push(cand);
                break;
            }
        }
    }
    let warm = warm
        .iter()
        .filter(|s| s.len() >= 2 && s[s.len() - 1] == p)
        .map(|s| {
            let mut s = s.clone();
            s[0] = sigma.point(&s[0][1..]);
            s
        })
        .collect();
    Ok(opt.run(seeds, warm, cfg.seed))
}

fn clamp_to(domain: &[(f64, f64)], y: &[f64]) -> Vec<f64> {
    y.iter().zip(domain).map(|(c, &(lo, hi))| c.clamp(lo, hi)).collect()
}
