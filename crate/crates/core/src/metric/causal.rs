use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Mat, MetricField};
use crate::error::{Error, Result};

/// Null band: |g(v,v)| ≤ NULL_BAND·‖v‖² counts as null.
pub const NULL_BAND: f64 = 1e-12;
/// Nesting is rejected when the worst audited margin is below this.
pub const NESTING_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalCharacter {
    Timelike,
    Null,
    Spacelike,
}

impl CausalCharacter {
    pub fn is_causal(self) -> bool {
        !matches!(self, CausalCharacter::Spacelike)
    }
}

pub fn classify(q: f64, norm2: f64) -> CausalCharacter {
    if q.abs() <= NULL_BAND * norm2 {
        CausalCharacter::Null
    } else if q < 0.0 {
        CausalCharacter::Timelike
    } else {
        CausalCharacter::Spacelike
    }
}

/// Causal character of `v` at `x`, together with g_x(v, v).
pub fn causal_character(g: &MetricField, x: &[f64], v: &[f64]) -> Result<(CausalCharacter, f64)> {
    let norm2: f64 = v.iter().map(|c| c * c).sum();
    if norm2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let q = g.quad(x, v);
    Ok((classify(q, norm2), q))
}

/// A g-orthonormal frame (e_0 future timelike unit, e_1.. spacelike unit)
/// built by Gram–Schmidt from the time orientation and coordinate axes.
pub fn orthonormal_frame(m: &Mat, orientation: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = m.dim();
    let tt = m.quad(orientation);
    if !(tt < 0.0) {
        return Err(Error::SignatureLoss { point: Vec::new() });
    }
    let e0: Vec<f64> = orientation.iter().map(|c| c / (-tt).sqrt()).collect();
    let mut frame = vec![e0];
    for k in 0..n {
        if frame.len() == n {
            break;
        }
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for (i, e) in frame.iter().enumerate() {
            let sign = if i == 0 { -1.0 } else { 1.0 };
            let c = m.form(&v, e) * sign;
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= c * ei;
            }
        }
        let q = m.quad(&v);
        let scale: f64 = v.iter().map(|c| c * c).sum();
        if q > 1e-10 * scale.max(1e-300) {
            frame.push(v.iter().map(|c| c / q.sqrt()).collect());
        }
    }
    if frame.len() != n {
        return Err(Error::SignatureLoss { point: Vec::new() });
    }
    Ok(frame)
}

/// Stratified audit-vector composition per point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuditConfig {
    pub timelike: usize,
    pub near_null: usize,
    /// How many of the near-null vectors are exactly null.
    pub exact_null: usize,
    pub spacelike: usize,
    pub near_null_band: f64,
    pub seed: u64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self { timelike: 8, near_null: 8, exact_null: 2, spacelike: 16, near_null_band: 1e-3, seed: 7 }
    }
}

/// Audit points with their (Euclidean-normalized) audit vectors.
#[derive(Clone, Debug)]
pub struct AuditSet {
    pub points: Vec<Vec<f64>>,
    pub vectors: Vec<Vec<Vec<f64>>>,
}

impl AuditSet {
    pub fn len(&self) -> usize {
        self.vectors.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn random_unit(rng: &mut ChaCha8Rng, frame: &[Vec<f64>]) -> Vec<f64> {
    let n = frame[0].len();
    loop {
        let c: Vec<f64> = (1..frame.len()).map(|_| rng.sample(StandardNormal)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        let mut w = vec![0.0; n];
        for (ci, e) in c.iter().zip(&frame[1..]) {
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi += ci / norm * ei;
            }
        }
        return w;
    }
}

fn combine(a: f64, e0: &[f64], b: f64, w: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = e0.iter().zip(w).map(|(x, y)| a * x + b * y).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / norm).collect()
}

/// Audit vectors at a point, stratified with respect to the metric `m`.
pub fn audit_vectors(m: &Mat, orientation: &[f64], cfg: &AuditConfig, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<f64>>> {
    let frame = orthonormal_frame(m, orientation)?;
    let e0 = &frame[0];
    let mut out = Vec::with_capacity(cfg.timelike + cfg.near_null + cfg.spacelike);
    for _ in 0..cfg.timelike {
        let s: f64 = rng.gen_range(0.0..2.5);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let w = random_unit(rng, &frame);
        out.push(combine(sign * s.cosh(), e0, s.sinh(), &w));
    }
    for k in 0..cfg.near_null {
        let w = random_unit(rng, &frame);
        let d = if k < cfg.exact_null {
            0.0
        } else {
            rng.gen_range(-cfg.near_null_band..cfg.near_null_band)
        };
        out.push(combine(1.0, e0, 1.0 + d, &w));
    }
    for _ in 0..cfg.spacelike {
        let s: f64 = rng.gen_range(-2.5..2.5);
        let w = random_unit(rng, &frame);
        out.push(combine(s.sinh(), e0, s.cosh(), &w));
    }
    Ok(out)
}

/// Uniform random points in a coordinate box.
pub fn random_points(bounds: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| bounds.iter().map(|&(lo, hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo }).collect())
        .collect()
}

/// Builds a fixed audit set: at each point, vectors stratified w.r.t. `g`.
pub fn build_audit_set(g: &MetricField, points: &[Vec<f64>], cfg: &AuditConfig) -> Result<AuditSet> {
    let vectors = points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ i as u64);
            audit_vectors(&g.at(x), g.orientation(), cfg, &mut rng).map_err(|e| match e {
                Error::SignatureLoss { .. } => Error::SignatureLoss { point: x.clone() },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AuditSet { points: points.to_vec(), vectors })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    pub holds: bool,
    /// min of −g2(X,X) over audited g1-causal X.
    pub min_margin: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub causal_samples: usize,
    pub total_samples: usize,
}

/// Audits the strict cone inclusion g1 ≺ g2 on a fixed audit set.
pub fn cones_narrower_on(g1: &MetricField, g2: &MetricField, set: &AuditSet) -> ConeReport {
    let per_point: Vec<(f64, Option<usize>, usize)> = set
        .points
        .par_iter()
        .zip(&set.vectors)
        .map(|(x, vs)| {
            let m1 = g1.at(x);
            let m2 = g2.at(x);
            let mut worst = f64::INFINITY;
            let mut arg = None;
            let mut causal = 0;
            for (k, v) in vs.iter().enumerate() {
                let norm2: f64 = v.iter().map(|c| c * c).sum();
                if !classify(m1.quad(v), norm2).is_causal() {
                    continue;
                }
                causal += 1;
                let margin = -m2.quad(v);
                if margin < worst {
                    worst = margin;
                    arg = Some(k);
                }
            }
            (worst, arg, causal)
        })
        .collect();
    let mut report = ConeReport {
        holds: false,
        min_margin: f64::INFINITY,
        witness: None,
        causal_samples: 0,
        total_samples: set.len(),
    };
    for (i, (worst, arg, causal)) in per_point.into_iter().enumerate() {
        report.causal_samples += causal;
        if worst < report.min_margin {
            report.min_margin = worst;
            report.witness = arg.map(|k| (set.points[i].clone(), set.vectors[i][k].clone()));
        }
    }
    report.holds = report.causal_samples > 0 && report.min_margin > NESTING_MARGIN;
    report
}

/// Audits g1 ≺ g2 at the given points with vectors stratified w.r.t. g1.
pub fn cones_narrower(g1: &MetricField, g2: &MetricField, points: &[Vec<f64>], cfg: &AuditConfig) -> Result<ConeReport> {
    let set = build_audit_set(g1, points, cfg)?;
    Ok(cones_narrower_on(g1, g2, &set))
}
