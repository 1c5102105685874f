//! Lipschitz model spacetimes with closed-form facts.
//!
//! Every stored fact names the check in `tools/catalog_oracle.py` that
//! derives it symbolically.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::causal::{audit_vectors, AuditConfig};
use super::{Kink, Mat, MetricField};
use crate::error::{Error, Result};
use crate::grid::Grid;

pub const MODEL_NAMES: [&str; 5] = [
    "minkowski",
    "grw_smooth",
    "grw_eds_collapse",
    "grw_two_slope",
    "pp_impulsive_rosen",
];

/// Model parameter value: numbers, or a name (e.g. the scale factor shape).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModelParams(pub BTreeMap<String, ParamValue>);

impl ModelParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, v: f64) -> Self {
        self.0.insert(key.into(), ParamValue::Num(v));
        self
    }

    pub fn with_text(mut self, key: &str, v: &str) -> Self {
        self.0.insert(key.into(), ParamValue::Text(v.into()));
        self
    }

    pub fn num(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Num(v)) => Ok(*v),
            Some(ParamValue::Text(_)) => Err(Error::InvalidParam(format!("`{key}` must be a number"))),
        }
    }

    pub fn text(&self, key: &str, default: &str) -> Result<String> {
        match self.0.get(key) {
            None => Ok(default.into()),
            Some(ParamValue::Text(s)) => Ok(s.clone()),
            Some(ParamValue::Num(_)) => Err(Error::InvalidParam(format!("`{key}` must be a name"))),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        let n = self.num("n", 4.0)?;
        if n.fract() != 0.0 || !(2.0..=5.0).contains(&n) {
            return Err(Error::InvalidParam(format!("n must be an integer in 2..=5, got {n}")));
        }
        Ok(n as usize)
    }
}

/// A closed-form fact together with the symbolic check that derives it.
#[derive(Clone)]
pub struct Known<T> {
    pub value: T,
    pub provenance: &'static str,
}

fn known<T>(value: T, provenance: &'static str) -> Option<Known<T>> {
    Some(Known { value, provenance })
}

pub type TensorFn = Arc<dyn Fn(&[f64], f64) -> Mat + Send + Sync>;
pub type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Single-layer part of the distributional Ricci tensor: `coefficient ·
/// δ(θ·x − level)` on the kink hypersurface.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaPart {
    pub kink: Kink,
    pub coefficient: Mat,
}

#[derive(Clone, Default)]
pub struct KnownFacts {
    /// Ricci tensor on the smooth pieces (side hint ±1 on the kink).
    pub ricci: Option<Known<TensorFn>>,
    /// Christoffel symbols Γ^i_{jk} on the smooth pieces.
    pub christoffel: Option<Known<Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>>>,
    pub delta: Option<Known<DeltaPart>>,
    /// Mean curvature of the slices {t = const} for the future normal.
    pub slice_mean_curvature: Option<Known<TimeFn>>,
    pub singularity_time: Option<Known<f64>>,
    /// Scale factor a(t) of warped-product models.
    pub scale_factor: Option<Known<TimeFn>>,
    /// Closed-form time separation τ(p, q).
    pub tau: Option<Known<PairFn>>,
    /// Closed-form τ_Σ(p) for Σ = {t = t₀}: arguments (p, t₀).
    pub tau_sigma_slice: Option<Known<Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>>>,
}

#[derive(Clone)]
pub struct SpacetimeModel {
    pub name: String,
    pub dim: usize,
    pub metric: MetricField,
    pub known: KnownFacts,
    pub params: ModelParams,
    /// Coordinate axes the metric depends on; all others are homogeneous.
    pub dependence_axes: Vec<usize>,
}

impl std::fmt::Debug for SpacetimeModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpacetimeModel")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("params", &self.params)
            .finish()
    }
}

/// Result of the distributional strong-energy-condition certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct SecCertificate {
    /// min over audited g-unit timelike X of Ric(X,X) − (n−1)ρ on smooth pieces.
    pub smooth_min: f64,
    /// min over audited g-unit timelike X of the delta part D(X,X) (∞ if none).
    pub delta_min: f64,
    pub holds: bool,
}

impl SpacetimeModel {
    /// Grid whose non-dependence axes are homogeneous.
    pub fn grid(&self, bounds: &[(f64, f64)], resolution: usize) -> Result<Grid> {
        let res: Vec<usize> = (0..self.dim)
            .map(|a| if self.dependence_axes.contains(&a) { resolution } else { 2 })
            .collect();
        let homogeneous: Vec<usize> = (0..self.dim).filter(|a| !self.dependence_axes.contains(a)).collect();
        Grid::new(bounds, &res)?.with_homogeneous_axes(&homogeneous)
    }

    pub fn ricci_exact(&self, x: &[f64], side: f64) -> Result<Mat> {
        self.known
            .ricci
            .as_ref()
            .map(|k| (k.value)(x, side))
            .ok_or_else(|| Error::MissingDecomposition(self.name.clone()))
    }

    /// Certifies Ric ≥ (n−1)ρ on unit timelike directions in the
    /// distributional sense: smooth-piece scan at `points` (both one-sided
    /// limits) plus nonnegativity of the contracted delta part on the kink.
    pub fn sec_certificate(&self, rho: f64, points: &[Vec<f64>], seed: u64) -> Result<SecCertificate> {
        let ric = self
            .known
            .ricci
            .as_ref()
            .ok_or_else(|| Error::MissingDecomposition(self.name.clone()))?;
        let cfg = AuditConfig { timelike: 16, near_null: 0, exact_null: 0, spacelike: 0, seed, ..Default::default() };
        let n = self.dim as f64;
        let unit = |m: &Mat, v: &[f64]| -> Vec<f64> {
            let q = m.quad(v);
            v.iter().map(|c| c / (-q).sqrt()).collect()
        };
        let mut smooth_min = f64::INFINITY;
        for (i, x) in points.iter().enumerate() {
            let m = self.metric.at(x);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
            let mut vs = audit_vectors(&m, self.metric.orientation(), &cfg, &mut rng)?;
            vs.push(self.metric.orientation().to_vec());
            for side in [-1.0, 1.0] {
                let r = (ric.value)(x, side);
                for v in &vs {
                    let u = unit(&m, v);
                    smooth_min = smooth_min.min(r.quad(&u) - (n - 1.0) * rho);
                }
            }
        }
        let mut delta_min = f64::INFINITY;
        if let Some(d) = &self.known.delta {
            let kink = &d.value.kink;
            for (i, x) in points.iter().enumerate() {
                // project onto the kink along the kink normal
                let s = kink.signed_distance(x);
                let nn: f64 = kink.normal.iter().map(|c| c * c).sum();
                let y: Vec<f64> = x.iter().zip(&kink.normal).map(|(xi, ni)| xi - s * ni / nn).collect();
                let m = self.metric.at(&y);
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1) ^ i as u64);
                let mut vs = audit_vectors(&m, self.metric.orientation(), &cfg, &mut rng)?;
                vs.push(self.metric.orientation().to_vec());
                for v in &vs {
                    delta_min = delta_min.min(d.value.coefficient.quad(&unit(&m, v)));
                }
            }
        }
        Ok(SecCertificate {
            smooth_min,
            delta_min,
            holds: smooth_min >= -1e-10 && delta_min >= 0.0,
        })
    }
}

pub fn catalog(name: &str, params: &ModelParams) -> Result<SpacetimeModel> {
    match name {
        "minkowski" => minkowski(params),
        "grw_smooth" => grw_smooth(params),
        "grw_eds_collapse" => grw_eds(params),
        "grw_two_slope" => grw_two_slope(params),
        "pp_impulsive_rosen" => pp_rosen(params),
        other => Err(Error::UnknownModel(other.into())),
    }
}

/// One-line description per catalog entry.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "minkowski" => "flat space -dt^2 + |dx|^2; params: n",
        "grw_smooth" => "-dt^2 + a(t)^2 |dx|^2 with a in {cosh, exp}; params: n, scale",
        "grw_eds_collapse" => "a(t) = (t_s - t)^(2/3), collapsing dust; params: n, t_s",
        "grw_two_slope" => "a(t) = 1 - m1 t (t<=0), 1 - m2 t (t>=0), Lipschitz kink at t=0; params: n, m1, m2",
        "pp_impulsive_rosen" => "-2 du dv + (1+A u+)^2 dx^2 + (1-A u+)^2 dy^2, impulsive wave at u=0; params: A",
        _ => return None,
    })
}

type Scalar1 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Warped product −dt² + a(t)²|dx|² from a(t), ȧ(t, side), ä(t, side).
fn grw(
    name: &str,
    n: usize,
    params: &ModelParams,
    a: Scalar1,
    ad: Scalar1,
    add: Scalar1,
) -> SpacetimeModel {
    let (a1, a2) = (a.clone(), a.clone());
    let metric = MetricField::analytic(
        n,
        name,
        Arc::new(move |x: &[f64]| {
            let s = a1(x[0], 1.0);
            let mut d = vec![s * s; n];
            d[0] = -1.0;
            Mat::diag(&d)
        }),
    )
    .with_derivatives({
        let (a, ad) = (a.clone(), ad.clone());
        Arc::new(move |x: &[f64], side: f64| {
            let mut out = vec![Mat::zeros(n); n];
            let v = 2.0 * a(x[0], side) * ad(x[0], side);
            for i in 1..n {
                out[0][(i, i)] = v;
            }
            out
        })
    })
    .with_singular_scale(Arc::new(move |x: &[f64]| a2(x[0], 1.0)));

    let ricci: TensorFn = {
        let (a, ad, add) = (a.clone(), ad.clone(), add.clone());
        Arc::new(move |x: &[f64], side: f64| {
            let (s, sd, sdd) = (a(x[0], side), ad(x[0], side), add(x[0], side));
            let mut d = vec![s * sdd + (n as f64 - 2.0) * sd * sd; n];
            d[0] = -(n as f64 - 1.0) * sdd / s;
            Mat::diag(&d)
        })
    };
    let christoffel = {
        let (a, ad) = (a.clone(), ad.clone());
        Arc::new(move |x: &[f64], side: f64| {
            let (s, sd) = (a(x[0], side), ad(x[0], side));
            let mut g = vec![0.0; n * n * n];
            for i in 1..n {
                g[i * n + i] = s * sd;
                g[i * n * n + i] = sd / s;
                g[i * n * n + i * n] = sd / s;
            }
            g
        }) as Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>
    };
    let h: TimeFn = {
        let (a, ad) = (a.clone(), ad.clone());
        Arc::new(move |t: f64| (n as f64 - 1.0) * ad(t, -1.0) / a(t, -1.0))
    };
    let scale: TimeFn = {
        let a = a.clone();
        Arc::new(move |t: f64| a(t, 1.0))
    };
    let tau_sigma = Arc::new(|p: &[f64], t0: f64| (p[0] - t0).max(0.0));
    SpacetimeModel {
        name: name.into(),
        dim: n,
        metric,
        known: KnownFacts {
            ricci: known(ricci, "catalog_oracle.py: grw Ric_tt, grw Ric_xx"),
            christoffel: known(christoffel, "catalog_oracle.py: grw Gamma^t_xx, grw Gamma^x_tx"),
            slice_mean_curvature: known(h, "catalog_oracle.py: eds H / two-slope H(t0) (H = (n-1) a'/a)"),
            scale_factor: known(scale, "definition"),
            tau_sigma_slice: known(tau_sigma, "warped product: L = int sqrt(1 - a^2|x'|^2) dt <= t_p - t0"),
            ..Default::default()
        },
        params: params.clone(),
        dependence_axes: vec![0],
    }
}

fn minkowski(params: &ModelParams) -> Result<SpacetimeModel> {
    let n = params.dim()?;
    let tau: PairFn = Arc::new(|p: &[f64], q: &[f64]| {
        let d: Vec<f64> = q.iter().zip(p).map(|(a, b)| a - b).collect();
        let s = -d[0] * d[0] + d[1..].iter().map(|c| c * c).sum::<f64>();
        if d[0] > 0.0 && s <= 0.0 {
            (-s).sqrt()
        } else {
            0.0
        }
    });
    Ok(SpacetimeModel {
        name: "minkowski".into(),
        dim: n,
        metric: MetricField::minkowski(n),
        known: KnownFacts {
            ricci: known(Arc::new(move |_: &[f64], _| Mat::zeros(n)) as TensorFn, "flat"),
            christoffel: known(
                Arc::new(move |_: &[f64], _| vec![0.0; n * n * n]) as Arc<dyn Fn(&[f64], f64) -> Vec<f64> + Send + Sync>,
                "flat",
            ),
            slice_mean_curvature: known(Arc::new(|_| 0.0) as TimeFn, "flat"),
            tau: known(tau, "flat: straight segments maximize"),
            tau_sigma_slice: known(Arc::new(|p: &[f64], t0: f64| (p[0] - t0).max(0.0)), "flat"),
            ..Default::default()
        },
        params: params.clone(),
        dependence_axes: vec![0],
    })
}

fn grw_smooth(params: &ModelParams) -> Result<SpacetimeModel> {
    let n = params.dim()?;
    let shape = params.text("scale", "cosh")?;
    let (a, ad, add): (Scalar1, Scalar1, Scalar1) = match shape.as_str() {
        "cosh" => (
            Arc::new(|t, _| t.cosh()),
            Arc::new(|t, _| t.sinh()),
            Arc::new(|t, _| t.cosh()),
        ),
        "exp" => (Arc::new(|t, _| t.exp()), Arc::new(|t, _| t.exp()), Arc::new(|t, _| t.exp())),
        other => return Err(Error::InvalidParam(format!("unknown scale factor `{other}` (cosh, exp)"))),
    };
    let mut m = grw("grw_smooth", n, params, a, ad, add);
    m.metric = m.metric.with_tag(format!("grw_smooth[{shape}]"));
    Ok(m)
}

fn grw_eds(params: &ModelParams) -> Result<SpacetimeModel> {
    let n = params.dim()?;
    let ts = params.num("t_s", 1.0)?;
    if !(ts > 0.0) {
        return Err(Error::InvalidParam(format!("t_s must be positive, got {ts}")));
    }
    let a: Scalar1 = Arc::new(move |t, _| if t < ts { (ts - t).powf(2.0 / 3.0) } else { -1.0 });
    let ad: Scalar1 = Arc::new(move |t, _| -(2.0 / 3.0) * (ts - t).powf(-1.0 / 3.0));
    let add: Scalar1 = Arc::new(move |t, _| -(2.0 / 9.0) * (ts - t).powf(-4.0 / 3.0));
    let mut m = grw("grw_eds_collapse", n, params, a, ad, add);
    m.known.singularity_time = known(ts, "a(t_s) = 0");
    m.known.ricci.as_mut().unwrap().provenance = "catalog_oracle.py: eds Ric_tt, eds general-n Ric_xx";
    m.known.slice_mean_curvature.as_mut().unwrap().provenance = "catalog_oracle.py: eds H";
    Ok(m)
}

fn grw_two_slope(params: &ModelParams) -> Result<SpacetimeModel> {
    let n = params.dim()?;
    let m1 = params.num("m1", 0.5)?;
    let m2 = params.num("m2", 1.0)?;
    if !(m1 > 0.0 && m1 <= m2) {
        return Err(Error::InvalidParam(format!("need 0 < m1 <= m2, got m1={m1}, m2={m2}")));
    }
    let slope = move |t: f64, side: f64| if t < 0.0 || (t == 0.0 && side < 0.0) { m1 } else { m2 };
    let a: Scalar1 = Arc::new(move |t, side| 1.0 - slope(t, side) * t);
    let ad: Scalar1 = Arc::new(move |t, side| -slope(t, side));
    let add: Scalar1 = Arc::new(|_, _| 0.0);
    let mut m = grw("grw_two_slope", n, params, a, ad, add);
    let kink = Kink { normal: unit(n, 0), level: 0.0 };
    m.metric = m.metric.with_kink(kink.clone());
    let jump = m2 - m1;
    let mut d = vec![-jump; n];
    d[0] = (n as f64 - 1.0) * jump;
    m.known.delta = known(
        DeltaPart { kink, coefficient: Mat::diag(&d) },
        "catalog_oracle.py: two-slope delta Ric_tt, two-slope delta Ric_xx",
    );
    m.known.singularity_time = known(1.0 / m2, "a(1/m2) = 0");
    m.known.slice_mean_curvature.as_mut().unwrap().provenance = "catalog_oracle.py: two-slope H(t0)";
    Ok(m)
}

fn pp_rosen(params: &ModelParams) -> Result<SpacetimeModel> {
    let n = 4;
    if params.num("n", 4.0)? != 4.0 {
        return Err(Error::InvalidParam("pp_impulsive_rosen is four-dimensional".into()));
    }
    let amp = params.num("A", 0.5)?;
    if !(amp > 0.0 && amp < 2.0) {
        return Err(Error::InvalidParam(format!("A must lie in (0, 2), got {amp}")));
    }
    let on = move |u: f64, side: f64| u > 0.0 || (u == 0.0 && side > 0.0);
    let metric = MetricField::analytic(
        n,
        "pp_impulsive_rosen",
        Arc::new(move |x: &[f64]| {
            let up = x[0].max(0.0);
            let (l, m) = (1.0 + amp * up, 1.0 - amp * up);
            let mut g = Mat::zeros(4);
            g[(0, 1)] = -1.0;
            g[(1, 0)] = -1.0;
            g[(2, 2)] = l * l;
            g[(3, 3)] = m * m;
            g
        }),
    )
    .with_derivatives(Arc::new(move |x: &[f64], side: f64| {
        let mut out = vec![Mat::zeros(4); 4];
        if on(x[0], side) {
            let up = x[0].max(0.0);
            out[0][(2, 2)] = 2.0 * (1.0 + amp * up) * amp;
            out[0][(3, 3)] = -2.0 * (1.0 - amp * up) * amp;
        }
        out
    }))
    .with_time(vec![0.5, 0.5, 0.0, 0.0], vec![1.0, 1.0, 0.0, 0.0])
    .with_kink(Kink { normal: unit(4, 0), level: 0.0 })
    .with_singular_scale(Arc::new(move |x: &[f64]| 1.0 - amp * x[0].max(0.0)));
    let kink = Kink { normal: unit(4, 0), level: 0.0 };
    Ok(SpacetimeModel {
        name: "pp_impulsive_rosen".into(),
        dim: n,
        metric,
        known: KnownFacts {
            ricci: known(
                Arc::new(|_: &[f64], _| Mat::zeros(4)) as TensorFn,
                "catalog_oracle.py: rosen Ric_uu (L'' = M'' = 0 off u=0), rosen other Ricci components vanish",
            ),
            delta: known(
                DeltaPart { kink, coefficient: Mat::zeros(4) },
                "catalog_oracle.py: rosen delta part of Ric_uu",
            ),
            singularity_time: known(1.0 / amp, "M(1/A) = 0 (focal plane, u coordinate)"),
            ..Default::default()
        },
        params: params.clone(),
        dependence_axes: vec![0],
    })
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::causal::random_points;

    fn two_slope(m1: f64, m2: f64) -> SpacetimeModel {
        catalog("grw_two_slope", &ModelParams::new().with("m1", m1).with("m2", m2)).unwrap()
    }

    #[test]
    fn every_name_builds() {
        for name in MODEL_NAMES {
            let m = catalog(name, &ModelParams::new()).unwrap();
            assert_eq!(m.name, name);
            assert!(describe(name).is_some());
            assert!(m.metric.at(&vec![-0.1; m.dim]).is_lorentzian());
        }
        assert!(matches!(catalog("kerr", &ModelParams::new()), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn parameter_ranges() {
        assert!(catalog("grw_two_slope", &ModelParams::new().with("m1", 1.0).with("m2", 0.5)).is_err());
        assert!(catalog("grw_eds_collapse", &ModelParams::new().with("t_s", -1.0)).is_err());
        assert!(catalog("minkowski", &ModelParams::new().with("n", 7.0)).is_err());
        assert!(catalog("grw_smooth", &ModelParams::new().with_text("scale", "sin")).is_err());
    }

    #[test]
    fn two_slope_reference_numbers() {
        let m = two_slope(0.5, 1.0);
        let h = m.known.slice_mean_curvature.as_ref().unwrap();
        assert!(((h.value)(-0.5) + 1.2).abs() < 1e-14);
        let ts = m.known.singularity_time.as_ref().unwrap().value;
        assert_eq!(ts, 1.0);
        assert!((ts - (-0.5) - 1.5).abs() < 1e-15);
        let d = &m.known.delta.as_ref().unwrap().value.coefficient;
        assert!((d[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((d[(1, 1)] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn equal_slopes_have_no_delta() {
        let m = two_slope(1.0, 1.0);
        let d = &m.known.delta.as_ref().unwrap().value.coefficient;
        assert_eq!(d.max_abs(), 0.0);
        let r0 = m.ricci_exact(&[-0.2, 0.0, 0.0, 0.0], 1.0).unwrap();
        let r1 = m.ricci_exact(&[0.2, 0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(r0[(0, 0)], 0.0);
        assert!((r0[(1, 1)] - 2.0).abs() < 1e-14 && (r1[(1, 1)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn two_slope_distributional_sec() {
        let m = two_slope(0.5, 1.0);
        let pts = random_points(&[(-0.5, 0.5), (-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)], 200, 5);
        let cert = m.sec_certificate(0.0, &pts, 1).unwrap();
        assert!(cert.holds, "{cert:?}");
        assert!(cert.smooth_min >= -1e-10);
        // contracted delta is minimized along ∂_t: (n−1)(m2−m1)
        assert!((cert.delta_min - 1.5).abs() < 1e-12);
    }

    #[test]
    fn eds_closed_forms() {
        let m = catalog("grw_eds_collapse", &ModelParams::new()).unwrap();
        let r = m.ricci_exact(&[0.0; 4], 1.0).unwrap();
        assert!((r[(0, 0)] - 2.0 / 3.0).abs() < 1e-14);
        let h = &m.known.slice_mean_curvature.as_ref().unwrap().value;
        assert!((h(0.0) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn rosen_time_orientation() {
        let m = catalog("pp_impulsive_rosen", &ModelParams::new()).unwrap();
        let x = [0.3, 0.0, 0.0, 0.0];
        let g = m.metric.at(&x);
        assert_eq!(g.quad(m.metric.orientation()), -2.0);
        assert!(g.inverse().unwrap().quad(m.metric.time_covector()) < 0.0);
    }
}
