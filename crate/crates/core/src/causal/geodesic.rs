use serde::{Deserialize, Serialize};

use crate::curvature::{leaf_normal, Hypersurface};
use crate::error::{Error, Result};
use crate::metric::{Kink, MetricField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeodesicStatus {
    ReachedT,
    LeftDomain,
    HitSingularity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeodesicOptions {
    /// Nominal RK4 step in the affine parameter.
    pub step: f64,
    /// Coordinate box; leaving it stops the integration.
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Integration halts once the model's singular scale drops below this.
    pub singular_floor: f64,
    /// Kink crossings are located to this accuracy in the kink coordinate.
    pub event_tol: f64,
    /// Steps shrink proportionally once the singular scale is below this.
    pub scale_ref: f64,
}

impl Default for GeodesicOptions {
    fn default() -> Self {
        Self { step: 1e-3, bounds: None, singular_floor: 1e-4, event_tol: 1e-10, scale_ref: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSample {
    pub s: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct GeodesicResult {
    pub samples: Vec<GeodesicSample>,
    pub metric_tag: String,
    pub status: GeodesicStatus,
    pub unit_speed: bool,
    /// max |g(γ̇,γ̇) − g(γ̇₀,γ̇₀)| over the samples.
    pub energy_drift: f64,
    /// Affine parameters at which a kink was crossed.
    pub crossings: Vec<f64>,
}

impl GeodesicResult {
    pub fn last(&self) -> &GeodesicSample {
        self.samples.last().expect("a geodesic has at least its initial sample")
    }

    pub fn final_parameter(&self) -> f64 {
        self.last().s
    }

    /// Position and velocity at parameter `s` by cubic Hermite interpolation
    /// between the bracketing samples.
    pub fn state_at(&self, s: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let first = &self.samples[0];
        if s < first.s || s > self.final_parameter() + 1e-12 {
            return None;
        }
        let j = self.samples.partition_point(|p| p.s < s).clamp(1, self.samples.len() - 1);
        let (a, b) = (&self.samples[j - 1], &self.samples[j]);
        let h = b.s - a.s;
        if h <= 0.0 {
            return Some((b.x.clone(), b.v.clone()));
        }
        let u = ((s - a.s) / h).clamp(0.0, 1.0);
        let (h00, h10, h01, h11) = (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        );
        let (d00, d10, d01, d11) = (6.0 * u * u - 6.0 * u, 3.0 * u * u - 4.0 * u + 1.0, -6.0 * u * u + 6.0 * u, 3.0 * u * u - 2.0 * u);
        let x = (0..a.x.len())
            .map(|i| h00 * a.x[i] + h10 * h * a.v[i] + h01 * b.x[i] + h11 * h * b.v[i])
            .collect();
        let v = (0..a.x.len())
            .map(|i| (d00 * a.x[i] + d01 * b.x[i]) / h + d10 * a.v[i] + d11 * b.v[i])
            .collect();
        Some((x, v))
    }
}

fn side_of(kink: Option<&Kink>, x: &[f64], v: &[f64]) -> f64 {
    match kink {
        None => 1.0,
        Some(k) => {
            let d = k.signed_distance(x);
            if d.abs() > 1e-12 {
                d.signum()
            } else {
                let dv: f64 = k.normal.iter().zip(v).map(|(a, b)| a * b).sum();
                if dv >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

fn accel(g: &MetricField, x: &[f64], v: &[f64], side: f64) -> Result<Vec<f64>> {
    let n = x.len();
    // RK stages that overshoot the kink keep the one-sided field of the step,
    // extended from the kink
    let gamma = match g.kink() {
        Some(k) if k.signed_distance(x) * side > 0.0 || k.signed_distance(x) == 0.0 => g.christoffel_at(x, side)?,
        Some(k) => {
            let d = k.signed_distance(x);
            let p: Vec<f64> = x.iter().zip(&k.normal).map(|(a, b)| a - d * b).collect();
            g.christoffel_at(&p, side)?
        }
        None => g.christoffel_at(x, side)?,
    };
    Ok((0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += gamma[i * n * n + j * n + k] * v[j] * v[k];
                }
            }
            -s
        })
        .collect())
}

fn rk4(g: &MetricField, x: &[f64], v: &[f64], h: f64, side: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let comb = |a: &[f64], b: &[f64], c: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + c * q).collect() };
    let a1 = accel(g, x, v, side)?;
    let (x2, v2) = (comb(x, v, 0.5 * h), comb(v, &a1, 0.5 * h));
    let a2 = accel(g, &x2, &v2, side)?;
    let (x3, v3) = (comb(x, &v2, 0.5 * h), comb(v, &a2, 0.5 * h));
    let a3 = accel(g, &x3, &v3, side)?;
    let (x4, v4) = (comb(x, &v3, h), comb(v, &a3, h));
    let a4 = accel(g, &x4, &v4, side)?;
    let xn = (0..n).map(|i| x[i] + h / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i])).collect();
    let vn = (0..n).map(|i| v[i] + h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i])).collect();
    Ok((xn, vn))
}

fn inside(bounds: &Option<Vec<(f64, f64)>>, x: &[f64]) -> bool {
    bounds
        .as_ref()
        .is_none_or(|b| b.iter().zip(x).all(|(&(lo, hi), &c)| c >= lo - 1e-12 && c <= hi + 1e-12))
}

/// Integrates the geodesic equation from (x0, v0) up to affine parameter
/// `horizon`. Kink crossings are located by bisection on the step length and
/// the integration restarts on the far side with position and velocity
/// continuous.
pub fn geodesic(metric: &MetricField, x0: &[f64], v0: &[f64], horizon: f64, opts: &GeodesicOptions) -> Result<GeodesicResult> {
    if x0.len() != metric.dim() || v0.len() != metric.dim() {
        return Err(Error::InvalidParam("point and velocity must match the chart dimension".into()));
    }
    if v0.iter().all(|c| *c == 0.0) {
        return Err(Error::ZeroVector);
    }
    if !(horizon >= 0.0) || !(opts.step > 0.0) {
        return Err(Error::InvalidParam("geodesic needs horizon >= 0 and a positive step".into()));
    }
    let kink = metric.kink();
    let e0 = metric.quad(x0, v0);
    let mut out = GeodesicResult {
        samples: vec![GeodesicSample { s: 0.0, x: x0.to_vec(), v: v0.to_vec() }],
        metric_tag: metric.tag().to_string(),
        status: GeodesicStatus::ReachedT,
        unit_speed: (e0 + 1.0).abs() < 1e-12,
        energy_drift: 0.0,
        crossings: Vec::new(),
    };
    if metric.singular_scale(x0) < opts.singular_floor {
        out.status = GeodesicStatus::HitSingularity;
        return Ok(out);
    }
    let (mut s, mut x, mut v) = (0.0, x0.to_vec(), v0.to_vec());
    let min_step = opts.step * 1e-9;
    while s < horizon {
        let scale = metric.singular_scale(&x);
        if scale < opts.singular_floor {
            out.status = GeodesicStatus::HitSingularity;
            break;
        }
        let mut h = opts.step * (scale / opts.scale_ref).min(1.0);
        h = h.min(horizon - s);
        let side = side_of(kink, &x, &v);
        let (mut xn, mut vn) = rk4(metric, &x, &v, h, side)?;
        // a step that jumps past the singular locus is retried shorter
        let mut retries = 0;
        while !(metric.singular_scale(&xn) > 0.0) || xn.iter().chain(&vn).any(|c| !c.is_finite()) {
            h *= 0.5;
            retries += 1;
            if h < min_step || retries > 60 {
                out.status = GeodesicStatus::HitSingularity;
                break;
            }
            (xn, vn) = rk4(metric, &x, &v, h, side)?;
        }
        if out.status == GeodesicStatus::HitSingularity {
            break;
        }
        if let Some(k) = kink {
            let (d0, d1) = (k.signed_distance(&x), k.signed_distance(&xn));
            if d0 * d1 < 0.0 || (d0 != 0.0 && d1 == 0.0) {
                // bisect until the far-side end of the bracket sits on the kink
                let (mut lo, mut hi) = (0.0, h);
                let mut state = (xn.clone(), vn.clone());
                let mut dh = d1;
                for _ in 0..200 {
                    if dh.abs() <= opts.event_tol || hi - lo < min_step {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    let cand = rk4(metric, &x, &v, mid, side)?;
                    let dm = k.signed_distance(&cand.0);
                    if dm * d0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                        dh = dm;
                        state = cand;
                    }
                }
                h = hi;
                (xn, vn) = state;
                out.crossings.push(s + h);
            }
        }
        s += h;
        x = xn;
        v = vn;
        if !inside(&opts.bounds, &x) {
            out.status = GeodesicStatus::LeftDomain;
        }
        out.energy_drift = out.energy_drift.max((metric.quad(&x, &v) - e0).abs());
        out.samples.push(GeodesicSample { s, x: x.clone(), v: v.clone() });
        if out.status != GeodesicStatus::ReachedT {
            break;
        }
    }
    Ok(out)
}

/// Point of Σ over `y`, its coordinate tangent frame and future unit normal.
pub fn sigma_frame(metric: &MetricField, sigma: &Hypersurface, y: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>, Vec<f64>)> {
    check_time_axis(metric)?;
    let x = sigma.point(y);
    let h = 1e-6;
    let frame: Vec<Vec<f64>> = (0..y.len())
        .map(|i| {
            let mut yp = y.to_vec();
            let mut ym = y.to_vec();
            yp[i] += h;
            ym[i] -= h;
            let (p, m) = (sigma.point(&yp), sigma.point(&ym));
            p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        })
        .collect();
    let normal = leaf_normal(&metric.at(&x), &frame, metric.orientation())?;
    Ok((x, frame, normal))
}

pub(crate) fn check_time_axis(metric: &MetricField) -> Result<()> {
    let th = metric.time_covector();
    if th[0] != 1.0 || th[1..].iter().any(|c| *c != 0.0) {
        return Err(Error::Domain("hypersurface operations need the chart time function t = x^0".into()));
    }
    Ok(())
}

/// The unit-speed normal geodesic from σ(y), as a full trajectory.
pub fn normal_geodesic(metric: &MetricField, sigma: &Hypersurface, y: &[f64], horizon: f64, opts: &GeodesicOptions) -> Result<GeodesicResult> {
    let (x, _, n) = sigma_frame(metric, sigma, y)?;
    geodesic(metric, &x, &n, horizon, opts)
}

/// exp_Σ⁺(t, σ(y)).
pub fn normal_exponential(metric: &MetricField, sigma: &Hypersurface, y: &[f64], t: f64, opts: &GeodesicOptions) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParam(format!("normal exponential needs t >= 0, got {t}")));
    }
    let r = normal_geodesic(metric, sigma, y, t, opts)?;
    match r.status {
        GeodesicStatus::ReachedT => Ok(r.last().x.clone()),
        st => Err(Error::Domain(format!("normal geodesic stopped ({st:?}) at parameter {}", r.final_parameter()))),
    }
}

/// Endpoint distances between the event-detected integration on `raw` and
/// integrations on each smooth approximant.
pub fn proxy_endpoint_gaps(
    raw: &MetricField,
    proxies: &[MetricField],
    x0: &[f64],
    v0: &[f64],
    horizon: f64,
    opts: &GeodesicOptions,
) -> Result<Vec<f64>> {
    let reference = geodesic(raw, x0, v0, horizon, opts)?;
    let end = reference.last().x.clone();
    proxies
        .iter()
        .map(|g| {
            let r = geodesic(g, x0, v0, horizon, opts)?;
            let (x, _) = r
                .state_at(reference.final_parameter())
                .ok_or_else(|| Error::Domain("proxy geodesic stopped early".into()))?;
            Ok(x.iter().zip(&end).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{catalog, ModelParams};

    #[test]
    fn minkowski_lines_are_straight() {
        let g = MetricField::minkowski(4);
        let x0 = [0.1, -0.2, 0.3, 0.0];
        let v0 = [1.3, 0.4, -0.2, 0.7];
        let r = geodesic(&g, &x0, &v0, 2.0, &GeodesicOptions::default()).unwrap();
        assert_eq!(r.status, GeodesicStatus::ReachedT);
        for p in &r.samples {
            for i in 0..4 {
                assert!((p.x[i] - x0[i] - p.s * v0[i]).abs() < 1e-12);
                assert!((p.v[i] - v0[i]).abs() < 1e-12);
            }
        }
        assert!((r.final_parameter() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn comoving_worldlines_conserve_energy() {
        let m = catalog::catalog("grw_smooth", &ModelParams::new()).unwrap();
        let r = geodesic(&m.metric, &[-0.5, 0.2, 0.0, 0.1], &[1.0, 0.0, 0.0, 0.0], 1.0, &GeodesicOptions::default()).unwrap();
        assert!(r.unit_speed);
        assert!(r.energy_drift < 1e-12);
        let x = &r.last().x;
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.2).abs() < 1e-14);
    }

    #[test]
    fn boosted_cosh_geodesic_energy_and_momentum() {
        let m = catalog::catalog("grw_smooth", &ModelParams::new()).unwrap();
        // unit timelike at t = 0 (a = 1) with spatial rapidity 0.8
        let v0 = [0.8f64.cosh(), 0.8f64.sinh(), 0.0, 0.0];
        let r = geodesic(&m.metric, &[0.0; 4], &v0, 1.0, &GeodesicOptions::default()).unwrap();
        assert!(r.energy_drift < 1e-6, "{}", r.energy_drift);
        // a² ẋ is conserved along GRW geodesics
        for p in &r.samples {
            let a = p.x[0].cosh();
            assert!((a * a * p.v[1] - 0.8f64.sinh()).abs() < 1e-9);
        }
    }

    #[test]
    fn two_slope_kink_crossing() {
        let m = catalog::catalog("grw_two_slope", &ModelParams::new()).unwrap();
        let v0 = [0.5f64.cosh(), 0.5f64.sinh() / 1.1, 0.0, 0.0];
        let x0 = [-0.2, 0.0, 0.0, 0.0];
        let r = geodesic(&m.metric, &x0, &v0, 0.5, &GeodesicOptions::default()).unwrap();
        assert_eq!(r.crossings.len(), 1);
        let k = r.samples.iter().position(|p| p.s == r.crossings[0]).unwrap();
        assert!(r.samples[k].x[0].abs() <= 1e-10, "{:?}", r.samples[k].x);
        // velocity continuous: the neighbouring samples straddle the kink smoothly
        let (a, b) = (&r.samples[k - 1], &r.samples[k + 1]);
        for i in 0..4 {
            assert!((b.v[i] - a.v[i]).abs() < 0.01);
        }
        assert!(r.energy_drift < 1e-6, "{}", r.energy_drift);
        // conserved a²ẋ across the kink
        let p0 = 1.1f64.powi(2) * v0[1];
        for p in &r.samples {
            let a = 1.0 - if p.x[0] < 0.0 || (p.x[0] == 0.0 && p.v[0] < 0.0) { 0.5 } else { 1.0 } * p.x[0];
            assert!((a * a * p.v[1] - p0).abs() < 1e-8);
        }
    }

    #[test]
    fn comoving_collapse_hits_singularity() {
        let m = catalog::catalog("grw_two_slope", &ModelParams::new()).unwrap();
        let sigma = Hypersurface::slice(-0.5, vec![(-1.0, 1.0); 3]);
        let r = normal_geodesic(&m.metric, &sigma, &[0.1, 0.0, 0.0], 5.0, &GeodesicOptions::default()).unwrap();
        assert_eq!(r.status, GeodesicStatus::HitSingularity);
        // proper time along comoving lines is dt: |t0| + 1/m2 minus the floor
        assert!((r.final_parameter() - 1.5).abs() < 2e-4, "{}", r.final_parameter());
        assert_eq!(r.crossings.len(), 1);
    }

    #[test]
    fn normal_exponential_cases() {
        let opts = GeodesicOptions::default();
        let sigma = Hypersurface::slice(0.0, vec![(-1.0, 1.0); 3]);
        let mink = MetricField::minkowski(4);
        let x = normal_exponential(&mink, &sigma, &[0.2, 0.3, -0.1], 0.7, &opts).unwrap();
        assert!((x[0] - 0.7).abs() < 1e-12 && (x[1] - 0.2).abs() < 1e-12);
        let eds = catalog::catalog("grw_eds_collapse", &ModelParams::new()).unwrap();
        let x = normal_exponential(&eds.metric, &sigma, &[0.2, 0.3, -0.1], 0.6, &opts).unwrap();
        assert!((x[0] - 0.6).abs() < 1e-10 && (x[2] - 0.3).abs() < 1e-12);
        assert!(normal_exponential(&eds.metric, &sigma, &[0.0; 3], 1.5, &opts).is_err());
        // tilted hyperplane in Minkowski: the normal is the boosted vector
        let tilt = Hypersurface::graph(std::sync::Arc::new(|y: &[f64]| 0.3 * y[0]), vec![(-1.0, 1.0); 3], "tilt");
        let (_, _, n) = sigma_frame(&mink, &tilt, &[0.0; 3]).unwrap();
        let c = 1.0 / (1.0f64 - 0.09).sqrt();
        assert!((n[0] - c).abs() < 1e-9 && (n[1] - 0.3 * c).abs() < 1e-9);
    }

    #[test]
    fn hermite_state_matches_samples() {
        let m = catalog::catalog("grw_smooth", &ModelParams::new()).unwrap();
        let v0 = [0.5f64.cosh(), 0.5f64.sinh(), 0.0, 0.0];
        let fine = geodesic(&m.metric, &[0.0; 4], &v0, 1.0, &GeodesicOptions { step: 1e-4, ..Default::default() }).unwrap();
        let coarse = geodesic(&m.metric, &[0.0; 4], &v0, 1.0, &GeodesicOptions { step: 2e-2, ..Default::default() }).unwrap();
        let (x, _) = coarse.state_at(0.537).unwrap();
        let (y, _) = fine.state_at(0.537).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-7));
        assert!(coarse.state_at(1.5).is_none());
    }
}
