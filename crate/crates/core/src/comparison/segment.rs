use serde::{Deserialize, Serialize};

use super::constants::{const_ca_minus, ComparisonParams};
use crate::causal::{cut_function, omega_integral, CutConfig, OmegaConfig};
use crate::curvature::Hypersurface;
use crate::error::{Error, Result};
use crate::metric::MetricField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentConfig {
    pub omega: OmegaConfig,
    /// Points per axis of B for the regularity audit.
    pub audit_points: usize,
    /// Relative slack granted to the right-hand side.
    pub tolerance: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self { omega: OmegaConfig::default(), audit_points: 3, tolerance: 0.02 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SegmentReport {
    /// inf over B of ∫₀^{min(T,s⁺)} f(exp(t, x)) dt.
    pub lhs: f64,
    /// (1/(C^{A−} σ(B))) ∫_Ω f dvol.
    pub rhs: f64,
    pub ca_minus: f64,
    pub area: f64,
    pub omega_integral: f64,
    /// rhs − lhs.
    pub slack: f64,
    /// (y, c⁺(y)) on the audit grid.
    pub cut_values: Vec<(Vec<f64>, f64)>,
    /// Audit points with c⁺ within two bisection tolerances of T + η.
    pub near_cut: Vec<Vec<f64>>,
    pub pass: bool,
}

fn audit_grid(b: &[(f64, f64)], m: usize) -> Vec<Vec<f64>> {
    let m = m.max(1);
    let coord = |(lo, hi): (f64, f64), i: usize| if m == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (m - 1) as f64 };
    let mut out = vec![Vec::new()];
    for &ax in b {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..m).map(move |i| {
                    let mut q = p.clone();
                    q.push(coord(ax, i));
                    q
                })
            })
            .collect();
    }
    out
}

/// Segment-type inequality for the box B ⊂ Σ: both sides of
/// inf_B ∫ f(exp(t,x)) dt ≤ (1/(C^{A−}σ(B))) ∫_{Ω_T⁺(B)} f dvol, after
/// auditing c⁺ ≥ T + η on B.
pub fn segment_check(
    metric: &MetricField,
    sigma: &Hypersurface,
    b: &[(f64, f64)],
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    params: &ComparisonParams,
    cfg: &SegmentConfig,
) -> Result<SegmentReport> {
    let ca = const_ca_minus(params)?;
    if !(params.t > 0.0) {
        return Err(Error::Domain(format!("T must be positive, got {}", params.t)));
    }
    let need = params.t + params.eta;
    let cut_cfg: &CutConfig = &cfg.omega.cut;
    let band = 2.0 * cut_cfg.t_tol * need;
    let mut cut_values = Vec::new();
    let mut near_cut = Vec::new();
    for y in audit_grid(b, cfg.audit_points) {
        let c = cut_function(metric, sigma, &y, need + band, cut_cfg)?.value;
        if c < need - cut_cfg.t_tol * (need + band) {
            return Err(Error::Domain(format!("B leaves the regular set: c⁺({y:?}) = {c} < T + η = {need}")));
        }
        if c < need + band {
            near_cut.push(y.clone());
        }
        cut_values.push((y, c));
    }
    let omega = omega_integral(metric, sigma, b, params.t, f, &cfg.omega)?;
    let lhs = omega.line_inf();
    let rhs = omega.value / (ca * omega.area);
    Ok(SegmentReport {
        lhs,
        rhs,
        ca_minus: ca,
        area: omega.area,
        omega_integral: omega.value,
        slack: rhs - lhs,
        cut_values,
        near_cut,
        pass: lhs <= rhs * (1.0 + cfg.tolerance) + 1e-12,
    })
}
