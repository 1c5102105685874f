use std::fmt;
use std::sync::Arc;

use super::mat::MAX_DIM;
use super::Mat;
use crate::error::{Error, Result};
use crate::grid::{fd_partial, sample, FdScheme, Grid, SampledField, TensorRank};

pub type MetricFn = Arc<dyn Fn(&[f64]) -> Mat + Send + Sync>;
/// Exact partial derivatives ∂_k g at a point. The second argument is a side
/// hint (±1) selecting the one-sided derivative on a kink hypersurface.
pub type MetricDerivFn = Arc<dyn Fn(&[f64], f64) -> Vec<Mat> + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A hypersurface {θ·x = level} across which the metric is only Lipschitz.
#[derive(Clone, Debug, PartialEq)]
pub struct Kink {
    pub normal: Vec<f64>,
    pub level: f64,
}

impl Kink {
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.normal.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - self.level
    }
}

#[derive(Clone)]
enum Source {
    Analytic { g: MetricFn, dg: Option<MetricDerivFn> },
    Sampled { g: SampledField, dg: Vec<SampledField> },
}

/// Lorentzian metric on a single chart, signature (−,+,…,+).
///
/// The time orientation is a constant timelike vector and the temporal
/// function is linear, `t(x) = θ·x`. A metric may carry an additive
/// cone shift `λ θ⊗θ` (used by the inner/outer approximants).
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    source: Source,
    shift: f64,
    time_covector: Vec<f64>,
    orientation: Vec<f64>,
    kink: Option<Kink>,
    singular_scale: Option<ScalarFn>,
    lipschitz: Option<Vec<f64>>,
    tag: String,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("tag", &self.tag)
            .field("dim", &self.dim)
            .field("shift", &self.shift)
            .field("sampled", &matches!(self.source, Source::Sampled { .. }))
            .finish()
    }
}

impl MetricField {
    pub fn analytic(dim: usize, tag: impl Into<String>, g: MetricFn) -> Self {
        let mut orientation = vec![0.0; dim];
        orientation[0] = 1.0;
        Self {
            dim,
            source: Source::Analytic { g, dg: None },
            shift: 0.0,
            time_covector: orientation.clone(),
            orientation,
            kink: None,
            singular_scale: None,
            lipschitz: None,
            tag: tag.into(),
        }
    }

    pub fn constant(m: Mat, tag: impl Into<String>) -> Self {
        let n = m.dim();
        Self::analytic(n, tag, Arc::new(move |_| m))
            .with_derivatives(Arc::new(move |_, _| vec![Mat::zeros(n); n]))
    }

    pub fn minkowski(n: usize) -> Self {
        Self::constant(Mat::minkowski(n), "minkowski")
    }

    /// Wraps sampled metric components; derivatives are fourth-order finite
    /// differences of the samples, and both are interpolated multilinearly.
    pub fn sampled(field: SampledField, template: &MetricField, tag: impl Into<String>) -> Result<Self> {
        if field.rank() != TensorRank::BILINEAR {
            return Err(Error::InvalidParam("metric samples must be rank (0,2)".into()));
        }
        let grid = field.grid();
        let scheme = if grid
            .regular_axes()
            .iter()
            .all(|&a| field.valid().hi[a] - field.valid().lo[a] >= 4)
        {
            FdScheme::Central4
        } else {
            FdScheme::Central2
        };
        let dg = (0..grid.dim())
            .map(|a| fd_partial(&field, a, scheme))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: grid.dim(),
            source: Source::Sampled { g: field, dg },
            shift: 0.0,
            time_covector: template.time_covector.clone(),
            orientation: template.orientation.clone(),
            kink: None,
            singular_scale: template.singular_scale.clone(),
            lipschitz: None,
            tag: tag.into(),
        })
    }

    pub fn with_derivatives(mut self, dg: MetricDerivFn) -> Self {
        if let Source::Analytic { dg: d, .. } = &mut self.source {
            *d = Some(dg);
        }
        self
    }

    pub fn with_time(mut self, time_covector: Vec<f64>, orientation: Vec<f64>) -> Self {
        self.time_covector = time_covector;
        self.orientation = orientation;
        self
    }

    pub fn with_kink(mut self, kink: Kink) -> Self {
        self.kink = Some(kink);
        self
    }

    pub fn with_singular_scale(mut self, s: ScalarFn) -> Self {
        self.singular_scale = Some(s);
        self
    }

    pub fn with_lipschitz(mut self, l: Vec<f64>) -> Self {
        self.lipschitz = Some(l);
        self
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = tag.into();
        self
    }

    /// Adds `λ θ⊗θ` to the metric (θ the time covector).
    pub fn shifted(&self, lambda: f64, tag: impl Into<String>) -> Self {
        let mut m = self.clone();
        m.shift += lambda;
        m.tag = tag.into();
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn time_covector(&self) -> &[f64] {
        &self.time_covector
    }

    pub fn orientation(&self) -> &[f64] {
        &self.orientation
    }

    pub fn kink(&self) -> Option<&Kink> {
        self.kink.as_ref()
    }

    pub fn lipschitz(&self) -> Option<&[f64]> {
        self.lipschitz.as_deref()
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.source, Source::Sampled { .. })
    }

    /// The sampled component field (before any cone shift), if sampled.
    pub fn samples(&self) -> Option<&SampledField> {
        match &self.source {
            Source::Sampled { g, .. } => Some(g),
            Source::Analytic { .. } => None,
        }
    }

    pub fn time(&self, x: &[f64]) -> f64 {
        self.time_covector.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Positive inside the domain of regularity; the model's scale factor
    /// for the collapsing catalog models.
    pub fn singular_scale(&self, x: &[f64]) -> f64 {
        self.singular_scale.as_ref().map_or(f64::INFINITY, |s| s(x))
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        self.singular_scale(x) > 0.0
    }

    pub fn at(&self, x: &[f64]) -> Mat {
        let base = match &self.source {
            Source::Analytic { g, .. } => g(x),
            Source::Sampled { g, .. } => {
                let mut buf = [0.0; MAX_DIM * MAX_DIM];
                g.interpolate_into(x, &mut buf);
                Mat::from_slice(self.dim, &buf)
            }
        };
        if self.shift != 0.0 {
            base.add_outer(&self.time_covector, self.shift)
        } else {
            base
        }
    }

    /// Metric and its coordinate partials ∂_k g at `x`. `side` selects the
    /// one-sided derivative on a kink (ignored elsewhere).
    pub fn derivatives(&self, x: &[f64], side: f64) -> (Mat, Vec<Mat>) {
        let g = self.at(x);
        let dg = match &self.source {
            Source::Analytic { dg: Some(d), .. } => d(x, side),
            Source::Analytic { g: f, dg: None } => {
                let h = 1e-5;
                let mut xp = x.to_vec();
                (0..self.dim)
                    .map(|k| {
                        let x0 = x[k];
                        xp[k] = x0 + h;
                        let gp = f(&xp);
                        xp[k] = x0 - h;
                        let gm = f(&xp);
                        xp[k] = x0;
                        (gp - gm).scale(0.5 / h)
                    })
                    .collect()
            }
            Source::Sampled { dg, .. } => dg
                .iter()
                .map(|d| {
                    let mut buf = [0.0; MAX_DIM * MAX_DIM];
                    d.interpolate_into(x, &mut buf);
                    Mat::from_slice(self.dim, &buf)
                })
                .collect(),
        };
        (g, dg)
    }

    pub fn inverse_at(&self, x: &[f64]) -> Result<Mat> {
        self.at(x).inverse()
    }

    /// Christoffel symbols Γ^i_{jk}, stored at `i*n*n + j*n + k`.
    pub fn christoffel_at(&self, x: &[f64], side: f64) -> Result<Vec<f64>> {
        let (g, dg) = self.derivatives(x, side);
        let ginv = g.inverse()?;
        Ok(christoffel_from(&ginv, &dg))
    }

    pub fn form(&self, x: &[f64], v: &[f64], w: &[f64]) -> f64 {
        self.at(x).form(v, w)
    }

    pub fn quad(&self, x: &[f64], v: &[f64]) -> f64 {
        // hot path of every length functional: no intermediate Mat copies
        let q = match &self.source {
            Source::Analytic { g, .. } => g(x).quad(v),
            Source::Sampled { g, .. } => {
                let n = self.dim;
                let mut buf = [0.0; MAX_DIM * MAX_DIM];
                g.interpolate_into(x, &mut buf);
                let mut s = 0.0;
                for i in 0..n {
                    let row: f64 = (0..n).map(|j| buf[i * n + j] * v[j]).sum();
                    s += v[i] * row;
                }
                s
            }
        };
        if self.shift != 0.0 {
            let c: f64 = self.time_covector.iter().zip(v).map(|(a, b)| a * b).sum();
            q + self.shift * c * c
        } else {
            q
        }
    }

    /// Samples the metric components on `grid`.
    pub fn sample_on(&self, grid: &Grid) -> Result<SampledField> {
        sample(grid, TensorRank::BILINEAR, true, |x, out| self.at(x).write_to(out))
    }
}

/// Γ^i_{jk} = ½ g^{il}(∂_j g_{lk} + ∂_k g_{jl} − ∂_l g_{jk}).
pub fn christoffel_from(ginv: &Mat, dg: &[Mat]) -> Vec<f64> {
    let n = ginv.dim();
    let mut lowered = vec![0.0; n * n * n];
    for l in 0..n {
        for j in 0..n {
            for k in j..n {
                let v = 0.5 * (dg[j][(l, k)] + dg[k][(j, l)] - dg[l][(j, k)]);
                lowered[l * n * n + j * n + k] = v;
                lowered[l * n * n + k * n + j] = v;
            }
        }
    }
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[(i, l)] * lowered[l * n * n + j * n + k];
                }
                gamma[i * n * n + j * n + k] = s;
                gamma[i * n * n + k * n + j] = s;
            }
        }
    }
    gamma
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grw_exp() -> MetricField {
        MetricField::analytic(
            4,
            "grw_exp",
            Arc::new(|x: &[f64]| {
                let a2 = (2.0 * x[0]).exp();
                Mat::diag(&[-1.0, a2, a2, a2])
            }),
        )
    }

    #[test]
    fn christoffel_of_exponential_grw() {
        let g = grw_exp();
        let t = 0.3;
        let gam = g.christoffel_at(&[t, 0.0, 0.0, 0.0], 1.0).unwrap();
        let n = 4;
        // Γ^t_xx = a ȧ = e^{2t}, Γ^x_tx = ȧ/a = 1
        assert!((gam[0 * n * n + 1 * n + 1] - (2.0 * t).exp()).abs() < 1e-8);
        assert!((gam[1 * n * n + 0 * n + 1] - 1.0).abs() < 1e-8);
        assert!((gam[1 * n * n + 1 * n + 0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn shift_adds_outer_product() {
        let g = MetricField::minkowski(3).shifted(0.25, "inner");
        let m = g.at(&[0.0, 0.0, 0.0]);
        assert_eq!(m[(0, 0)], -0.75);
        assert_eq!(m[(1, 1)], 1.0);
    }

    #[test]
    fn sampled_metric_reproduces_analytic() {
        let g = grw_exp();
        let grid = Grid::new(&[(-0.5, 0.5), (0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], &[201, 2, 2, 2])
            .unwrap()
            .with_homogeneous_axes(&[1, 2, 3])
            .unwrap();
        let s = MetricField::sampled(g.sample_on(&grid).unwrap(), &g, "sampled").unwrap();
        let x = [0.1, 0.3, 0.5, 0.7];
        let (m, dm) = s.derivatives(&x, 1.0);
        assert!((m[(1, 1)] - 0.2f64.exp()).abs() < 1e-4);
        assert!((dm[0][(1, 1)] - 2.0 * 0.2f64.exp()).abs() < 1e-4);
        assert_eq!(dm[1][(1, 1)], 0.0);
    }
}
