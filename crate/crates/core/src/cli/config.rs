use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::causal::{GeodesicOptions, TauSearch};
use crate::comparison::{ComparisonParams, HawkingConfig, SegmentConfig};
use crate::curvature::DEFAULT_HALFWIDTHS;
use crate::friedrichs::{AEpsMode, DEFAULT_P};
use crate::metric::catalog::{describe, MODEL_NAMES};
use crate::metric::ModelParams;
use crate::mollify::FamilyConfig;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_ENV: &str = "LORENTZ_LAB_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Constants,
    FriedrichsSweep,
    RicciCommutator,
    MeanCurvature,
    TauConvergence,
    Segment,
    Hawking,
    Geodesic,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Constants,
        Experiment::FriedrichsSweep,
        Experiment::RicciCommutator,
        Experiment::MeanCurvature,
        Experiment::TauConvergence,
        Experiment::Segment,
        Experiment::Hawking,
        Experiment::Geodesic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Constants => "constants",
            Experiment::FriedrichsSweep => "friedrichs_sweep",
            Experiment::RicciCommutator => "ricci_commutator",
            Experiment::MeanCurvature => "mean_curvature",
            Experiment::TauConvergence => "tau_convergence",
            Experiment::Segment => "segment",
            Experiment::Hawking => "hawking",
            Experiment::Geodesic => "geodesic",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Experiment::Constants => "sweep of C^{A-}, K and the bound alpha over (beta, rho, n)",
            Experiment::FriedrichsSweep => "L^p norms of the first-order commutator and kernel masses over the schedule",
            Experiment::RicciCommutator => "||Ric[g_eps] - Ric[g]*rho_eps|| over the schedule",
            Experiment::MeanCurvature => "slab mean-curvature bound and its transfer to the inner approximants",
            Experiment::TauConvergence => "tau_k <= tau_{k+1} <= tau on sampled causal pairs",
            Experiment::Segment => "segment-type inequality on a box B in a slice",
            Experiment::Hawking => "end-to-end singularity bound sup tau_Sigma <= alpha(beta, rho)",
            Experiment::Geodesic => "Filippov geodesic with energy audit and mollified-proxy endpoint gaps",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("lorentz-lab-out") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSection {
    pub model: String,
    pub params: ModelParams,
}

impl Default for MetricSection {
    fn default() -> Self {
        Self { model: "minkowski".into(), params: ModelParams::new() }
    }
}

/// Unset entries fall back to per-experiment defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub bounds: Option<Vec<(f64, f64)>>,
    /// Samples along each dependence axis.
    pub resolution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurvatureSection {
    /// Σ = {t = t0}.
    pub t0: f64,
    /// Spatial half-extent of Σ.
    pub extent: f64,
    /// Flow fields X (constant coefficients); empty means ∂t and ∂t + 0.3∂x.
    pub flows: Vec<Vec<f64>>,
    /// Mean curvature bound b; defaults to the model's slice value × 0.995.
    pub bound: Option<f64>,
    pub halfwidths: Vec<f64>,
    /// Half-width of the sub-slab for the transfer to ǧ_ε.
    pub sub: f64,
}

impl Default for CurvatureSection {
    fn default() -> Self {
        Self { t0: -0.5, extent: 1.0, flows: Vec::new(), bound: None, halfwidths: DEFAULT_HALFWIDTHS.to_vec(), sub: 0.3 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FriedrichsKind {
    /// a = |x|, f = sign(x).
    Kink,
    /// a = 1/a(t)², f = ∂t(a²) of the two-slope scale factor.
    TwoSlope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FriedrichsSection {
    pub case: FriedrichsKind,
    pub m1: f64,
    pub m2: f64,
    /// a_ε mode; kink defaults to frozen, two_slope to true_inverse.
    pub mode: Option<AEpsMode>,
    pub p: Vec<f64>,
    pub axis: usize,
    /// Norm region K; defaults to the grid shrunk by 3·max ε.
    pub k: Option<Vec<(f64, f64)>>,
    pub l1_ratio: f64,
    pub l2_ratio: f64,
    pub inf_factor: f64,
    pub mass_spread: f64,
}

impl Default for FriedrichsSection {
    fn default() -> Self {
        Self {
            case: FriedrichsKind::Kink,
            m1: 0.5,
            m2: 1.0,
            mode: None,
            p: DEFAULT_P.to_vec(),
            axis: 0,
            k: None,
            l1_ratio: 0.25,
            l2_ratio: 0.35,
            inf_factor: 3.0,
            mass_spread: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CausalSection {
    pub search: TauSearch,
    pub geodesic: GeodesicOptions,
    /// τ chain: number of comoving-offset pairs and their sampling box.
    pub pairs: usize,
    pub pair_box: Option<Vec<(f64, f64)>>,
    pub dt: (f64, f64),
    pub spread: f64,
    pub warm: bool,
    pub gap_tol: f64,
    /// Geodesic: initial point, velocity and affine horizon.
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    pub horizon: f64,
    pub drift_tol: f64,
    /// Also integrate on the inner approximants and report endpoint gaps.
    pub proxies: bool,
}

impl Default for CausalSection {
    fn default() -> Self {
        Self {
            search: TauSearch::default(),
            geodesic: GeodesicOptions::default(),
            pairs: 50,
            pair_box: None,
            dt: (0.2, 0.6),
            spread: 0.5,
            warm: true,
            gap_tol: 0.02,
            x0: Vec::new(),
            v0: Vec::new(),
            horizon: 1.0,
            drift_tol: 1e-8,
            proxies: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub betas: Vec<f64>,
    pub rhos: Vec<f64>,
    pub dims: Vec<usize>,
    /// Quadrature panels for the index-form residual.
    pub panels: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            betas: vec![-8.0, -6.0, -4.0, -3.0, -2.0, -1.5, -1.0],
            rhos: vec![-2.0, -1.0, 0.0, 0.5, 1.0],
            dims: vec![4],
            panels: 10_000,
        }
    }
}

/// Nonnegative integrand f of the segment inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Integrand {
    One,
    /// (1 − |x − centre|²/radius²)² inside the ball, 0 outside.
    Bump { centre: Vec<f64>, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SegmentSection {
    pub t0: f64,
    pub extent: f64,
    /// B as a box in Σ's coordinates; defaults to [0,1]² × [−0.5,0.5] style unit boxes.
    pub b: Option<Vec<(f64, f64)>>,
    pub f: Integrand,
    pub check: SegmentConfig,
    /// Relative tolerance of the closed-form Ω-volume check.
    pub volume_tol: f64,
}

impl Default for SegmentSection {
    fn default() -> Self {
        Self { t0: 0.0, extent: 2.0, b: None, f: Integrand::One, check: SegmentConfig::default(), volume_tol: 0.01 }
    }
}

/// The constants bundle; unset entries take [`ComparisonParams::default`]
/// (n from the model).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComparisonSection {
    pub n: Option<usize>,
    pub kappa: Option<f64>,
    pub beta: Option<f64>,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub sweep: SweepSection,
    pub segment: SegmentSection,
    pub hawking: HawkingConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub metric: MetricSection,
    #[serde(default)]
    pub grid: GridSection,
    /// Overrides the experiment's regularization settings when present.
    #[serde(default)]
    pub mollifier: Option<FamilyConfig>,
    #[serde(default)]
    pub curvature: CurvatureSection,
    #[serde(default)]
    pub friedrichs: FriedrichsSection,
    #[serde(default)]
    pub causal: CausalSection,
    #[serde(default)]
    pub comparison: ComparisonSection,
}

/// A config that could not be read: offending key (dotted path), 1-based
/// line when it can be located, and the message.
#[derive(Clone, Debug, PartialEq)]
pub struct SchemaError {
    pub key: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let key = if self.key.is_empty() { "<root>" } else { &self.key };
        match self.line {
            Some(l) => write!(f, "config error at `{key}` (line {l}): {}", self.message),
            None => write!(f, "config error at `{key}`: {}", self.message),
        }
    }
}

impl std::error::Error for SchemaError {}

impl From<SchemaError> for crate::Error {
    fn from(e: SchemaError) -> Self {
        crate::Error::Config { key: e.key, message: e.message }
    }
}

/// Line of `key` (dotted path) in TOML source, by tracking table headers.
fn locate_key(src: &str, key: &str) -> Option<usize> {
    let mut section = String::new();
    let mut header_line = None;
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            section = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            if section == key {
                header_line = Some(i + 1);
            }
            continue;
        }
        let Some((k, _)) = line.split_once('=') else { continue };
        let k = k.trim().trim_matches('"');
        let full = if section.is_empty() { k.to_string() } else { format!("{section}.{k}") };
        if full == key {
            return Some(i + 1);
        }
    }
    header_line.or_else(|| key.rsplit_once('.').and_then(|(parent, _)| locate_key(src, parent)))
}

impl RunConfig {
    /// Parses a TOML document; errors point at the offending key.
    pub fn from_toml(src: &str) -> Result<Self, SchemaError> {
        let value: toml::Table = toml::from_str(src).map_err(|e| SchemaError {
            key: String::new(),
            line: e.span().map(|s| src[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })?;
        let de = toml::Value::Table(value);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { String::new() } else { key };
            let message = e.inner().to_string();
            let key = match unknown_field(&message) {
                Some(field) if key.is_empty() => field,
                Some(field) if key == field || key.ends_with(&format!(".{field}")) => key,
                Some(field) => format!("{key}.{field}"),
                None => key,
            };
            SchemaError { line: locate_key(src, &key), key, message }
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, SchemaError> {
        let src = std::fs::read_to_string(path).map_err(|e| SchemaError {
            key: String::new(),
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_toml(&src)
    }

    pub fn to_toml(&self) -> crate::Result<String> {
        toml::to_string(self).map_err(|e| crate::Error::Format(e.to_string()))
    }

    /// Output directory after the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output.dir.clone(),
        }
    }

    /// Dimension: comparison.n, else the model's n, else 4.
    pub fn dim(&self) -> usize {
        self.comparison.n.or_else(|| self.metric.params.dim().ok()).unwrap_or(4)
    }

    pub fn comparison_params(&self) -> ComparisonParams {
        let d = ComparisonParams::default();
        let c = &self.comparison;
        ComparisonParams {
            n: self.dim(),
            kappa: c.kappa.unwrap_or(d.kappa),
            beta: c.beta.unwrap_or(d.beta),
            rho: c.rho.unwrap_or(d.rho),
            eta: c.eta.unwrap_or(d.eta),
            t: c.t.unwrap_or(d.t),
        }
    }
}

/// `unknown field `x`, expected …` → `x`.
fn unknown_field(message: &str) -> Option<String> {
    let rest = message.strip_prefix("unknown field `")?;
    Some(rest.split('`').next()?.to_string())
}

/// Why a config is not runnable as written (`Error`) or states hypotheses
/// the experiment will report as failed (`Precondition`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Precondition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Precondition => "precondition",
        };
        write!(f, "{tag}: `{}`: {}", self.key, self.message)
    }
}

/// Grid the experiment will actually use: explicit section, else the
/// experiment's default.
pub(crate) fn effective_grid(cfg: &RunConfig) -> (Vec<(f64, f64)>, usize) {
    let n = cfg.dim();
    let default = match cfg.experiment {
        Experiment::FriedrichsSweep => {
            let hi = match cfg.friedrichs.case {
                FriedrichsKind::Kink => 1.0,
                FriedrichsKind::TwoSlope => (0.9 / cfg.friedrichs.m2).min(0.9),
            };
            let lo = if cfg.friedrichs.case == FriedrichsKind::Kink { -1.0 } else { -0.9 };
            (vec![(lo, hi)], 8001)
        }
        Experiment::Hawking => {
            let h = &cfg.comparison.hawking;
            let mut b = vec![h.t_bounds];
            b.extend(std::iter::repeat((-1.0, 1.0)).take(n - 1));
            (b, h.resolution)
        }
        _ => {
            let mut b = vec![(-1.4, 0.8)];
            b.extend(std::iter::repeat((-1.0, 1.0)).take(n - 1));
            (b, 5633)
        }
    };
    (cfg.grid.bounds.clone().unwrap_or(default.0), cfg.grid.resolution.unwrap_or(default.1))
}

pub(crate) fn effective_family(cfg: &RunConfig) -> FamilyConfig {
    let mut f = match (&cfg.mollifier, cfg.experiment) {
        (Some(m), _) => m.clone(),
        (None, Experiment::Hawking) => cfg.comparison.hawking.family.clone(),
        (None, _) => FamilyConfig::default(),
    };
    f.audit.seed = cfg.seed;
    f
}

fn uses_model(e: Experiment) -> bool {
    !matches!(e, Experiment::Constants | Experiment::FriedrichsSweep)
}

fn uses_family(e: Experiment) -> bool {
    matches!(
        e,
        Experiment::FriedrichsSweep
            | Experiment::RicciCommutator
            | Experiment::MeanCurvature
            | Experiment::TauConvergence
            | Experiment::Hawking
    )
}

/// Schema-level and cross-field checks; an empty list means the config is
/// valid.
pub fn validate(cfg: &RunConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut pre = Vec::new();
    let mut err = |key: &str, message: String| out.push(Diagnostic { severity: Severity::Error, key: key.into(), message });
    let n = cfg.dim();

    if uses_model(cfg.experiment) {
        if !MODEL_NAMES.contains(&cfg.metric.model.as_str()) {
            err("metric.model", format!("unknown model `{}` (known: {})", cfg.metric.model, MODEL_NAMES.join(", ")));
        } else if let Err(e) = crate::metric::catalog(&cfg.metric.model, &cfg.metric.params) {
            err("metric.params", e.to_string());
        } else if describe(&cfg.metric.model).is_none() {
            err("metric.model", "model has no description".into());
        }
    }
    if !(2..=crate::metric::MAX_DIM).contains(&n) {
        err("comparison.n", format!("dimension must lie in 2..={}, got {n}", crate::metric::MAX_DIM));
        return out;
    }

    if uses_family(cfg.experiment) {
        let (bounds, res) = effective_grid(cfg);
        let key_b = if cfg.grid.bounds.is_some() { "grid.bounds" } else { "grid" };
        let key_r = if cfg.grid.resolution.is_some() { "grid.resolution" } else { "grid" };
        let dim_needed = if cfg.experiment == Experiment::FriedrichsSweep { 1 } else { n };
        if bounds.len() != dim_needed {
            err(key_b, format!("expected {dim_needed} intervals, got {}", bounds.len()));
        }
        if let Some((i, _)) = bounds.iter().enumerate().find(|(_, (lo, hi))| !(lo < hi)) {
            err(key_b, format!("interval {i} is empty or reversed"));
        }
        if res < 2 {
            err(key_r, format!("resolution must be at least 2, got {res}"));
        }
        let family = effective_family(cfg);
        let sched_key = if cfg.mollifier.is_some() { "mollifier.schedule" } else { "grid.resolution" };
        if family.schedule.is_empty() {
            err("mollifier.schedule", "schedule is empty".into());
        } else if family.schedule.windows(2).any(|w| !(w[1] < w[0])) || family.schedule.iter().any(|e| !(*e > 0.0)) {
            err("mollifier.schedule", "schedule must be strictly decreasing and positive".into());
        }
        if res >= 2 && !bounds.is_empty() && bounds[0].1 > bounds[0].0 {
            // time axis (the only dependence axis of the GRW models) sets h
            let h = (bounds[0].1 - bounds[0].0) / (res - 1) as f64;
            if let Some(e) = family.schedule.iter().cloned().filter(|e| *e > 0.0).reduce(f64::min) {
                if e < 4.0 * h {
                    err(
                        sched_key,
                        format!(
                            "ε = {e} is not resolvable on spacing h = {h:.4e}: ε/h = {:.2} < 4 (need resolution ≥ {})",
                            e / h,
                            ((bounds[0].1 - bounds[0].0) * 4.0 / e).ceil() as usize + 1
                        ),
                    );
                }
            }
            if let Some(emax) = family.schedule.first() {
                if 2.0 * emax >= bounds[0].1 - bounds[0].0 {
                    err(key_b, format!("grid is too short for ε = {emax}: no interior trust region"));
                }
            }
        }
    }

    let p = cfg.comparison_params();
    match cfg.experiment {
        Experiment::Constants => {
            let s = &cfg.comparison.sweep;
            if s.betas.is_empty() || s.rhos.is_empty() || s.dims.is_empty() {
                err("comparison.sweep", "betas, rhos and dims must be non-empty".into());
            }
            if s.betas.iter().any(|b| !(*b < 0.0)) {
                err("comparison.sweep.betas", "every β must be negative".into());
            }
            if s.dims.iter().any(|d| *d < 2) {
                err("comparison.sweep.dims", "every n must be at least 2".into());
            }
            if s.panels == 0 {
                err("comparison.sweep.panels", "need at least one panel".into());
            }
            if !(p.kappa < 0.0) {
                err("comparison.kappa", format!("κ must be negative, got {}", p.kappa));
            }
            if !(p.eta > 0.0) {
                err("comparison.eta", format!("η must be positive, got {}", p.eta));
            }
        }
        Experiment::FriedrichsSweep => {
            let f = &cfg.friedrichs;
            if cfg.grid.bounds.is_some() {
                err("grid.bounds", "the scalar commutator cases fix their own interval; set grid.resolution only".into());
            }
            if f.case == FriedrichsKind::TwoSlope && !(f.m1 > 0.0 && f.m1 <= f.m2) {
                err("friedrichs.m1", format!("need 0 < m1 <= m2, got m1={}, m2={}", f.m1, f.m2));
            }
            if f.p.iter().any(|p| !(*p >= 1.0)) {
                err("friedrichs.p", "exponents must be ≥ 1".into());
            }
            if f.axis != 0 {
                err("friedrichs.axis", "the scalar cases are one-dimensional: axis must be 0".into());
            }
        }
        Experiment::RicciCommutator => {
            if cfg.friedrichs.p.iter().any(|p| !(*p >= 1.0)) {
                err("friedrichs.p", "exponents must be ≥ 1".into());
            }
        }
        Experiment::MeanCurvature => {
            let c = &cfg.curvature;
            if c.flows.len() == 1 {
                err("curvature.flows", "need at least two flow fields (or none for the defaults)".into());
            }
            if let Some(i) = c.flows.iter().position(|v| v.len() != n) {
                err("curvature.flows", format!("flow {i} must have {n} components"));
            }
            if !(c.sub > 0.0) {
                err("curvature.sub", format!("sub-slab half-width must be positive, got {}", c.sub));
            }
            if !(c.extent > 0.0) {
                err("curvature.extent", "Σ extent must be positive".into());
            }
        }
        Experiment::TauConvergence => {
            let c = &cfg.causal;
            if c.pairs == 0 {
                err("causal.pairs", "need at least one pair".into());
            }
            if !(c.dt.0 > 0.0 && c.dt.0 < c.dt.1) {
                err("causal.dt", "need 0 < dt.0 < dt.1".into());
            }
            if let Some(b) = &c.pair_box {
                if b.len() != n {
                    err("causal.pair_box", format!("expected {n} intervals, got {}", b.len()));
                }
            }
        }
        Experiment::Segment => {
            let s = &cfg.comparison.segment;
            if let Some(b) = &s.b {
                if b.len() != n - 1 {
                    err("comparison.segment.b", format!("B needs {} intervals, got {}", n - 1, b.len()));
                }
            }
            if let Integrand::Bump { centre, radius } = &s.f {
                if centre.len() != n || !(*radius > 0.0) {
                    err("comparison.segment.f", format!("bump needs an {n}-point centre and a positive radius"));
                }
            }
            for d in p.diagnostics() {
                pre.push(Diagnostic { severity: Severity::Precondition, key: "comparison".into(), message: d });
            }
        }
        Experiment::Hawking => {
            let h = &cfg.comparison.hawking;
            let beta = cfg.comparison.beta.or(h.beta);
            let rho = cfg.comparison.rho.unwrap_or(h.rho);
            if let Some(beta) = beta {
                let hp = ComparisonParams { n, beta, rho, ..Default::default() };
                for d in hp.hawking_diagnostics() {
                    pre.push(Diagnostic { severity: Severity::Precondition, key: "comparison.beta".into(), message: d });
                }
            }
            if h.probe_offsets.is_empty() || h.probe_offsets.iter().any(|d| !(*d > 0.0)) {
                err("comparison.hawking.probe_offsets", "need positive probe offsets".into());
            }
        }
        Experiment::Geodesic => {
            let c = &cfg.causal;
            if !c.x0.is_empty() && c.x0.len() != n {
                err("causal.x0", format!("expected {n} components, got {}", c.x0.len()));
            }
            if !c.v0.is_empty() && c.v0.len() != n {
                err("causal.v0", format!("expected {n} components, got {}", c.v0.len()));
            }
            if !c.v0.is_empty() && c.v0.iter().all(|v| *v == 0.0) {
                err("causal.v0", "initial velocity is zero".into());
            }
            if !(c.horizon > 0.0) {
                err("causal.horizon", format!("horizon must be positive, got {}", c.horizon));
            }
        }
    }
    out.extend(pre);
    out
}
