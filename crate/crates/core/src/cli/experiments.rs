use std::sync::Arc;

use serde::Serialize;

use super::config::{effective_family, effective_grid, Experiment, FriedrichsKind, Integrand, RunConfig};
use super::report::{num, Sidecars};
use crate::causal::{comoving_offset_pairs, geodesic, proxy_endpoint_gaps, tau_monotonicity_check};
use crate::comparison::{
    const_alpha, const_ca_minus, const_k, hawking_experiment, index_form, segment_check, Check, ComparisonParams,
    HChoice, HawkingConfig,
};
use crate::curvature::{mean_bound_check, mean_curvature_convergence, FlowField, Hypersurface};
use crate::error::{Error, Result};
use crate::friedrichs::{
    commutator_sweep, kernel_mass, mode_discrepancy, ricci_commutator, AEpsMode, FriedrichsCase, NormReport,
};
use crate::grid::{gauss_legendre, FdScheme, Norm};
use crate::metric::{catalog, SpacetimeModel};
use crate::mollify::RegularizedFamily;

/// What an experiment hands back to the runner.
pub(crate) struct Outcome {
    pub checks: Vec<Check>,
    pub result: toml::Table,
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.0.push(Check { name: name.into(), pass, detail: detail.into() });
    }
}

fn table<T: Serialize>(v: &T) -> Result<toml::Table> {
    toml::Table::try_from(v).map_err(|e| Error::Format(e.to_string()))
}

fn model_of(cfg: &RunConfig) -> Result<SpacetimeModel> {
    catalog(&cfg.metric.model, &cfg.metric.params)
}

fn family_of(cfg: &RunConfig, model: &SpacetimeModel) -> Result<RegularizedFamily> {
    let (bounds, res) = effective_grid(cfg);
    let grid = model.grid(&bounds, res)?;
    RegularizedFamily::build(&model.metric, &grid, &effective_family(cfg))
}

fn write_family(out: &mut Sidecars, fam: &RegularizedFamily) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..fam.len())
        .map(|k| vec![num(fam.schedule[k]), num(fam.inner_margins[k]), num(fam.outer_margins[k])])
        .collect();
    out.csv("family.csv", &["epsilon", "inner_margin", "outer_margin"].map(String::from), &rows)?;
    out.dat("inner_margin_vs_eps.dat", &fam.schedule.iter().cloned().zip(fam.inner_margins.iter().cloned()).collect::<Vec<_>>())
}

fn write_norms(out: &mut Sidecars, r: &NormReport, stem: &str) -> Result<()> {
    r.write_csv(&out.path(&format!("{stem}.csv")))?;
    let files = r.write_plot_data(&out.dir, stem)?;
    out.adopt(&files);
    Ok(())
}

/// Non-increasing within a relative 1e−6 (plus 1e−12 absolute).
fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-6) + 1e-12)
}

/// Ratio and trend checks shared by the commutator sweeps; columns whose
/// first entry is below `floor` count as noise and pass.
fn norm_checks(c: &mut Checks, r: &NormReport, l1: f64, l2: f64, inf_factor: f64, floor: f64) {
    for (p, limit) in [(1.0, l1), (2.0, l2)] {
        let Some(col) = r.column(Norm::L(p)) else { continue };
        let ratio = r.ratio(Norm::L(p)).unwrap_or(f64::NAN);
        let noise = col[0] < floor;
        c.add(
            &format!("l{p}_ratio"),
            noise || ratio <= limit,
            if noise { format!("noise floor: initial {:.3e}", col[0]) } else { format!("final/initial {ratio:.4} (limit {limit})") },
        );
    }
    for n in &r.norms {
        if let Norm::L(p) = n {
            let col = r.column(*n).unwrap();
            let ok = col[0] < floor || non_increasing(&col);
            c.add(&format!("l{p}_decreasing"), ok, format!("{:?}", col.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>()));
        }
    }
    let med = r.median(Norm::Inf).unwrap_or(0.0);
    c.add(
        "linf_bounded",
        med < floor || r.bounded(inf_factor),
        format!("max {:.3e} vs {inf_factor}× median {med:.3e}", r.column(Norm::Inf).map_or(0.0, |v| v.iter().cloned().fold(0.0, f64::max))),
    );
}

pub(crate) fn dispatch(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::Constants => constants(cfg, out),
        Experiment::FriedrichsSweep => friedrichs_sweep(cfg, out),
        Experiment::RicciCommutator => ricci(cfg, out),
        Experiment::MeanCurvature => mean_curvature(cfg, out),
        Experiment::TauConvergence => tau_convergence(cfg, out),
        Experiment::Segment => segment(cfg, out),
        Experiment::Hawking => hawking(cfg, out),
        Experiment::Geodesic => geodesic_run(cfg, out),
    }
}

fn constants(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let s = &cfg.comparison.sweep;
    let base = cfg.comparison_params();
    let mut c = Checks(Vec::new());
    let mut rows = Vec::new();
    let (mut k_max, mut idx_max) = (0.0f64, 0.0f64);
    let (mut ca_ok, mut domain_ok, mut monotone_ok) = (true, true, true);
    let mut admissible = 0;
    for &n in &s.dims {
        for &rho in &s.rhos {
            let mut curve = Vec::new();
            let mut betas = s.betas.clone();
            betas.sort_by(|a, b| b.total_cmp(a));
            for beta in betas {
                let rule = !(rho < 0.0) || beta.abs() > (n as f64 - 1.0) * (-rho).sqrt();
                match const_alpha(beta, rho, n) {
                    Ok(alpha) => {
                        admissible += 1;
                        domain_ok &= rule;
                        let p = ComparisonParams { n, beta, rho, t: alpha, ..base.clone() };
                        let k = const_k(&p)?.abs();
                        let ca = const_ca_minus(&p)?;
                        let nm1r = (n as f64 - 1.0) * rho;
                        let idx = index_form(&HChoice::canonical(rho), &p, &|_| nm1r, s.panels)?.abs();
                        k_max = k_max.max(k);
                        idx_max = idx_max.max(idx);
                        ca_ok &= ca > 0.0 && ca <= 1.0;
                        curve.push((beta, alpha));
                        rows.push(vec![num(beta), num(rho), n.to_string(), num(alpha), num(k), num(ca), num(idx), "ok".into()]);
                    }
                    Err(e) => {
                        domain_ok &= !rule;
                        rows.push(vec![
                            num(beta),
                            num(rho),
                            n.to_string(),
                            String::new(),
                            String::new(),
                            String::new(),
                            String::new(),
                            format!("inadmissible: {e}"),
                        ]);
                    }
                }
            }
            // betas run from small to large |β|: α must fall
            monotone_ok &= curve.windows(2).all(|w| w[1].1 < w[0].1);
            if !curve.is_empty() {
                out.dat(&format!("alpha_vs_beta_n{n}_rho{rho}.dat"), &curve)?;
            }
        }
    }
    let header = ["beta", "rho", "n", "alpha", "k_residual", "ca_minus", "index_residual", "status"].map(String::from);
    out.csv("constants.csv", &header, &rows)?;
    c.add("k_at_alpha", k_max <= 1e-10, format!("max |K(β, α, ρ)| = {k_max:.3e}"));
    c.add("index_form", idx_max <= 1e-6, format!("max |index form| = {idx_max:.3e}"));
    c.add("ca_minus_range", ca_ok, "C^{A−} ∈ (0, 1] at T = α");
    c.add("alpha_monotone", monotone_ok, "α decreasing in |β| for every (ρ, n)");
    c.add("domain_rule", domain_ok, "α defined exactly where |β| > (n−1)√|ρ| for ρ < 0");
    #[derive(Serialize)]
    struct Summary {
        rows: usize,
        admissible: usize,
        max_k_residual: f64,
        max_index_residual: f64,
        point_alpha: Option<f64>,
        point_k: Option<f64>,
        point_ca_minus: Option<f64>,
    }
    let summary = Summary {
        rows: rows.len(),
        admissible,
        max_k_residual: k_max,
        max_index_residual: idx_max,
        point_alpha: const_alpha(base.beta, base.rho, base.n).ok(),
        point_k: const_k(&base).ok(),
        point_ca_minus: const_ca_minus(&base).ok(),
    };
    Ok(Outcome { checks: c.0, result: table(&summary)? })
}

fn friedrichs_sweep(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let f = &cfg.friedrichs;
    let (_, res) = effective_grid(cfg);
    let fam = effective_family(cfg);
    let schedule = fam.schedule.clone();
    let mut case = match f.case {
        FriedrichsKind::Kink => FriedrichsCase::kink(res, schedule.clone())?,
        FriedrichsKind::TwoSlope => {
            FriedrichsCase::two_slope(f.m1, f.m2, res, f.mode.unwrap_or(AEpsMode::TrueInverse), schedule.clone())?
        }
    };
    if let Some(m) = f.mode {
        case.mode = m;
    }
    case = case.with_p(f.p.clone()).with_profile(fam.profile);
    if let Some(k) = &f.k {
        case = case.with_region(k.clone());
    }
    let r = commutator_sweep(&case, f.axis)?;
    write_norms(out, &r, "commutator")?;
    let mut c = Checks(Vec::new());
    norm_checks(&mut c, &r, f.l1_ratio, f.l2_ratio, f.inf_factor, 0.0);

    let masses = schedule.iter().map(|&e| kernel_mass(&case, e, f.axis)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<String>> = schedule
        .iter()
        .zip(&masses)
        .map(|(e, m)| vec![num(*e), num(m.over_x), num(m.over_y), num(m.bound)])
        .collect();
    out.csv("kernel_mass.csv", &["epsilon", "over_x", "over_y", "bound"].map(String::from), &rows)?;
    out.dat("kernel_mass_vs_eps.dat", &schedule.iter().zip(&masses).map(|(e, m)| (*e, m.over_y)).collect::<Vec<_>>())?;
    let bounded = masses.iter().all(|m| m.over_x <= m.bound && m.over_y <= m.bound);
    c.add("kernel_mass_bound", bounded, format!("bound (1+∫|∇ρ|)·Lip(a) = {:.4}", masses[0].bound));
    let spread = |v: Vec<f64>| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(l, h), x| (l.min(*x), h.max(*x)));
        hi / lo - 1.0
    };
    let sx = spread(masses.iter().map(|m| m.over_x).collect());
    let sy = spread(masses.iter().map(|m| m.over_y).collect());
    c.add(
        "kernel_mass_uniform",
        sx <= f.mass_spread && sy <= f.mass_spread,
        format!("max/min − 1: over_x {sx:.4}, over_y {sy:.4} (limit {})", f.mass_spread),
    );

    let mut rows = Vec::new();
    for &e in &schedule {
        for (mode, d) in mode_discrepancy(&case, e)? {
            rows.push(vec![num(e), serde_plain(&mode), num(d)]);
        }
    }
    out.csv("mode_discrepancy.csv", &["epsilon", "mode", "sup_diff"].map(String::from), &rows)?;

    #[derive(Serialize)]
    struct Summary {
        case: String,
        resolution: usize,
        mode: AEpsMode,
        k_region: Vec<(f64, f64)>,
        l1_ratio: Option<f64>,
        l2_ratio: Option<f64>,
        kernel_mass_spread: f64,
    }
    let summary = Summary {
        case: case.name.clone(),
        resolution: res,
        mode: case.mode,
        k_region: case.k_region.clone(),
        l1_ratio: r.ratio(Norm::L(1.0)),
        l2_ratio: r.ratio(Norm::L(2.0)),
        kernel_mass_spread: sx.max(sy),
    };
    Ok(Outcome { checks: c.0, result: table(&summary)? })
}

fn serde_plain<T: Serialize>(v: &T) -> String {
    toml::Value::try_from(v).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

/// Default norm region: the family's trust box shrunk by two fourth-order
/// stencils along the dependence axes.
fn default_k(model: &SpacetimeModel, fam: &RegularizedFamily) -> Vec<(f64, f64)> {
    let h = fam.grid.spacing();
    fam.trust
        .iter()
        .enumerate()
        .map(|(a, &(lo, hi))| {
            if model.dependence_axes.contains(&a) {
                let m = 2.0 * FdScheme::Central4.width() as f64 * h[a];
                (lo + m, hi - m)
            } else {
                (lo, hi)
            }
        })
        .collect()
}

fn ricci(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let model = model_of(cfg)?;
    let fam = family_of(cfg, &model)?;
    write_family(out, &fam)?;
    let k = cfg.friedrichs.k.clone().unwrap_or_else(|| default_k(&model, &fam));
    let r = ricci_commutator(&model, &fam, &cfg.friedrichs.p, &k)?;
    write_norms(out, &r, "ricci_commutator")?;
    let mut c = Checks(Vec::new());
    let f = &cfg.friedrichs;
    norm_checks(&mut c, &r, f.l1_ratio, f.l2_ratio, f.inf_factor, 1e-10);
    #[derive(Serialize)]
    struct Summary {
        model: String,
        k_region: Vec<(f64, f64)>,
        l1_ratio: Option<f64>,
        linf_median: Option<f64>,
    }
    let s = Summary { model: model.name.clone(), k_region: k, l1_ratio: r.ratio(Norm::L(1.0)), linf_median: r.median(Norm::Inf) };
    Ok(Outcome { checks: c.0, result: table(&s)? })
}

fn slice_of(model: &SpacetimeModel, t0: f64, extent: f64) -> Hypersurface {
    Hypersurface::slice(t0, vec![(-extent, extent); model.dim - 1])
}

fn mean_curvature(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let model = model_of(cfg)?;
    let cs = &cfg.curvature;
    let n = model.dim;
    let sigma = slice_of(&model, cs.t0, cs.extent);
    let mut c = Checks(Vec::new());
    let oracle = model.known.slice_mean_curvature.as_ref().map(|h| (h.value)(cs.t0));
    let Some(bound) = cs.bound.or(oracle.map(|h| h * (1.0 - 0.005))) else {
        c.add("bound", false, "no curvature.bound given and the model has no closed-form slice mean curvature");
        return Ok(Outcome { checks: c.0, result: toml::Table::new() });
    };
    let flows: Vec<FlowField> = if cs.flows.is_empty() {
        let mut e0 = vec![0.0; n];
        e0[0] = 1.0;
        let mut tilted = e0.clone();
        tilted[1] = 0.3;
        vec![FlowField::constant(e0), FlowField::constant(tilted)]
    } else {
        cs.flows.iter().cloned().map(FlowField::constant).collect()
    };
    let b = mean_bound_check(&model.metric, &sigma, bound, &flows, &cs.halfwidths)?;
    let mut header = vec!["halfwidth".to_string()];
    header.extend((0..flows.len()).map(|i| format!("esssup_flow{i}")));
    header.push("discrepancy".into());
    let rows: Vec<Vec<String>> = b
        .halfwidths
        .iter()
        .enumerate()
        .map(|(j, hw)| {
            let mut r = vec![num(*hw)];
            r.extend(b.esssup.iter().map(|row| num(row[j])));
            r.push(num(b.discrepancy[j]));
            r
        })
        .collect();
    out.csv("mean_bound.csv", &header, &rows)?;
    out.dat("discrepancy_vs_halfwidth.dat", &b.halfwidths.iter().cloned().zip(b.discrepancy.iter().cloned()).collect::<Vec<_>>())?;
    c.add("mean_bound", b.pass, format!("esssup 𝓗^X < {bound} witnessed at halfwidths {:?}", b.witness));
    let d = &b.discrepancy;
    c.add(
        "flow_independence",
        d.last() <= d.first(),
        format!("cross-flow discrepancy {:.3e} → {:.3e}", d.first().unwrap_or(&0.0), d.last().unwrap_or(&0.0)),
    );

    let fam = family_of(cfg, &model)?;
    write_family(out, &fam)?;
    let conv = mean_curvature_convergence(&model.metric, &fam, &sigma, &flows[0], cs.sub, bound)?;
    let rows: Vec<Vec<String>> = (0..fam.len())
        .map(|k| vec![num(fam.schedule[k]), num(conv.sup_diff[k]), num(conv.sup_on_sigma[k])])
        .collect();
    out.csv("mean_convergence.csv", &["epsilon", "sup_diff", "sup_on_sigma"].map(String::from), &rows)?;
    out.dat("sup_diff_vs_eps.dat", &fam.schedule.iter().cloned().zip(conv.sup_diff.iter().cloned()).collect::<Vec<_>>())?;
    c.add(
        "mean_curvature_convergence",
        conv.pass,
        format!("decreasing {}, final/initial {:.4} (limit 0.1)", conv.decreasing, conv.ratio),
    );
    c.add("transfer_consequence", conv.consequence, format!("sup 𝓗[ǧ_ε] on Σ {:?} vs b = {bound}", conv.sup_on_sigma));
    #[derive(Serialize)]
    struct Summary {
        bound: f64,
        oracle: Option<f64>,
        convergence_ratio: f64,
        sub: f64,
    }
    Ok(Outcome { checks: c.0, result: table(&Summary { bound, oracle, convergence_ratio: conv.ratio, sub: cs.sub })? })
}

fn tau_convergence(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let model = model_of(cfg)?;
    let n = model.dim;
    let cs = &cfg.causal;
    let fam = family_of(cfg, &model)?;
    write_family(out, &fam)?;
    let pbox = cs.pair_box.clone().unwrap_or_else(|| {
        let mut b = vec![(-0.6, -0.1)];
        b.extend(std::iter::repeat((-0.3, 0.3)).take(n - 1));
        b
    });
    let pairs = comoving_offset_pairs(&model.metric, &pbox, cs.dt, cs.spread, cs.pairs, cfg.seed);
    let mut c = Checks(Vec::new());
    c.add("pairs_sampled", pairs.len() == cs.pairs, format!("{} of {} pairs", pairs.len(), cs.pairs));
    let r = tau_monotonicity_check(&model.metric, &fam, &pairs, &cs.search.with_seed(cfg.seed), cs.warm);
    let mut header = vec!["pair".to_string()];
    header.extend((0..n).map(|i| format!("p{i}")));
    header.extend((0..n).map(|i| format!("q{i}")));
    header.extend((0..fam.len()).map(|k| format!("tau_k{k}")));
    header.push("tau".into());
    header.push("chain_holds".into());
    let rows: Vec<Vec<String>> = r
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut v = vec![i.to_string()];
            v.extend(row.p.iter().chain(&row.q).chain(&row.tau_k).map(|x| num(*x)));
            v.push(num(row.tau));
            v.push(row.chain_holds.to_string());
            v
        })
        .collect();
    out.csv("tau_chain.csv", &header, &rows)?;
    let gaps: Vec<Vec<String>> = r.epsilons.iter().zip(&r.max_gap).map(|(e, g)| vec![num(*e), num(*g)]).collect();
    out.csv("tau_gap.csv", &["epsilon", "max_gap"].map(String::from), &gaps)?;
    out.dat("gap_vs_eps.dat", &r.epsilons.iter().cloned().zip(r.max_gap.iter().cloned()).collect::<Vec<_>>())?;
    c.add(
        "chain",
        r.violations() == 0,
        format!("{} violations of τ_k ≤ τ_(k+1) ≤ τ within {} + {}", r.violations(), r.abs_tol, r.rel_tol),
    );
    c.add("gap_trend", r.gap_decreasing, format!("{:?}", r.max_gap));
    c.add("final_gap", r.final_gap() <= cs.gap_tol, format!("{:.4e} (limit {})", r.final_gap(), cs.gap_tol));
    #[derive(Serialize)]
    struct Summary {
        pairs: usize,
        violations: usize,
        final_gap: f64,
    }
    Ok(Outcome { checks: c.0, result: table(&Summary { pairs: pairs.len(), violations: r.violations(), final_gap: r.final_gap() })? })
}

fn segment(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let model = model_of(cfg)?;
    let n = model.dim;
    let s = &cfg.comparison.segment;
    let sigma = slice_of(&model, s.t0, s.extent);
    let b = s.b.clone().unwrap_or_else(|| (0..n - 1).map(|i| if i < 2 { (0.0, 1.0) } else { (-0.5, 0.5) }).collect());
    let params = cfg.comparison_params();
    let mut c = Checks(Vec::new());
    let diag = params.diagnostics();
    if !diag.is_empty() {
        c.add("hypotheses", false, diag.join("; "));
        return Ok(Outcome { checks: c.0, result: toml::Table::new() });
    }
    let f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync> = match &s.f {
        Integrand::One => Arc::new(|_: &[f64]| 1.0),
        Integrand::Bump { centre, radius } => {
            let (centre, r2) = (centre.clone(), radius * radius);
            Arc::new(move |x: &[f64]| {
                let d2: f64 = x.iter().zip(&centre).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / r2;
                if d2 < 1.0 {
                    (1.0 - d2).powi(2)
                } else {
                    0.0
                }
            })
        }
    };
    let rep = match segment_check(&model.metric, &sigma, &b, f.as_ref(), &params, &s.check) {
        Ok(r) => r,
        Err(Error::Domain(msg)) => {
            c.add("regularity", false, msg);
            return Ok(Outcome { checks: c.0, result: toml::Table::new() });
        }
        Err(e) => return Err(e),
    };
    c.add(
        "regularity",
        true,
        format!("c⁺ ≥ T + η on {} audit points ({} near the cut)", rep.cut_values.len(), rep.near_cut.len()),
    );
    let mut header: Vec<String> = (0..n - 1).map(|i| format!("y{i}")).collect();
    header.push("cut".into());
    header.push("near_cut".into());
    let rows: Vec<Vec<String>> = rep
        .cut_values
        .iter()
        .map(|(y, v)| {
            let mut r: Vec<String> = y.iter().map(|c| num(*c)).collect();
            r.push(num(*v));
            r.push(rep.near_cut.contains(y).to_string());
            r
        })
        .collect();
    out.csv("cut_audit.csv", &header, &rows)?;
    out.dat("cut_vs_index.dat", &rep.cut_values.iter().enumerate().map(|(i, (_, v))| (i as f64, *v)).collect::<Vec<_>>())?;
    let header = ["lhs", "rhs", "ca_minus", "area", "omega_integral", "slack"].map(String::from);
    out.csv(
        "segment.csv",
        &header,
        &[vec![num(rep.lhs), num(rep.rhs), num(rep.ca_minus), num(rep.area), num(rep.omega_integral), num(rep.slack)]],
    )?;
    c.add(
        "segment_inequality",
        rep.pass,
        format!("lhs {:.6} ≤ rhs {:.6}·(1 + {}), slack {:.3e}", rep.lhs, rep.rhs, s.check.tolerance, rep.slack),
    );
    // warped products: vol Ω = |B| ∫ a^{n−1} dt
    let mut volume_oracle = None;
    if let (Integrand::One, Some(a)) = (&s.f, model.known.scale_factor.as_ref()) {
        let (x, w) = gauss_legendre(64);
        let half = 0.5 * params.t;
        let integral: f64 =
            x.iter().zip(&w).map(|(xi, wi)| half * wi * (a.value)(s.t0 + half * (xi + 1.0)).powi(n as i32 - 1)).sum();
        let exact = b.iter().map(|(lo, hi)| hi - lo).product::<f64>() * integral;
        let rel = (rep.omega_integral - exact).abs() / exact;
        c.add(
            "omega_volume_oracle",
            rel <= s.volume_tol,
            format!("vol Ω {:.6} vs closed form {exact:.6} (relative {rel:.2e})", rep.omega_integral),
        );
        volume_oracle = Some(exact);
    }
    #[derive(Serialize)]
    struct Summary {
        lhs: f64,
        rhs: f64,
        ca_minus: f64,
        area: f64,
        omega_integral: f64,
        slack: f64,
        volume_oracle: Option<f64>,
    }
    let summary = Summary {
        lhs: rep.lhs,
        rhs: rep.rhs,
        ca_minus: rep.ca_minus,
        area: rep.area,
        omega_integral: rep.omega_integral,
        slack: rep.slack,
        volume_oracle,
    };
    Ok(Outcome { checks: c.0, result: table(&summary)? })
}

/// The experiment's HawkingConfig after the shared sections are applied.
pub(crate) fn hawking_config(cfg: &RunConfig) -> HawkingConfig {
    let mut h = cfg.comparison.hawking.clone();
    let c = &cfg.comparison;
    if c.beta.is_some() {
        h.beta = c.beta;
    }
    if let Some(r) = c.rho {
        h.rho = r;
    }
    if let Some(e) = c.eta {
        h.eta = e;
    }
    let (bounds, res) = effective_grid(cfg);
    h.t_bounds = bounds[0];
    h.resolution = res;
    h.family = effective_family(cfg);
    h.seed = cfg.seed;
    h.search.seed = cfg.seed;
    h
}

fn hawking(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let model = model_of(cfg)?;
    let rep = hawking_experiment(&model, &hawking_config(cfg))?;
    rep.write_sidecars(&out.dir)?;
    for f in ["floors.csv", "probes.csv", "floor_vs_eps.dat", "negative_part_vs_eps.dat", "tau_sigma_vs_t.dat"] {
        out.files.push(f.into());
    }
    if rep.mean.is_some() {
        out.files.push("mean_curvature.csv".into());
    }
    let mut result = table(&rep)?;
    result.remove("checks");
    result.remove("config");
    result.remove("runtime_s");
    Ok(Outcome { checks: rep.checks.clone(), result })
}

fn geodesic_run(cfg: &RunConfig, out: &mut Sidecars) -> Result<Outcome> {
    let model = model_of(cfg)?;
    let n = model.dim;
    let cs = &cfg.causal;
    let x0 = if cs.x0.is_empty() {
        let mut x = vec![0.0; n];
        x[0] = -0.5;
        x
    } else {
        cs.x0.clone()
    };
    let v0 = if cs.v0.is_empty() {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        v
    } else {
        cs.v0.clone()
    };
    let r = geodesic(&model.metric, &x0, &v0, cs.horizon, &cs.geodesic)?;
    let mut header = vec!["s".to_string()];
    header.extend((0..n).map(|i| format!("x{i}")));
    header.extend((0..n).map(|i| format!("v{i}")));
    let rows: Vec<Vec<String>> = r
        .samples
        .iter()
        .map(|s| std::iter::once(s.s).chain(s.x.iter().cloned()).chain(s.v.iter().cloned()).map(num).collect())
        .collect();
    out.csv("trajectory.csv", &header, &rows)?;
    out.dat("t_vs_s.dat", &r.samples.iter().map(|s| (s.s, s.x[0])).collect::<Vec<_>>())?;
    let mut c = Checks(Vec::new());
    let scale = model.metric.quad(&x0, &v0).abs().max(1.0);
    c.add(
        "energy_conservation",
        r.energy_drift <= cs.drift_tol * scale,
        format!("max |g(γ̇,γ̇) − g(γ̇₀,γ̇₀)| = {:.3e} (limit {:.1e})", r.energy_drift, cs.drift_tol * scale),
    );
    if model.name == "minkowski" {
        let dev = r
            .samples
            .iter()
            .map(|s| s.x.iter().zip(&x0).zip(&v0).map(|((x, a), v)| (x - a - s.s * v).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        c.add("straight", dev <= 1e-8, format!("max deviation from x0 + s·v0: {dev:.3e}"));
    }
    let mut gaps = Vec::new();
    let mut epsilons = Vec::new();
    if cs.proxies {
        let fam = family_of(cfg, &model)?;
        write_family(out, &fam)?;
        gaps = proxy_endpoint_gaps(&model.metric, &fam.inner, &x0, &v0, r.final_parameter(), &cs.geodesic)?;
        epsilons = fam.schedule.clone();
        let rows: Vec<Vec<String>> = epsilons.iter().zip(&gaps).map(|(e, g)| vec![num(*e), num(*g)]).collect();
        out.csv("proxy_gaps.csv", &["epsilon", "endpoint_gap"].map(String::from), &rows)?;
        out.dat("proxy_gap_vs_eps.dat", &epsilons.iter().cloned().zip(gaps.iter().cloned()).collect::<Vec<_>>())?;
        c.add("proxy_convergence", gaps.last() <= gaps.first(), format!("endpoint gaps {gaps:?}"));
    }
    #[derive(Serialize)]
    struct Summary {
        status: crate::causal::GeodesicStatus,
        final_parameter: f64,
        final_point: Vec<f64>,
        energy_drift: f64,
        crossings: Vec<f64>,
        proxy_gaps: Vec<f64>,
        proxy_epsilons: Vec<f64>,
    }
    let summary = Summary {
        status: r.status,
        final_parameter: r.final_parameter(),
        final_point: r.last().x.clone(),
        energy_drift: r.energy_drift,
        crossings: r.crossings.clone(),
        proxy_gaps: gaps,
        proxy_epsilons: epsilons,
    };
    Ok(Outcome { checks: c.0, result: table(&summary)? })
}
