//! Executes a [`RunConfig`]: builds the initial data, runs the model, applies
//! the requested certifiers and assembles the report and the step table.

use std::cell::OnceCell;

use kdgf::analysis::{
    arc_decay_rate, bipolar_group_rate, certify_bipolar_bounds, certify_cluster_invariance,
    certify_diameter_decay, certify_two_sided_decay, certify_uniform_bound,
    check_bipolar_containment, check_order_preservation, classify_initial, cluster_spec,
    effective_series, fit_decay_rate, match_equilibrium, EquilibriumState, InitialClass,
    InitialClassKind, MatchOutcome, OrderCheck, RESOLUTION_FLOOR,
};
use kdgf::dgf::{
    certify_descent, check_step_guard, dgf_run_with, grad_norm_summability, lojasiewicz_probe,
    DgfProblem, DgfResult,
};
use kdgf::init::{near_bipolar, near_sync, random_arc, random_frequencies};
use kdgf::{
    euler_error_bound, rk4_reference, simulate, NaturalFrequencies, PhaseConfig, PhaseSeries,
    RecordedSeries, SimParams, StopRule, Trajectory,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::config::{
    CertifierName, CertifierSpec, InitSpec, ModelKind, OmegaSpec, PotentialKind, RunConfig,
    StopKind,
};
use crate::error::{CliError, Result};

const DEFAULT_EPS: f64 = 0.3;
const DEFAULT_MATCH_TOL: f64 = 1e-6;
const DEFAULT_PROBE_RADIUS: f64 = 0.1;
const DEFAULT_PROBE_SAMPLES: usize = 200;

/// Per-step output. `n` is stored separately so it prints as an integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<(u64, Vec<f64>)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub verdict: &'static str,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Value,
    pub table: Table,
    pub steps_run: u64,
    pub stop_reason: String,
    pub final_grad_norm: f64,
    pub verdicts: Vec<Verdict>,
}

pub fn initial_data(cfg: &RunConfig) -> Result<(PhaseConfig, NaturalFrequencies)> {
    let n = cfg.n.ok_or_else(|| CliError::config("missing n"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let init = match cfg
        .init
        .as_ref()
        .ok_or_else(|| CliError::config("missing [init] section"))?
    {
        InitSpec::Explicit { phases } => PhaseConfig::zero_mean(phases.clone())?,
        InitSpec::RandomArc { width } => random_arc(n, *width, &mut rng)?,
        InitSpec::NearBipolar { delta } => near_bipolar(n, *delta)?,
        InitSpec::NearSync { delta } => near_sync(n, *delta)?,
    };
    let freqs = match &cfg.omega {
        OmegaSpec::Zero => NaturalFrequencies::zero(n),
        OmegaSpec::Explicit { values } => NaturalFrequencies::zero_mean(values.clone())?,
        OmegaSpec::RandomUniform { d_omega } => random_frequencies(n, *d_omega, &mut rng)?,
    };
    Ok((init, freqs))
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    match cfg.model {
        ModelKind::GenericDgf => run_generic(cfg),
        _ => run_kuramoto(cfg),
    }
}

fn verdict_of(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "fail"
    }
}

fn opt_usize(x: Option<usize>) -> Value {
    x.map_or(Value::Null, |v| json!(v))
}

/// Sequential names: a second `diameter_decay` is reported as
/// `diameter_decay_2`.
fn certifier_labels(certs: &[CertifierSpec]) -> Vec<String> {
    let mut seen: Vec<&str> = Vec::new();
    certs
        .iter()
        .map(|c| {
            let base = c.name.as_str();
            let k = seen.iter().filter(|s| **s == base).count();
            seen.push(base);
            if k == 0 {
                base.to_string()
            } else {
                format!("{base}_{}", k + 1)
            }
        })
        .collect()
}

pub fn certifier_columns(cfg: &RunConfig) -> Vec<String> {
    certifier_labels(&cfg.certifiers)
}

fn finish_certifier(
    label: String,
    res: Result<Value>,
    out: &mut Map<String, Value>,
    verdicts: &mut Vec<Verdict>,
) -> Result<()> {
    let (verdict, body) = match res {
        Ok(mut v) => {
            let verdict = match v.get("verdict").and_then(Value::as_str) {
                Some("pass") => "pass",
                _ => "fail",
            };
            v.as_object_mut().map(|m| m.remove("verdict"));
            (verdict, v)
        }
        // A certifier whose hypotheses are not met is reported, not raised.
        Err(CliError::Model(e)) => ("error", json!({ "message": e.to_string() })),
        Err(CliError::Config(m)) => ("error", json!({ "message": m })),
        Err(e) => return Err(e),
    };
    let mut obj = match body {
        Value::Object(m) => m,
        other => {
            let mut m = Map::new();
            m.insert("detail".into(), other);
            m
        }
    };
    obj.insert("verdict".into(), json!(verdict));
    out.insert(label.clone(), Value::Object(obj));
    verdicts.push(Verdict {
        name: label,
        verdict,
    });
    Ok(())
}

fn state_json(st: &EquilibriumState) -> Value {
    json!({
        "kind": st.kind().as_str(),
        "windings": st.windings(),
        "bipolar_index": opt_usize(st.bipolar_index()),
        "phi_star": st.phi_star(),
        "phases": st.reconstruct(),
    })
}

fn class_json(c: &InitialClass) -> Value {
    json!({
        "class": c.class.as_str(),
        "bipolar_index": opt_usize(c.bipolar_index),
        "limit": c.limit.as_ref().map_or(Value::Null, state_json),
        "witness": c.witness.as_ref().map_or(Value::Null, |w| json!({
            "t_end": w.t_end,
            "grad_norm": w.grad_norm,
            "sync_diameter": w.sync_diameter,
            "residual": w.residual,
            "captured": w.captured,
        })),
    })
}

/// Classification of an identical-model initial configuration, with the
/// same defaults the `classify` subcommand uses.
pub fn classify(cfg: &RunConfig) -> Result<Value> {
    cfg.validate()?;
    if cfg.model != ModelKind::Identical {
        return Err(CliError::config("classify applies to the identical model"));
    }
    let (init, _) = initial_data(cfg)?;
    let k = cfg.coupling.expect("validated");
    let c = classify_initial(&init, k)?;
    Ok(json!({
        "n": init.len(),
        "coupling": k,
        "seed": cfg.seed,
        "initial_phases": init.phases(),
        "classification": class_json(&c),
    }))
}

struct KuramotoCtx<'a> {
    cfg: &'a RunConfig,
    init: &'a PhaseConfig,
    traj: &'a Trajectory,
    class: OnceCell<std::result::Result<InitialClass, String>>,
}

impl KuramotoCtx<'_> {
    fn coupling(&self) -> f64 {
        self.traj.params().coupling
    }

    fn classification(&self) -> Result<&InitialClass> {
        let c = self.class.get_or_init(|| {
            if self.cfg.model != ModelKind::Identical {
                return Err("classification applies to the identical model".into());
            }
            classify_initial(self.init, self.coupling()).map_err(|e| e.to_string())
        });
        c.as_ref().map_err(|m| CliError::config(m.clone()))
    }

    /// Limit state and effective phases of the run relative to it.
    fn effective(&self) -> Result<(EquilibriumState, RecordedSeries)> {
        let c = self.classification()?;
        let st = c
            .limit
            .clone()
            .ok_or_else(|| CliError::config("degenerate initial data has no limit state"))?;
        let eff = effective_series(self.traj, &st)?;
        Ok((st, eff))
    }

    fn bipolar(&self) -> Result<(usize, RecordedSeries)> {
        let (st, eff) = self.effective()?;
        let b = st
            .bipolar_index()
            .ok_or_else(|| CliError::config("initial data is not in the bipolar class"))?;
        Ok((b, eff))
    }

    /// Explicit subset, or the sync members of the limit for bipolar-class
    /// data, or everything.
    fn subset(&self, spec: &CertifierSpec) -> Result<Vec<usize>> {
        if let Some(s) = &spec.subset {
            return Ok(s.clone());
        }
        let n = self.traj.oscillators();
        if self.cfg.model == ModelKind::Identical {
            if let Ok(c) = self.classification() {
                if c.class == InitialClassKind::A2 {
                    if let Some(st) = &c.limit {
                        return Ok(st.sync_members());
                    }
                }
            }
        }
        Ok((0..n).collect())
    }
}

fn prefix<S: PhaseSeries + ?Sized>(series: &S, steps: Option<usize>) -> Result<RecordedSeries> {
    let len = steps.map_or(series.len(), |s| (s + 1).min(series.len()));
    let rows = (0..len).map(|m| series.phases_at(m).to_vec()).collect();
    Ok(RecordedSeries::new(series.step_size(), rows)?)
}

fn apply_kuramoto(ctx: &KuramotoCtx<'_>, spec: &CertifierSpec) -> Result<Value> {
    let k = ctx.coupling();
    let n = ctx.traj.oscillators();
    let floor = spec.floor.unwrap_or(RESOLUTION_FLOOR);
    let eps = spec.eps.unwrap_or(DEFAULT_EPS);
    match spec.name {
        CertifierName::Classify => {
            let c = ctx.classification()?;
            let mut v = class_json(c);
            v["verdict"] = json!(verdict_of(c.class != InitialClassKind::Degenerate));
            Ok(v)
        }
        CertifierName::MatchEquilibrium => {
            let tol = spec.tol.unwrap_or(DEFAULT_MATCH_TOL);
            let m = match_equilibrium(&ctx.traj.final_config(), tol);
            Ok(json!({
                "verdict": verdict_of(m.state().is_some()),
                "residual": m.residual(),
                "tol": tol,
                "state": m.state().map_or(Value::Null, state_json),
            }))
        }
        CertifierName::OrderPreservation => {
            let subset = ctx.subset(spec)?;
            let series = prefix(ctx.traj, spec.steps)?;
            Ok(match check_order_preservation(&series, &subset)? {
                OrderCheck::Preserved => json!({ "verdict": "pass", "subset": subset }),
                OrderCheck::Violated { step, lower, upper } => json!({
                    "verdict": "fail",
                    "subset": subset,
                    "step": step,
                    "lower": lower,
                    "upper": upper,
                }),
            })
        }
        CertifierName::DiameterDecay => {
            let subset = ctx.subset(spec)?;
            let rate = spec.rate.unwrap_or_else(|| arc_decay_rate(k, eps));
            let series = prefix(ctx.traj, spec.steps)?;
            let c = certify_diameter_decay(&series, &subset, eps, rate, floor)?;
            let worst = c.margin.iter().copied().fold(0.0f64, f64::max);
            Ok(json!({
                "verdict": verdict_of(c.passed),
                "subset": subset,
                "eps": eps,
                "rate": rate,
                "initial": c.initial,
                "max_margin": worst,
                "first_violation": opt_usize(c.first_violation),
                "resolved_at": opt_usize(c.resolved_at),
            }))
        }
        CertifierName::TwoSidedDecay => {
            let subset = ctx.subset(spec)?;
            let alpha = spec.alpha.unwrap_or_else(|| bipolar_group_rate(n, k, eps));
            let series = prefix(ctx.traj, spec.steps)?;
            let c = certify_two_sided_decay(&series, &subset, k, alpha, floor)?;
            Ok(json!({
                "verdict": verdict_of(c.passed),
                "subset": subset,
                "alpha": alpha,
                "checked_steps": c.checked_steps,
                "first_violation": c.first_violation.map_or(Value::Null, |(s, side)| json!({
                    "step": s,
                    "side": format!("{side:?}").to_lowercase(),
                })),
                "resolved_at": opt_usize(c.resolved_at),
            }))
        }
        CertifierName::BipolarContainment => {
            let (b, eff) = ctx.bipolar()?;
            let eff = prefix(&eff, spec.steps)?;
            let r = check_bipolar_containment(&eff, b)?;
            Ok(json!({
                "verdict": verdict_of(r.all_contained()),
                "bipolar_index": b,
                "checked_steps": r.contained.len(),
                "first_exit": r.first_exit.map_or(Value::Null, |(s, side)| json!({
                    "step": s,
                    "side": side.as_str(),
                })),
            }))
        }
        CertifierName::BipolarBounds => {
            let (b, eff) = ctx.bipolar()?;
            let eff = prefix(&eff, spec.steps)?;
            let alpha = spec.alpha.unwrap_or_else(|| bipolar_group_rate(n, k, eps));
            let c = certify_bipolar_bounds(&eff, b, alpha, eps, floor)?;
            Ok(json!({
                "verdict": verdict_of(c.passed),
                "bipolar_index": b,
                "alpha": alpha,
                "eps": eps,
                "checked_steps": c.checked_steps,
                "first_violation": c.first_violation.map_or(Value::Null, |(s, j)| json!({
                    "step": s,
                    "oscillator": j,
                })),
                "resolved_at": opt_usize(c.resolved_at),
            }))
        }
        CertifierName::ErrorBound => {
            let traj = ctx.traj;
            let h = traj.params().step_size;
            let t_end = traj.time(traj.len() - 1);
            let oracle = rk4_reference(ctx.init, traj.freqs(), k, t_end, h / 10.0)?;
            let lip = 2.0 * k;
            let r = euler_error_bound(traj, &oracle, lip)?;
            let max_err = r.observed_error.iter().copied().fold(0.0f64, f64::max);
            Ok(json!({
                "verdict": verdict_of(r.holds),
                "lipschitz": lip,
                "truncation_max": r.truncation_max,
                "max_observed_error": max_err,
                "final_bound": r.bound_curve.last().copied().unwrap_or(0.0),
                "max_excursion": r.max_excursion,
                "first_violation": opt_usize(r.first_violation),
            }))
        }
        CertifierName::ClusterInvariance => {
            let n0 = spec
                .n0
                .ok_or_else(|| CliError::config("cluster_invariance needs n0"))?;
            let l = spec
                .l
                .ok_or_else(|| CliError::config("cluster_invariance needs l"))?;
            let cs = cluster_spec(n, n0, l, ctx.traj.freqs().d_omega(), k)?;
            let c = certify_cluster_invariance(ctx.traj, &cs)?;
            Ok(json!({
                "verdict": verdict_of(c.passed),
                "n0": n0,
                "l": l,
                "k_min": cs.k_min,
                "h_max": cs.h_max,
                "coupling_sufficient": cs.coupling_sufficient,
                "max_diameter": c.max_diameter,
                "first_violation": opt_usize(c.first_violation),
            }))
        }
        CertifierName::UniformBound => {
            let l = spec
                .l
                .ok_or_else(|| CliError::config("uniform_bound needs l"))?;
            let c = certify_uniform_bound(ctx.traj, l);
            Ok(json!({
                "verdict": verdict_of(c.passed),
                "bound": c.bound,
                "max_diameter": c.max_diameter,
                "first_violation": opt_usize(c.first_violation),
            }))
        }
        CertifierName::DecayFit => {
            let subset = ctx.subset(spec)?;
            let d: Vec<f64> = (0..ctx.traj.len())
                .map(|m| {
                    let p = ctx.traj.phases_at(m);
                    let (lo, hi) = subset
                        .iter()
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &j| {
                            (a.min(p[j]), b.max(p[j]))
                        });
                    hi - lo
                })
                .collect();
            let window = spec.window.map_or(0..d.len(), |[a, b]| a..b.min(d.len()));
            let fit = fit_decay_rate(&d, ctx.traj.params().step_size, window.clone())?
                .with_bounds(spec.rate, None);
            Ok(json!({
                "verdict": verdict_of(!fit.degenerate && fit.within_bounds()),
                "subset": subset,
                "window": [window.start, window.end],
                "alpha_fit": fit.alpha_fit,
                "r_squared": fit.r_squared,
                "std_error": fit.std_error,
                "degenerate": fit.degenerate,
                "points": fit.points,
                "rate_floor": spec.rate,
            }))
        }
        CertifierName::Descent | CertifierName::Summability | CertifierName::Lojasiewicz => {
            Err(CliError::config("certifier applies only to generic_dgf"))
        }
    }
}

fn kuramoto_columns(n: usize) -> Vec<String> {
    let mut c = vec!["n".to_string(), "t".to_string()];
    c.extend((0..n).map(|i| format!("theta_{i}")));
    c.extend(
        ["diameter", "potential", "grad_norm", "order_r", "order_phi"]
            .iter()
            .map(|s| s.to_string()),
    );
    c
}

fn keep_row(m: usize, last: usize, stride: usize) -> bool {
    m.is_multiple_of(stride) || m == last
}

fn run_kuramoto(cfg: &RunConfig) -> Result<RunOutput> {
    let (init, freqs) = initial_data(cfg)?;
    let k = cfg.coupling.expect("validated");
    let params = SimParams::new(k, cfg.step)?
        .with_max_steps(cfg.effective_max_steps())
        .with_conv_tol(cfg.conv_tol)?;
    let stop = match cfg.stop {
        StopKind::GradNorm => StopRule::GradNorm,
        StopKind::MaxSteps => StopRule::MaxSteps,
        StopKind::Diameter => StopRule::Diameter(cfg.stop_tol.expect("validated")),
    };
    let traj = simulate(&init, &freqs, &params, stop)?;

    let ctx = KuramotoCtx {
        cfg,
        init: &init,
        traj: &traj,
        class: OnceCell::new(),
    };
    let mut certs = Map::new();
    let mut verdicts = Vec::new();
    for (label, spec) in certifier_labels(&cfg.certifiers)
        .into_iter()
        .zip(&cfg.certifiers)
    {
        finish_certifier(label, apply_kuramoto(&ctx, spec), &mut certs, &mut verdicts)?;
    }

    let last = traj.len() - 1;
    let fin = traj.final_config();
    let diag = traj.diagnostics()[last];
    let equilibrium = if cfg.model == ModelKind::Identical {
        match match_equilibrium(&fin, DEFAULT_MATCH_TOL) {
            MatchOutcome::Matched { state, residual } => {
                let mut v = state_json(&state);
                v["residual"] = json!(residual);
                v
            }
            MatchOutcome::Unconverged { .. } => Value::Null,
        }
    } else {
        Value::Null
    };
    let classification = match ctx.class.get() {
        Some(Ok(c)) => class_json(c),
        _ => Value::Null,
    };

    let report = json!({
        "config": serde_json::to_value(cfg)?,
        "initial": { "phases": init.phases(), "omega": freqs.omega() },
        "summary": {
            "steps_run": traj.steps_run(),
            "stop_reason": traj.stop_reason().as_str(),
            "final_phases": fin.phases(),
            "final_diameter": diag.diameter,
            "final_potential": diag.potential,
            "final_grad_norm": diag.grad_norm,
            "final_order_r": diag.order_r,
            "final_order_phi": diag.order_phi,
        },
        "classification": classification,
        "equilibrium": equilibrium,
        "certifiers": Value::Object(certs),
    });

    let mut table = Table {
        columns: kuramoto_columns(init.len()),
        rows: Vec::new(),
    };
    if cfg.output.trajectory {
        let h = params.step_size;
        for (m, d) in traj.diagnostics().iter().enumerate() {
            if !keep_row(m, last, cfg.output.stride) {
                continue;
            }
            let mut row = Vec::with_capacity(init.len() + 6);
            row.push(m as f64 * h);
            row.extend_from_slice(traj.phases_at(m));
            row.extend([d.diameter, d.potential, d.grad_norm, d.order_r, d.order_phi]);
            table.rows.push((m as u64, row));
        }
    }

    Ok(RunOutput {
        report,
        table,
        steps_run: traj.steps_run(),
        stop_reason: traj.stop_reason().as_str().to_string(),
        final_grad_norm: diag.grad_norm,
        verdicts,
    })
}

fn build_problem(kind: PotentialKind, dim: usize, half_width: f64) -> Result<DgfProblem> {
    Ok(match kind {
        PotentialKind::Quadratic => DgfProblem::quadratic(dim, half_width)?,
        PotentialKind::DoubleWell => DgfProblem::double_well(half_width)?,
        PotentialKind::Quartic => DgfProblem::quartic(half_width)?,
    })
}

fn apply_generic(problem: &DgfProblem, res: &DgfResult, spec: &CertifierSpec) -> Result<Value> {
    let h = res.h;
    match spec.name {
        CertifierName::Descent => {
            let c = certify_descent(problem, res, h)?;
            Ok(json!({
                "verdict": verdict_of(c.passed),
                "hessian_bound": problem.hessian_bound(),
                "step_limit": problem.step_limit(),
                "min_slack": c.min_slack,
                "worst_step": opt_usize(c.worst_step),
            }))
        }
        CertifierName::Summability => {
            let s = grad_norm_summability(res, h, problem.hessian_bound());
            Ok(json!({
                "verdict": verdict_of(s.holds),
                "weighted_sum": s.weighted_sum,
                "f_drop": s.f_drop,
            }))
        }
        CertifierName::Lojasiewicz => {
            let radius = spec.radius.unwrap_or(DEFAULT_PROBE_RADIUS);
            let samples = spec.samples.unwrap_or(DEFAULT_PROBE_SAMPLES);
            let p = lojasiewicz_probe(problem, &res.final_point, radius, samples)?;
            Ok(json!({
                "verdict": verdict_of(p.constant_estimate > 0.0),
                "radius": p.radius,
                "exponent_estimate": p.exponent_estimate,
                "constant_estimate": p.constant_estimate,
                "fitted_slope": p.fitted_slope,
                "sample_count": p.sample_count,
            }))
        }
        _ => Err(CliError::config("certifier does not apply to generic_dgf")),
    }
}

fn run_generic(cfg: &RunConfig) -> Result<RunOutput> {
    let pot = cfg.potential.as_ref().expect("validated");
    let dim = pot.x0.len();
    let problem = build_problem(pot.kind, dim, pot.half_width)?;
    check_step_guard(&problem, cfg.step, pot.allow_large_step)?;
    let tol = match cfg.stop {
        StopKind::MaxSteps => 0.0,
        _ => cfg.conv_tol,
    };
    let mut points: Vec<Vec<f64>> = Vec::new();
    let keep = cfg.output.trajectory;
    let res = dgf_run_with(
        &problem,
        &pot.x0,
        cfg.step,
        cfg.effective_max_steps(),
        tol,
        |_, x| {
            if keep {
                points.push(x.to_vec());
            }
        },
    )
    .map_err(|e| match e {
        kdgf::Error::NonFinite(what) => CliError::Divergence(format!("non-finite {what}")),
        other => other.into(),
    })?;

    let mut certs = Map::new();
    let mut verdicts = Vec::new();
    for (label, spec) in certifier_labels(&cfg.certifiers)
        .into_iter()
        .zip(&cfg.certifiers)
    {
        finish_certifier(
            label,
            apply_generic(&problem, &res, spec),
            &mut certs,
            &mut verdicts,
        )?;
    }

    let last_summary = *res.iterates_summary.last().expect("at least one iterate");
    let steps = res.steps() as u64;
    let stop_reason = if res.exited_domain {
        "exited_domain"
    } else if res.converged {
        "grad_norm"
    } else {
        "max_steps"
    };
    let report = json!({
        "config": serde_json::to_value(cfg)?,
        "problem": {
            "name": problem.name(),
            "dim": dim,
            "hessian_bound": problem.hessian_bound(),
            "step_limit": problem.step_limit(),
            "h_admissible": res.h_admissible,
        },
        "summary": {
            "steps_run": steps,
            "stop_reason": stop_reason,
            "converged": res.converged,
            "exited_domain": res.exited_domain,
            "descent_certified": res.descent_certified,
            "final_point": res.final_point,
            "final_f_value": last_summary.f_value,
            "final_grad_norm": last_summary.grad_norm,
        },
        "certifiers": Value::Object(certs),
    });

    let mut columns = vec!["n".to_string(), "t".to_string()];
    columns.extend((0..dim).map(|i| format!("x_{i}")));
    columns.extend(["f_value".to_string(), "grad_norm".to_string()]);
    let mut table = Table {
        columns,
        rows: Vec::new(),
    };
    let last = points.len().saturating_sub(1);
    for (m, (x, s)) in points.iter().zip(&res.iterates_summary).enumerate() {
        if !keep_row(m, last, cfg.output.stride) {
            continue;
        }
        let mut row = Vec::with_capacity(dim + 3);
        row.push(m as f64 * cfg.step);
        row.extend_from_slice(x);
        row.extend([s.f_value, s.grad_norm]);
        table.rows.push((m as u64, row));
    }

    Ok(RunOutput {
        report,
        table,
        steps_run: steps,
        stop_reason: stop_reason.to_string(),
        final_grad_norm: last_summary.grad_norm,
        verdicts,
    })
}
