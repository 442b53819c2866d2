use std::f64::consts::PI;

use super::equilibrium::{
    bipolar_candidate, match_equilibrium, EquilibriumKind, EquilibriumState, MatchOutcome,
};
use crate::error::{Error, Result};
use crate::integrate::Rk4Stepper;
use crate::model::{
    gradient_into, norm2, order_parameter_of, subset_diameter, NaturalFrequencies, PhaseConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialClassKind {
    A1,
    A2,
    Degenerate,
}

impl InitialClassKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitialClassKind::A1 => "A1",
            InitialClassKind::A2 => "A2",
            InitialClassKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassWitness {
    /// Continuous time at which the reference run stopped.
    pub t_end: f64,
    pub grad_norm: f64,
    /// Diameter of the synchronized group's effective phases at t_end.
    pub sync_diameter: f64,
    /// Sup-norm distance to the identified limit state.
    pub residual: f64,
    /// The run was stopped on entering a neighbourhood of a bipolar state.
    pub captured: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialClass {
    pub class: InitialClassKind,
    pub bipolar_index: Option<usize>,
    pub limit: Option<EquilibriumState>,
    pub witness: Option<ClassWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    /// RK4 step; defaults to 0.01 / K.
    pub dt: Option<f64>,
    /// Horizon; defaults to 1000 / K.
    pub t_max: Option<f64>,
    pub grad_tol: f64,
    /// Residual below which the run counts as captured by a bipolar state.
    pub capture_tol: f64,
    pub degenerate_tol: f64,
    /// Residual accepted when matching the limit at grad_tol.
    pub match_tol: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            dt: None,
            t_max: None,
            grad_tol: 1e-10,
            capture_tol: 1e-4,
            degenerate_tol: 1e-12,
            match_tol: 1e-6,
        }
    }
}

pub fn classify_initial(init: &PhaseConfig, coupling: f64) -> Result<InitialClass> {
    classify_initial_with(init, coupling, &ClassifyOptions::default())
}

fn wrapped(d: f64) -> f64 {
    let r = d.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

fn degenerate() -> InitialClass {
    InitialClass {
        class: InitialClassKind::Degenerate,
        bipolar_index: None,
        limit: None,
        witness: None,
    }
}

/// Runs the continuous flow from `init` until it is either at a phase-locked
/// state (gradient below `grad_tol`) or within `capture_tol` of a bipolar
/// state. The bipolar states are saddles, so a run started in their stable
/// set gets close but is eventually pushed off by rounding; the capture rule
/// records that visit as the bipolar class.
pub fn classify_initial_with(
    init: &PhaseConfig,
    coupling: f64,
    opts: &ClassifyOptions,
) -> Result<InitialClass> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::invalid("coupling K must be positive"));
    }
    let phases = init.phases();
    let n = phases.len();
    let mean = init.mean();
    if mean.abs() > 1e-10 * init.max_abs().max(1.0) {
        return Err(Error::precondition(format!(
            "initial data must have zero mean (mean = {mean:e})"
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if wrapped(phases[j] - phases[i]).abs() < opts.degenerate_tol {
                return Ok(degenerate());
            }
        }
    }
    if order_parameter_of(phases).r < opts.degenerate_tol {
        return Ok(degenerate());
    }

    let dt = opts.dt.unwrap_or(0.01 / coupling);
    let t_max = opts.t_max.unwrap_or(1000.0 / coupling);
    if !(dt > 0.0 && t_max > 0.0) {
        return Err(Error::invalid("dt and t_max must be positive"));
    }
    let omega = NaturalFrequencies::zero(n);
    let mut stepper = Rk4Stepper::new(omega.omega(), coupling);
    let mut y = phases.to_vec();
    let mut g = vec![0.0; n];
    // |g|_2 <= sqrt(N) |g|_inf <= 2K sqrt(N) * residual
    let capture_gate = 2.0 * coupling * (n as f64).sqrt() * opts.capture_tol;
    let mut t = 0.0;
    let mut steps: u64 = 0;
    loop {
        gradient_into(&y, omega.omega(), coupling, &mut g);
        let gn = norm2(&g);
        if gn < opts.grad_tol {
            let cfg = PhaseConfig::new(y.clone())?;
            return match match_equilibrium(&cfg, opts.match_tol) {
                MatchOutcome::Matched { state, residual } => {
                    Ok(finish(&y, state, t, gn, residual, false))
                }
                MatchOutcome::Unconverged { .. } => {
                    Err(Error::UnresolvedClassification { t, grad_norm: gn })
                }
            };
        }
        if gn <= capture_gate {
            let hit = (0..n)
                .filter_map(|b| bipolar_candidate(&y, b))
                .find(|(_, r)| *r < opts.capture_tol);
            if let Some((state, residual)) = hit {
                return Ok(finish(&y, state, t, gn, residual, true));
            }
        }
        if t >= t_max {
            return Err(Error::UnresolvedClassification { t, grad_norm: gn });
        }
        stepper.step(&mut y, dt);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reference state"));
        }
        steps += 1;
        t = steps as f64 * dt;
    }
}

fn finish(
    y: &[f64],
    state: EquilibriumState,
    t: f64,
    grad_norm: f64,
    residual: f64,
    captured: bool,
) -> InitialClass {
    let members = state.sync_members();
    let cfg = PhaseConfig::new(y.to_vec()).expect("finite state");
    let eff = super::effective_phases(&cfg, &state).expect("matching lengths");
    let sync_diameter = subset_diameter(&eff, Some(&members)).unwrap_or(0.0);
    let (class, bipolar_index) = match state.kind() {
        EquilibriumKind::Sync => (InitialClassKind::A1, None),
        EquilibriumKind::Bipolar => (InitialClassKind::A2, state.bipolar_index()),
    };
    InitialClass {
        class,
        bipolar_index,
        limit: Some(state),
        witness: Some(ClassWitness {
            t_end: t,
            grad_norm,
            sync_diameter,
            residual,
            captured,
        }),
    }
}
