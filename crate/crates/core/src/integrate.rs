//! Forward-Euler stepping, an RK4 reference for the continuous flow and the
//! global error bound evaluator.

use crate::error::{Error, Result};
use crate::model::{
    gradient_into, max_abs, norm2, norm_inf, order_parameter_of, potential_of, spread,
    NaturalFrequencies, PhaseConfig, SimParams,
};

/// Any |theta_i| above this aborts a run.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Read access to a recorded sequence of phase vectors.
pub trait PhaseSeries {
    fn oscillators(&self) -> usize;
    /// Number of recorded configurations (steps run + 1).
    fn len(&self) -> usize;
    fn phases_at(&self, n: usize) -> &[f64];
    fn step_size(&self) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A plain phase series, used for effective phases and hand-built inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordedSeries {
    n: usize,
    h: f64,
    data: Vec<f64>,
}

impl RecordedSeries {
    pub fn new(step_size: f64, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.first().map(Vec::len).ok_or(Error::EmptyIndexSet)?;
        let mut data = Vec::with_capacity(n * rows.len());
        for r in &rows {
            if r.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Self {
            n,
            h: step_size,
            data,
        })
    }

    pub(crate) fn from_flat(n: usize, h: f64, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len() % n, 0);
        Self { n, h, data }
    }
}

impl PhaseSeries for RecordedSeries {
    fn oscillators(&self) -> usize {
        self.n
    }
    fn len(&self) -> usize {
        self.data.len() / self.n
    }
    fn phases_at(&self, n: usize) -> &[f64] {
        &self.data[n * self.n..(n + 1) * self.n]
    }
    fn step_size(&self) -> f64 {
        self.h
    }
}

fn check_inputs(config: &PhaseConfig, freqs: &NaturalFrequencies) -> Result<()> {
    if config.len() != freqs.len() {
        return Err(Error::LengthMismatch {
            expected: config.len(),
            found: freqs.len(),
        });
    }
    Ok(())
}

/// out = x - h * g, with g the gradient at x. `grad` is scratch space and
/// holds g on return.
#[inline]
pub(crate) fn euler_into(
    x: &[f64],
    omega: &[f64],
    coupling: f64,
    h: f64,
    grad: &mut [f64],
    out: &mut [f64],
) {
    gradient_into(x, omega, coupling, grad);
    descend(x, grad, h, out);
}

#[inline]
pub(crate) fn descend(x: &[f64], g: &[f64], h: f64, out: &mut [f64]) {
    for ((o, &xi), &gi) in out.iter_mut().zip(x).zip(g) {
        *o = xi - h * gi;
    }
}

pub fn euler_step(
    config: &PhaseConfig,
    freqs: &NaturalFrequencies,
    params: &SimParams,
) -> Result<PhaseConfig> {
    check_inputs(config, freqs)?;
    params.validate()?;
    let n = config.len();
    let mut g = vec![0.0; n];
    let mut out = vec![0.0; n];
    euler_into(
        config.phases(),
        freqs.omega(),
        params.coupling,
        params.step_size,
        &mut g,
        &mut out,
    );
    PhaseConfig::at_step(out, config.step() + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    MaxSteps,
    /// Stop once the gradient 2-norm drops below `params.conv_tol`.
    GradNorm,
    /// Stop once the full diameter drops below the given tolerance.
    Diameter(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxSteps,
    GradNorm,
    Diameter,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::MaxSteps => "max_steps",
            StopReason::GradNorm => "grad_norm",
            StopReason::Diameter => "diameter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub diameter: f64,
    pub potential: f64,
    pub grad_norm: f64,
    pub order_r: f64,
    pub order_phi: f64,
}

/// An Euler run: every configuration plus per-step diagnostics.
#[derive(Debug, Clone)]
pub struct Trajectory {
    n: usize,
    data: Vec<f64>,
    diagnostics: Vec<StepDiagnostics>,
    params: SimParams,
    freqs: NaturalFrequencies,
    stop: StopReason,
}

impl Trajectory {
    pub fn config(&self, n: usize) -> PhaseConfig {
        PhaseConfig::at_step(self.phases_at(n).to_vec(), n as u64)
            .expect("recorded phases are finite")
    }

    pub fn final_config(&self) -> PhaseConfig {
        self.config(self.len() - 1)
    }

    pub fn steps_run(&self) -> u64 {
        (self.len() - 1) as u64
    }

    pub fn diagnostics(&self) -> &[StepDiagnostics] {
        &self.diagnostics
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn freqs(&self) -> &NaturalFrequencies {
        &self.freqs
    }

    pub fn stop_reason(&self) -> StopReason {
        self.stop
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.params.step_size
    }

    /// Recomputes every step and compares bitwise.
    pub fn replay_matches(&self) -> bool {
        let n = self.n;
        let mut g = vec![0.0; n];
        let mut next = vec![0.0; n];
        (0..self.len() - 1).all(|k| {
            euler_into(
                self.phases_at(k),
                self.freqs.omega(),
                self.params.coupling,
                self.params.step_size,
                &mut g,
                &mut next,
            );
            next == self.phases_at(k + 1)
        })
    }
}

impl PhaseSeries for Trajectory {
    fn oscillators(&self) -> usize {
        self.n
    }
    fn len(&self) -> usize {
        self.diagnostics.len()
    }
    fn phases_at(&self, n: usize) -> &[f64] {
        &self.data[n * self.n..(n + 1) * self.n]
    }
    fn step_size(&self) -> f64 {
        self.params.step_size
    }
}

fn diagnose(x: &[f64], omega: &[f64], coupling: f64, grad: &[f64]) -> StepDiagnostics {
    let op = order_parameter_of(x);
    StepDiagnostics {
        diameter: spread(x),
        potential: potential_of(x, omega, coupling),
        grad_norm: norm2(grad),
        order_r: op.r,
        order_phi: op.phi,
    }
}

pub fn simulate(
    init: &PhaseConfig,
    freqs: &NaturalFrequencies,
    params: &SimParams,
    stop: StopRule,
) -> Result<Trajectory> {
    check_inputs(init, freqs)?;
    params.validate()?;
    if let StopRule::Diameter(tol) = stop {
        if !(tol > 0.0) {
            return Err(Error::invalid("diameter tolerance must be positive"));
        }
    }
    let n = init.len();
    let (k, h) = (params.coupling, params.step_size);
    let omega = freqs.omega();
    let mut data = init.phases().to_vec();
    let mut diagnostics = Vec::new();
    let mut g = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut step: u64 = 0;
    let reason = loop {
        let base = step as usize * n;
        let x = &data[base..base + n];
        gradient_into(x, omega, k, &mut g);
        let d = diagnose(x, omega, k, &g);
        diagnostics.push(d);
        match stop {
            StopRule::GradNorm if d.grad_norm < params.conv_tol => break StopReason::GradNorm,
            StopRule::Diameter(tol) if d.diameter < tol => break StopReason::Diameter,
            _ => {}
        }
        if step >= params.max_steps {
            break StopReason::MaxSteps;
        }
        descend(x, &g, h, &mut next);
        let m = max_abs(&next);
        if !(m <= DIVERGENCE_LIMIT) {
            return Err(Error::Divergence {
                step: step + 1,
                max_abs: m,
            });
        }
        data.extend_from_slice(&next);
        step += 1;
    };
    Ok(Trajectory {
        n,
        data,
        diagnostics,
        params: *params,
        freqs: freqs.clone(),
        stop: reason,
    })
}

pub(crate) struct Rk4Stepper<'a> {
    omega: &'a [f64],
    coupling: f64,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl<'a> Rk4Stepper<'a> {
    pub(crate) fn new(omega: &'a [f64], coupling: f64) -> Self {
        let n = omega.len();
        Self {
            omega,
            coupling,
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }

    /// Velocity is the negated gradient.
    fn field(&self, y: &[f64], out: &mut [f64]) {
        gradient_into(y, self.omega, self.coupling, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }

    pub(crate) fn step(&mut self, y: &mut [f64], dt: f64) {
        let mut k1 = std::mem::take(&mut self.k1);
        let mut k2 = std::mem::take(&mut self.k2);
        let mut k3 = std::mem::take(&mut self.k3);
        let mut k4 = std::mem::take(&mut self.k4);
        let mut tmp = std::mem::take(&mut self.tmp);
        self.field(y, &mut k1);
        axpy(y, 0.5 * dt, &k1, &mut tmp);
        self.field(&tmp, &mut k2);
        axpy(y, 0.5 * dt, &k2, &mut tmp);
        self.field(&tmp, &mut k3);
        axpy(y, dt, &k3, &mut tmp);
        self.field(&tmp, &mut k4);
        for i in 0..y.len() {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.k1 = k1;
        self.k2 = k2;
        self.k3 = k3;
        self.k4 = k4;
        self.tmp = tmp;
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64], out: &mut [f64]) {
    for i in 0..y.len() {
        out[i] = y[i] + a * x[i];
    }
}

/// RK4 solution of the continuous model with linear dense output.
#[derive(Debug, Clone)]
pub struct Rk4Reference {
    n: usize,
    dt: f64,
    t_end: f64,
    knots: Vec<f64>,
}

impl Rk4Reference {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let slack = 1e-9 * self.t_end.max(1.0);
        if !(t >= 0.0 && t <= self.t_end + slack) {
            return Err(Error::HorizonMismatch {
                needed: t,
                covered: self.t_end,
            });
        }
        let steps = self.knots.len() / self.n - 1;
        let s = (t / self.dt).clamp(0.0, steps as f64);
        let i = (s.floor() as usize).min(steps);
        let w = s - i as f64;
        let a = &self.knots[i * self.n..(i + 1) * self.n];
        if i == steps || w == 0.0 {
            return Ok(a.to_vec());
        }
        let b = &self.knots[(i + 1) * self.n..(i + 2) * self.n];
        Ok(a.iter().zip(b).map(|(&a, &b)| a + w * (b - a)).collect())
    }

    pub fn at(&self, t: f64) -> Result<PhaseConfig> {
        PhaseConfig::new(self.eval(t)?)
    }
}

/// `dt` is shrunk so that an integer number of steps lands on `t_end`.
pub fn rk4_reference(
    init: &PhaseConfig,
    freqs: &NaturalFrequencies,
    coupling: f64,
    t_end: f64,
    dt: f64,
) -> Result<Rk4Reference> {
    check_inputs(init, freqs)?;
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::invalid("t_end must be positive"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    if !coupling.is_finite() {
        return Err(Error::NonFinite("coupling"));
    }
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let n = init.len();
    let mut knots = Vec::with_capacity((steps + 1) * n);
    let mut y = init.phases().to_vec();
    knots.extend_from_slice(&y);
    let mut stepper = Rk4Stepper::new(freqs.omega(), coupling);
    for _ in 0..steps {
        stepper.step(&mut y, dt);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("RK4 state"));
        }
        knots.extend_from_slice(&y);
    }
    Ok(Rk4Reference {
        n,
        dt,
        t_end,
        knots,
    })
}

#[derive(Debug, Clone)]
pub struct ErrorBoundReport {
    /// Per-transition local truncation ||f(y(nh)) - (y((n+1)h) - y(nh))/h||.
    pub truncation: Vec<f64>,
    pub truncation_max: f64,
    pub lipschitz: f64,
    pub bound_curve: Vec<f64>,
    pub observed_error: Vec<f64>,
    pub holds: bool,
    pub first_violation: Option<usize>,
    /// max_n ||y_n - y_0||, the a-posteriori radius of the ball the iterates
    /// actually occupied.
    pub max_excursion: f64,
}

pub const BOUND_REL_TOL: f64 = 1e-6;

pub fn euler_error_bound(
    traj: &Trajectory,
    oracle: &Rk4Reference,
    lipschitz: f64,
) -> Result<ErrorBoundReport> {
    if !(lipschitz.is_finite() && lipschitz > 0.0) {
        return Err(Error::invalid("Lipschitz constant must be positive"));
    }
    if oracle.n != traj.oscillators() {
        return Err(Error::LengthMismatch {
            expected: traj.oscillators(),
            found: oracle.n,
        });
    }
    let h = traj.step_size();
    let last = traj.len() - 1;
    let t_last = last as f64 * h;
    if oracle.t_end < t_last * (1.0 - 1e-12) {
        return Err(Error::HorizonMismatch {
            needed: t_last,
            covered: oracle.t_end,
        });
    }
    if oracle.eval(0.0)? != traj.phases_at(0) {
        return Err(Error::precondition(
            "oracle and trajectory start from different data",
        ));
    }
    let omega = traj.freqs().omega();
    let k = traj.params().coupling;
    let n = traj.oscillators();
    let ys: Vec<Vec<f64>> = (0..=last)
        .map(|i| oracle.eval(i as f64 * h))
        .collect::<Result<_>>()?;

    let mut g = vec![0.0; n];
    let mut truncation = Vec::with_capacity(last);
    for i in 0..last {
        gradient_into(&ys[i], omega, k, &mut g);
        let mut worst = 0.0f64;
        for c in 0..n {
            let diff = (ys[i + 1][c] - ys[i][c]) / h;
            worst = worst.max((-g[c] - diff).abs());
        }
        truncation.push(worst);
    }
    let truncation_max = truncation.iter().fold(0.0f64, |m, &x| m.max(x));

    let mut bound_curve = Vec::with_capacity(last + 1);
    let mut observed_error = Vec::with_capacity(last + 1);
    let mut first_violation = None;
    let y0 = traj.phases_at(0);
    let mut max_excursion = 0.0f64;
    for (i, y) in ys.iter().enumerate().take(last + 1) {
        let b = truncation_max / lipschitz * (lipschitz * i as f64 * h).exp_m1();
        let x = traj.phases_at(i);
        let e = norm_inf(&y.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>());
        if first_violation.is_none() && e > b * (1.0 + BOUND_REL_TOL) {
            first_violation = Some(i);
        }
        max_excursion = max_excursion.max(
            x.iter()
                .zip(y0)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())),
        );
        bound_curve.push(b);
        observed_error.push(e);
    }
    Ok(ErrorBoundReport {
        truncation,
        truncation_max,
        lipschitz,
        bound_curve,
        observed_error,
        holds: first_violation.is_none(),
        first_violation,
        max_excursion,
    })
}
