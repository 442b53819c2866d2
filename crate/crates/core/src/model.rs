//! Phase configurations, natural frequencies, the order parameter and the
//! Kuramoto potential/gradient pair.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::{compensated_sum, NeumaierSum};

/// Below this magnitude the mean-field angle is meaningless.
pub const DEGENERATE_ORDER_R: f64 = 1e-14;

/// Phases of N oscillators on the unwrapped real line.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    phases: Vec<f64>,
    step: u64,
}

impl PhaseConfig {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        Self::at_step(phases, 0)
    }

    pub fn at_step(phases: Vec<f64>, step: u64) -> Result<Self> {
        if phases.len() < 2 {
            return Err(Error::TooFewOscillators {
                min: 2,
                found: phases.len(),
            });
        }
        if phases.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("phases"));
        }
        Ok(Self { phases, step })
    }

    /// Shifts the phases so that they sum to (numerically) zero.
    pub fn zero_mean(mut phases: Vec<f64>) -> Result<Self> {
        if phases.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("phases"));
        }
        if !phases.is_empty() {
            let m = compensated_sum(phases.iter().copied()) / phases.len() as f64;
            phases.iter_mut().for_each(|x| *x -= m);
        }
        Self::new(phases)
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn into_phases(self) -> Vec<f64> {
        self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.phases.iter().copied()) / self.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.phases)
    }
}

/// Intrinsic frequencies with zero mean.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalFrequencies {
    omega: Vec<f64>,
    d_omega: f64,
}

impl NaturalFrequencies {
    pub fn new(omega: Vec<f64>) -> Result<Self> {
        if omega.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if omega.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("natural frequencies"));
        }
        let mean = compensated_sum(omega.iter().copied()) / omega.len() as f64;
        let scale = max_abs(&omega).max(1.0);
        if mean.abs() > 1e-12 * scale {
            return Err(Error::invalid(format!(
                "natural frequencies must have zero mean (mean = {mean:e})"
            )));
        }
        let d_omega = spread(&omega);
        Ok(Self { omega, d_omega })
    }

    /// Removes the mean before validating.
    pub fn zero_mean(mut omega: Vec<f64>) -> Result<Self> {
        if omega.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("natural frequencies"));
        }
        if !omega.is_empty() {
            let m = compensated_sum(omega.iter().copied()) / omega.len() as f64;
            omega.iter_mut().for_each(|x| *x -= m);
        }
        Self::new(omega)
    }

    pub fn zero(n: usize) -> Self {
        Self {
            omega: vec![0.0; n],
            d_omega: 0.0,
        }
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn d_omega(&self) -> f64 {
        self.d_omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn is_identical(&self) -> bool {
        self.omega.iter().all(|&w| w == 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub coupling: f64,
    pub step_size: f64,
    pub max_steps: u64,
    pub conv_tol: f64,
}

impl SimParams {
    pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;
    pub const DEFAULT_CONV_TOL: f64 = 1e-10;

    pub fn new(coupling: f64, step_size: f64) -> Result<Self> {
        let p = Self {
            coupling,
            step_size,
            max_steps: Self::DEFAULT_MAX_STEPS,
            conv_tol: Self::DEFAULT_CONV_TOL,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_conv_tol(mut self, conv_tol: f64) -> Result<Self> {
        self.conv_tol = conv_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling.is_finite() && self.coupling > 0.0) {
            return Err(Error::invalid("coupling K must be positive and finite"));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::invalid("step size h must be positive and finite"));
        }
        if !(self.conv_tol.is_finite() && self.conv_tol > 0.0) {
            return Err(Error::invalid("conv_tol must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParameter {
    pub r: f64,
    pub phi: f64,
    /// Set when r is too small for phi to carry information; phi is then 0.
    pub degenerate: bool,
}

pub fn order_parameter(config: &PhaseConfig) -> OrderParameter {
    order_parameter_of(config.phases())
}

pub(crate) fn order_parameter_of(phases: &[f64]) -> OrderParameter {
    let n = phases.len() as f64;
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for &t in phases {
        let (s, c) = t.sin_cos();
        re.add(c);
        im.add(s);
    }
    let (re, im) = (re.total() / n, im.total() / n);
    let r = re.hypot(im).min(1.0);
    if r < DEGENERATE_ORDER_R {
        return OrderParameter {
            r,
            phi: 0.0,
            degenerate: true,
        };
    }
    let mut phi = im.atan2(re);
    if phi <= -PI {
        phi = PI;
    }
    OrderParameter {
        r,
        phi,
        degenerate: false,
    }
}

/// max - min over `subset` (all indices when `None`).
pub fn diameter(config: &PhaseConfig, subset: Option<&[usize]>) -> Result<f64> {
    subset_diameter(config.phases(), subset)
}

pub(crate) fn subset_diameter(phases: &[f64], subset: Option<&[usize]>) -> Result<f64> {
    match subset {
        None => Ok(spread(phases)),
        Some([]) => Err(Error::EmptyIndexSet),
        Some(idx) => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &i in idx {
                let x = *phases.get(i).ok_or(Error::IndexOutOfRange {
                    index: i,
                    len: phases.len(),
                })?;
                lo = lo.min(x);
                hi = hi.max(x);
            }
            Ok(hi - lo)
        }
    }
}

pub(crate) fn spread(xs: &[f64]) -> f64 {
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if xs.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

pub(crate) fn max_abs(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// V = -sum_j w_j t_j + (K/2N) sum_{i,j} (1 - cos(t_j - t_i)).
///
/// The pair term is evaluated as 2 sin^2(d/2) over i < j, which is exactly 0
/// at synchrony and avoids cancellation near it.
pub fn kuramoto_potential(
    config: &PhaseConfig,
    freqs: &NaturalFrequencies,
    coupling: f64,
) -> Result<f64> {
    check_len(config.len(), freqs.len())?;
    Ok(potential_of(config.phases(), freqs.omega(), coupling))
}

pub(crate) fn potential_of(phases: &[f64], omega: &[f64], coupling: f64) -> f64 {
    let n = phases.len();
    let linear = compensated_sum(phases.iter().zip(omega).map(|(t, w)| -w * t));
    let mut pair = NeumaierSum::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (0.5 * (phases[j] - phases[i])).sin();
            pair.add(2.0 * s * s);
        }
    }
    linear + coupling / n as f64 * pair.total()
}

pub fn kuramoto_gradient(
    config: &PhaseConfig,
    freqs: &NaturalFrequencies,
    coupling: f64,
) -> Result<Vec<f64>> {
    check_len(config.len(), freqs.len())?;
    let mut g = vec![0.0; config.len()];
    gradient_into(config.phases(), freqs.omega(), coupling, &mut g);
    Ok(g)
}

/// g_i = -(w_i + (K/N) sum_j sin(t_j - t_i)). The single code path used by
/// the Euler stepper, the RK4 oracle and the gradient-flow embedding.
pub(crate) fn gradient_into(phases: &[f64], omega: &[f64], coupling: f64, out: &mut [f64]) {
    let n = phases.len();
    let scale = coupling / n as f64;
    for i in 0..n {
        let ti = phases[i];
        let mut acc = NeumaierSum::new();
        for &tj in phases {
            acc.add((tj - ti).sin());
        }
        out[i] = -(omega[i] + scale * acc.total());
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    compensated_sum(v.iter().map(|x| x * x)).sqrt()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    max_abs(v)
}
