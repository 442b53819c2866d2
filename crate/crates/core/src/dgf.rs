//! Discrete gradient flow x(n+1) = x(n) - h grad f(x(n)) for an arbitrary
//! smooth potential, with descent certification and a Lojasiewicz probe.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::integrate::descend;
use crate::model::{gradient_into, norm2, potential_of, NaturalFrequencies};
use crate::sum::NeumaierSum;

pub type PotentialFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

const SPOT_CHECKS: usize = 10;
const SPOT_SEED: u64 = 0x5eed_0fd9;
const FD_STEP: f64 = 1e-6;
const FD_REL_TOL: f64 = 1e-5;

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn cube(dim: usize, half_width: f64) -> Self {
        Domain::Box {
            lower: vec![-half_width; dim],
            upper: vec![half_width; dim],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lower, .. } => lower.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Domain::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .all(|(v, (lo, hi))| lo <= v && v <= hi),
            Domain::Ball { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2.sqrt() <= *radius
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Domain::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(&lo, &hi)| if hi > lo { rng.gen_range(lo..hi) } else { lo })
                .collect(),
            Domain::Ball { center, radius } => {
                let dir = random_direction(center.len(), false, rng);
                let r = radius * rng.gen::<f64>().powf(1.0 / center.len() as f64);
                center.iter().zip(&dir).map(|(c, d)| c + r * d).collect()
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Domain::Box { lower, upper } => {
                if lower.len() != upper.len() {
                    return Err(Error::LengthMismatch {
                        expected: lower.len(),
                        found: upper.len(),
                    });
                }
                if lower
                    .iter()
                    .zip(upper)
                    .any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite())
                {
                    return Err(Error::invalid(
                        "box bounds must be finite with lower <= upper",
                    ));
                }
            }
            Domain::Ball { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::invalid(
                        "ball needs a finite center and positive radius",
                    ));
                }
            }
        }
        Ok(())
    }
}

fn random_direction<R: Rng + ?Sized>(dim: usize, zero_mean: bool, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if zero_mean {
            let m = v.iter().sum::<f64>() / dim as f64;
            v.iter_mut().for_each(|x| *x -= m);
        }
        let nrm = norm2(&v);
        if nrm > 1e-12 {
            v.iter_mut().for_each(|x| *x /= nrm);
            return v;
        }
    }
}

/// A smooth potential with gradient, a uniform Hessian bound C and a working
/// domain.
pub struct DgfProblem {
    id: u64,
    name: String,
    dim: usize,
    potential: Box<PotentialFn>,
    gradient: Box<GradientFn>,
    hessian_bound: f64,
    domain: Domain,
}

impl fmt::Debug for DgfProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DgfProblem")
            .field("id", &self.id)
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("hessian_bound", &self.hessian_bound)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl DgfProblem {
    /// Builds a problem after spot-checking the gradient against central
    /// differences at seeded random domain points.
    pub fn new<F, G>(
        name: impl Into<String>,
        dim: usize,
        potential: F,
        gradient: G,
        hessian_bound: f64,
        domain: Domain,
    ) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(hessian_bound.is_finite() && hessian_bound > 0.0) {
            return Err(Error::invalid("Hessian bound must be positive"));
        }
        domain.validate()?;
        if domain.dim() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                found: domain.dim(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SPOT_SEED);
        for _ in 0..SPOT_CHECKS {
            let x = domain.sample(&mut rng);
            let g = gradient(&x);
            if g.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    found: g.len(),
                });
            }
            let mut y = x.clone();
            for i in 0..dim {
                let step = FD_STEP * x[i].abs().max(1.0);
                y[i] = x[i] + step;
                let up = potential(&y);
                y[i] = x[i] - step;
                let dn = potential(&y);
                y[i] = x[i];
                let fd = (up - dn) / (2.0 * step);
                if !fd.is_finite() || !g[i].is_finite() {
                    return Err(Error::NonFinite("potential or gradient at spot check"));
                }
                if (fd - g[i]).abs() > FD_REL_TOL * g[i].abs().max(1.0) {
                    return Err(Error::invalid(format!(
                        "gradient component {i} disagrees with finite differences ({} vs {fd})",
                        g[i]
                    )));
                }
            }
        }
        Ok(Self {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            dim,
            potential: Box::new(potential),
            gradient: Box::new(gradient),
            hessian_bound,
            domain,
        })
    }

    /// f(x) = |x|^2 / 2 on a cube; C = 1.
    pub fn quadratic(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(
            "quadratic",
            dim,
            |x| 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
            |x| x.to_vec(),
            1.0,
            Domain::cube(dim, half_width),
        )
    }

    /// f(x) = x^4/4 - x^2/2 on [-a, a]; C = max|3x^2 - 1| = 3a^2 - 1.
    pub fn double_well(half_width: f64) -> Result<Self> {
        let a = half_width;
        Self::new(
            "double_well",
            1,
            |x| 0.25 * x[0].powi(4) - 0.5 * x[0] * x[0],
            |x| vec![x[0].powi(3) - x[0]],
            (3.0 * a * a - 1.0).max(1.0),
            Domain::cube(1, a),
        )
    }

    /// f(x) = x^4/4 on [-a, a]; C = 3a^2.
    pub fn quartic(half_width: f64) -> Result<Self> {
        let a = half_width;
        Self::new(
            "quartic",
            1,
            |x| 0.25 * x[0].powi(4),
            |x| vec![x[0].powi(3)],
            3.0 * a * a,
            Domain::cube(1, a),
        )
    }

    /// The Kuramoto potential with C = 2K on the cube of the given half-width.
    /// The gradient is the one used by the Euler stepper, so runs coincide
    /// bitwise with `simulate`.
    pub fn kuramoto(freqs: &NaturalFrequencies, coupling: f64, half_width: f64) -> Result<Self> {
        if !(coupling.is_finite() && coupling > 0.0) {
            return Err(Error::invalid("coupling K must be positive"));
        }
        let n = freqs.len();
        let w1 = freqs.omega().to_vec();
        let w2 = w1.clone();
        Self::new(
            "kuramoto",
            n,
            move |x| potential_of(x, &w1, coupling),
            move |x| {
                let mut g = vec![0.0; x.len()];
                gradient_into(x, &w2, coupling, &mut g);
                g
            },
            2.0 * coupling,
            Domain::cube(n, half_width),
        )
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hessian_bound(&self) -> f64 {
        self.hessian_bound
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.potential)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// 2 / C.
    pub fn step_limit(&self) -> f64 {
        2.0 / self.hessian_bound
    }

    pub fn is_admissible(&self, h: f64) -> bool {
        h > 0.0 && h < self.step_limit()
    }
}

/// Rejects steps at or above 2/C unless explicitly overridden.
pub fn check_step_guard(problem: &DgfProblem, h: f64, allow_large_step: bool) -> Result<()> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    if !allow_large_step && !problem.is_admissible(h) {
        return Err(Error::invalid(format!(
            "step size {h} violates h < 2/C = {}",
            problem.step_limit()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateSummary {
    pub f_value: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct DgfResult {
    pub iterates_summary: Vec<IterateSummary>,
    pub final_point: Vec<f64>,
    pub converged: bool,
    pub descent_certified: bool,
    pub h_admissible: bool,
    /// The last recorded iterate left the domain; the run stopped there.
    pub exited_domain: bool,
    pub h: f64,
    pub tol: f64,
    problem_id: u64,
}

impl DgfResult {
    pub fn steps(&self) -> usize {
        self.iterates_summary.len() - 1
    }

    pub fn problem_id(&self) -> u64 {
        self.problem_id
    }
}

pub fn dgf_run(
    problem: &DgfProblem,
    x0: &[f64],
    h: f64,
    max_steps: u64,
    tol: f64,
) -> Result<DgfResult> {
    dgf_run_with(problem, x0, h, max_steps, tol, |_, _| {})
}

/// As [`dgf_run`], calling `observe(n, x_n)` on every recorded iterate.
pub fn dgf_run_with<O>(
    problem: &DgfProblem,
    x0: &[f64],
    h: f64,
    max_steps: u64,
    tol: f64,
    mut observe: O,
) -> Result<DgfResult>
where
    O: FnMut(u64, &[f64]),
{
    if x0.len() != problem.dim {
        return Err(Error::LengthMismatch {
            expected: problem.dim,
            found: x0.len(),
        });
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    if !(tol >= 0.0) {
        return Err(Error::invalid("tolerance must be nonnegative"));
    }
    if !problem.domain.contains(x0) {
        return Err(Error::OutOfDomain);
    }
    let mut x = x0.to_vec();
    let mut next = vec![0.0; x.len()];
    let mut summary = Vec::new();
    let mut exited = false;
    let mut step = 0u64;
    loop {
        observe(step, &x);
        let f = problem.value(&x);
        let g = problem.gradient(&x);
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("potential or gradient"));
        }
        let gn = norm2(&g);
        summary.push(IterateSummary {
            f_value: f,
            grad_norm: gn,
        });
        if exited || gn < tol || step >= max_steps {
            break;
        }
        descend(&x, &g, h, &mut next);
        std::mem::swap(&mut x, &mut next);
        step += 1;
        if !problem.domain.contains(&x) {
            exited = true;
        }
    }
    let converged = !exited && summary.last().is_some_and(|s| s.grad_norm < tol);
    let mut result = DgfResult {
        iterates_summary: summary,
        final_point: x,
        converged,
        descent_certified: false,
        h_admissible: problem.is_admissible(h),
        exited_domain: exited,
        h,
        tol,
        problem_id: problem.id,
    };
    result.descent_certified = descent_scan(problem.hessian_bound, &result).passed;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentCertificate {
    pub passed: bool,
    /// min over steps of (allowed decrease) - (actual change); negative
    /// values beyond the tolerance are failures.
    pub min_slack: f64,
    pub worst_step: Option<usize>,
}

pub const DESCENT_TOL: f64 = 1e-10;

/// Checks f(n+1) - f(n) <= -h(1 - Ch/2)|g(n)|^2 on every step, and also
/// f(n+1) <= f(n) so that the check keeps meaning when h >= 2/C.
pub fn certify_descent(
    problem: &DgfProblem,
    result: &DgfResult,
    h: f64,
) -> Result<DescentCertificate> {
    if result.problem_id != problem.id || result.h != h {
        return Err(Error::ProvenanceMismatch);
    }
    Ok(descent_scan(problem.hessian_bound, result))
}

fn descent_scan(c: f64, result: &DgfResult) -> DescentCertificate {
    let h = result.h;
    let s = &result.iterates_summary;
    let mut min_slack = f64::INFINITY;
    let mut worst = None;
    let mut passed = true;
    for n in 0..s.len().saturating_sub(1) {
        let allowed = (-h * (1.0 - c * h / 2.0) * s[n].grad_norm.powi(2)).min(0.0);
        let slack = allowed - (s[n + 1].f_value - s[n].f_value);
        let tau = DESCENT_TOL * (1.0 + s[n].f_value.abs());
        if slack < min_slack {
            min_slack = slack;
            worst = Some(n);
        }
        if slack < -tau {
            passed = false;
        }
    }
    if worst.is_none() {
        min_slack = 0.0;
    }
    DescentCertificate {
        passed,
        min_slack,
        worst_step: worst,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summability {
    /// sum_n |g(n)|^2 h (1 - Ch/2)
    pub weighted_sum: f64,
    pub f_drop: f64,
    pub holds: bool,
}

pub fn grad_norm_summability(result: &DgfResult, h: f64, c: f64) -> Summability {
    let s = &result.iterates_summary;
    let w = h * (1.0 - c * h / 2.0);
    let mut acc = NeumaierSum::new();
    for it in &s[..s.len().saturating_sub(1)] {
        acc.add(it.grad_norm * it.grad_norm * w);
    }
    let weighted_sum = acc.total();
    let f0 = s[0].f_value;
    let f_drop = f0 - s[s.len() - 1].f_value;
    Summability {
        weighted_sum,
        f_drop,
        holds: weighted_sum <= f_drop + DESCENT_TOL * (1.0 + f0.abs()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOptions {
    pub seed: u64,
    /// Radii are drawn log-uniformly from [radius * 10^-decades, radius].
    pub decades: f64,
    /// Restrict displacements to sum(x) = 0, removing a symmetry direction.
    pub zero_mean: bool,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            seed: PROBE_SEED,
            decades: 3.0,
            zero_mean: false,
        }
    }
}

const PROBE_SEED: u64 = 0x1a_5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct LojasiewiczProbe {
    pub center: Vec<f64>,
    pub radius: f64,
    pub exponent_estimate: f64,
    pub constant_estimate: f64,
    pub sample_count: usize,
    /// Raw least-squares slope of log|g| against log|f - f(center)|.
    pub fitted_slope: f64,
}

pub const ETA_GRID: usize = 50;

pub fn lojasiewicz_probe(
    problem: &DgfProblem,
    center: &[f64],
    radius: f64,
    samples: usize,
) -> Result<LojasiewiczProbe> {
    lojasiewicz_probe_with(problem, center, radius, samples, &ProbeOptions::default())
}

pub fn lojasiewicz_probe_with(
    problem: &DgfProblem,
    center: &[f64],
    radius: f64,
    samples: usize,
    opts: &ProbeOptions,
) -> Result<LojasiewiczProbe> {
    if center.len() != problem.dim {
        return Err(Error::LengthMismatch {
            expected: problem.dim,
            found: center.len(),
        });
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid("probe radius must be positive"));
    }
    if samples < 2 {
        return Err(Error::invalid("probe needs at least two samples"));
    }
    let grad_norm = norm2(&problem.gradient(center));
    if !(grad_norm < 1e-8) {
        return Err(Error::NotCritical { grad_norm });
    }
    let f_bar = problem.value(center);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(samples);
    let mut attempts = 0usize;
    while pts.len() < samples && attempts < samples * 20 {
        attempts += 1;
        let dir = random_direction(problem.dim, opts.zero_mean && problem.dim > 1, &mut rng);
        let r = radius * 10f64.powf(-opts.decades * rng.gen::<f64>());
        let x: Vec<f64> = center.iter().zip(&dir).map(|(c, d)| c + r * d).collect();
        if !problem.domain.contains(&x) {
            continue;
        }
        let df = (problem.value(&x) - f_bar).abs();
        let g = norm2(&problem.gradient(&x));
        if df > 0.0 && g > 0.0 && df.is_finite() && g.is_finite() {
            pts.push((df.ln(), g.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::precondition("too few usable probe samples"));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.5 };
    let k = ((slope - 0.5) * 100.0)
        .round()
        .clamp(0.0, (ETA_GRID - 1) as f64);
    let eta = 0.5 + k / 100.0;
    let c = pts
        .iter()
        .map(|&(lf, lg)| (lg - eta * lf).exp())
        .fold(f64::INFINITY, f64::min);
    Ok(LojasiewiczProbe {
        center: center.to_vec(),
        radius,
        exponent_estimate: eta,
        constant_estimate: c,
        sample_count: pts.len(),
        fitted_slope: slope,
    })
}

/// Half-width of the default Kuramoto working cube.
pub const KURAMOTO_HALF_WIDTH: f64 = 8.0 * PI;
