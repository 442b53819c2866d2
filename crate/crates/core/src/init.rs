//! Builders for common initial data. Random draws are centered so that the
//! phases (or frequencies) sum to zero.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{NaturalFrequencies, PhaseConfig};

fn check_n(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::TooFewOscillators { min, found: n });
    }
    Ok(())
}

fn evenly_spaced(count: usize, width: f64) -> Vec<f64> {
    if count == 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|j| width * (j as f64 / (count - 1) as f64 - 0.5))
        .collect()
}

/// N phases evenly spread over an arc of width `delta` around 0.
pub fn near_sync(n: usize, delta: f64) -> Result<PhaseConfig> {
    check_n(n, 2)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta must be nonnegative"));
    }
    PhaseConfig::zero_mean(evenly_spaced(n, delta))
}

/// N - 1 phases spread over [c - delta, c + delta] with c = -pi/N, and the
/// last oscillator at c + pi. The sum is zero.
pub fn near_bipolar(n: usize, delta: f64) -> Result<PhaseConfig> {
    check_n(n, 2)?;
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(Error::invalid("delta must be nonnegative"));
    }
    let c = -PI / n as f64;
    let mut p: Vec<f64> = evenly_spaced(n - 1, 2.0 * delta)
        .into_iter()
        .map(|x| c + x)
        .collect();
    p.push(c + PI);
    PhaseConfig::new(p)
}

/// Uniform draws on an arc of the given width, then centered.
pub fn random_arc<R: Rng + ?Sized>(n: usize, width: f64, rng: &mut R) -> Result<PhaseConfig> {
    check_n(n, 2)?;
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::invalid("arc width must be positive"));
    }
    let p = (0..n)
        .map(|_| rng.gen_range(-0.5 * width..0.5 * width))
        .collect();
    PhaseConfig::zero_mean(p)
}

/// Uniform draws, centered and rescaled so that max - min equals `d_omega`.
pub fn random_frequencies<R: Rng + ?Sized>(
    n: usize,
    d_omega: f64,
    rng: &mut R,
) -> Result<NaturalFrequencies> {
    check_n(n, 2)?;
    if !(d_omega.is_finite() && d_omega >= 0.0) {
        return Err(Error::invalid("D(Omega) must be nonnegative"));
    }
    if d_omega == 0.0 {
        return Ok(NaturalFrequencies::zero(n));
    }
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let (lo, hi) = w
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let scale = d_omega / (hi - lo);
    NaturalFrequencies::zero_mean(w.into_iter().map(|x| x * scale).collect())
}
