use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Minus the least-squares slope of ln D against t.
    pub alpha_fit: f64,
    pub r_squared: f64,
    pub std_error: f64,
    /// Set when ln D has no variance over the window (r_squared is then 0).
    pub degenerate: bool,
    pub points: usize,
    /// Guaranteed minimum decay rate, if known.
    pub rate_floor: Option<f64>,
    /// Maximum possible decay rate, if known.
    pub rate_ceiling: Option<f64>,
}

impl DecayFit {
    pub fn with_bounds(mut self, floor: Option<f64>, ceiling: Option<f64>) -> Self {
        self.rate_floor = floor;
        self.rate_ceiling = ceiling;
        self
    }

    /// Whether alpha_fit lies in [floor, ceiling] up to one standard error.
    pub fn within_bounds(&self) -> bool {
        let lo = self
            .rate_floor
            .is_none_or(|f| self.alpha_fit + self.std_error >= f);
        let hi = self
            .rate_ceiling
            .is_none_or(|c| self.alpha_fit - self.std_error <= c);
        lo && hi
    }
}

pub fn fit_decay_rate(series: &[f64], h: f64, window: Range<usize>) -> Result<DecayFit> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid("step size must be positive"));
    }
    if window.end > series.len() || window.len() < 2 {
        return Err(Error::invalid(format!(
            "window {window:?} must hold at least two points of a series of length {}",
            series.len()
        )));
    }
    let pts: Vec<(f64, f64)> = window
        .clone()
        .map(|n| {
            let d = series[n];
            if d > 0.0 && d.is_finite() {
                Ok((n as f64 * h, d.ln()))
            } else {
                Err(Error::invalid(format!(
                    "log undefined at step {n} (value {d}); shrink window"
                )))
            }
        })
        .collect::<Result<_>>()?;
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        .max(0.0);
    let std_error = if pts.len() > 2 {
        (ss_res / (m - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    // relative to the magnitude of ln D, a flat series has only rounding noise
    let degenerate = syy <= 1e-24 * m * my.abs().max(1.0).powi(2);
    let (alpha_fit, r_squared) = if degenerate {
        (0.0, 0.0)
    } else {
        (-slope, (1.0 - ss_res / syy).clamp(0.0, 1.0))
    };
    Ok(DecayFit {
        alpha_fit,
        r_squared,
        std_error,
        degenerate,
        points: pts.len(),
        rate_floor: None,
        rate_ceiling: None,
    })
}
