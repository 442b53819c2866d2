use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrate::{PhaseSeries, RecordedSeries};
use crate::model::{order_parameter_of, PhaseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Sync,
    Bipolar,
}

impl EquilibriumKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EquilibriumKind::Sync => "sync",
            EquilibriumKind::Bipolar => "bipolar",
        }
    }
}

/// A phase-locked state of the identical model, fixed by integer windings.
///
/// Sync: theta_j = 2 k_j pi + phi, phi = -(2 pi / N) sum k.
/// Bipolar with index b: theta_b gets an extra pi and
/// phi = -(pi / N)(2 sum k + 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumState {
    kind: EquilibriumKind,
    windings: Vec<i64>,
    bipolar_index: Option<usize>,
    phi_star: f64,
}

impl EquilibriumState {
    pub fn sync(windings: Vec<i64>) -> Result<Self> {
        check_size(windings.len())?;
        let s: i64 = windings.iter().sum();
        let phi_star = -2.0 * PI * s as f64 / windings.len() as f64;
        Ok(Self {
            kind: EquilibriumKind::Sync,
            windings,
            bipolar_index: None,
            phi_star,
        })
    }

    pub fn bipolar(windings: Vec<i64>, index: usize) -> Result<Self> {
        check_size(windings.len())?;
        if index >= windings.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: windings.len(),
            });
        }
        let s: i64 = windings.iter().sum();
        let phi_star = -PI * (2 * s + 1) as f64 / windings.len() as f64;
        Ok(Self {
            kind: EquilibriumKind::Bipolar,
            windings,
            bipolar_index: Some(index),
            phi_star,
        })
    }

    pub fn kind(&self) -> EquilibriumKind {
        self.kind
    }

    pub fn windings(&self) -> &[i64] {
        &self.windings
    }

    pub fn bipolar_index(&self) -> Option<usize> {
        self.bipolar_index
    }

    pub fn phi_star(&self) -> f64 {
        self.phi_star
    }

    pub fn len(&self) -> usize {
        self.windings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windings.is_empty()
    }

    /// Indices of the synchronized group.
    pub fn sync_members(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| Some(j) != self.bipolar_index)
            .collect()
    }

    fn offset(&self, j: usize) -> f64 {
        let extra = if Some(j) == self.bipolar_index {
            PI
        } else {
            0.0
        };
        2.0 * PI * self.windings[j] as f64 + extra + self.phi_star
    }

    pub fn reconstruct(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.offset(j)).collect()
    }

    /// Effective phases of the state itself: 0 for sync, -pi/N on the
    /// synchronized group and (N-1)pi/N on the bipolar member otherwise.
    pub fn effective_targets(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.len())
            .map(|j| match self.bipolar_index {
                None => 0.0,
                Some(b) if b == j => (n - 1.0) * PI / n,
                Some(_) => -PI / n,
            })
            .collect()
    }

    /// Shifts all windings by a common integer so that phi lies in (-pi, pi].
    pub fn normalized(&self) -> Self {
        let n = self.len() as i64;
        let s: i64 = self.windings.iter().sum();
        let q = match self.kind {
            EquilibriumKind::Sync => {
                let mut r = s.rem_euclid(n);
                if 2 * r >= n {
                    r -= n;
                }
                (r - s) / n
            }
            EquilibriumKind::Bipolar => {
                let t = 2 * s + 1;
                let mut r = t.rem_euclid(2 * n);
                if r >= n {
                    r -= 2 * n;
                }
                (r - t) / (2 * n)
            }
        };
        // adding q to every k_j moves phi by -2 pi q
        let windings: Vec<i64> = self.windings.iter().map(|k| k + q).collect();
        match self.bipolar_index {
            None => Self::sync(windings),
            Some(b) => Self::bipolar(windings, b),
        }
        .expect("same shape as a valid state")
    }

    pub fn residual(&self, phases: &[f64]) -> f64 {
        phases
            .iter()
            .enumerate()
            .fold(0.0f64, |m, (j, &t)| m.max((t - self.offset(j)).abs()))
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::TooFewOscillators { min: 2, found: n });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatchOutcome {
    Matched {
        state: EquilibriumState,
        residual: f64,
    },
    Unconverged {
        best_residual: f64,
    },
}

impl MatchOutcome {
    pub fn state(&self) -> Option<&EquilibriumState> {
        match self {
            MatchOutcome::Matched { state, .. } => Some(state),
            MatchOutcome::Unconverged { .. } => None,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            MatchOutcome::Matched { residual, .. } => *residual,
            MatchOutcome::Unconverged { best_residual } => *best_residual,
        }
    }
}

fn round_half_rejecting(x: f64) -> Option<i64> {
    let r = x.round();
    if ((x - r).abs() - 0.5).abs() < 1e-9 {
        return None;
    }
    Some(r as i64)
}

pub(crate) fn sync_candidate(phases: &[f64]) -> Option<(EquilibriumState, f64)> {
    let op = order_parameter_of(phases);
    if op.degenerate {
        return None;
    }
    let k = phases
        .iter()
        .map(|&t| round_half_rejecting((t - op.phi) / (2.0 * PI)))
        .collect::<Option<Vec<_>>>()?;
    let st = EquilibriumState::sync(k).ok()?.normalized();
    let res = st.residual(phases);
    Some((st, res))
}

pub(crate) fn bipolar_candidate(phases: &[f64], b: usize) -> Option<(EquilibriumState, f64)> {
    let group: Vec<f64> = phases
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != b)
        .map(|(_, &t)| t)
        .collect();
    let op = if group.len() == 1 {
        // a single member defines the group angle directly
        crate::model::OrderParameter {
            r: 1.0,
            phi: group[0],
            degenerate: false,
        }
    } else {
        order_parameter_of(&group)
    };
    if op.degenerate {
        return None;
    }
    let k = phases
        .iter()
        .enumerate()
        .map(|(j, &t)| {
            let shift = if j == b { PI } else { 0.0 };
            round_half_rejecting((t - op.phi - shift) / (2.0 * PI))
        })
        .collect::<Option<Vec<_>>>()?;
    let st = EquilibriumState::bipolar(k, b).ok()?.normalized();
    let res = st.residual(phases);
    Some((st, res))
}

/// Finds the phase-locked state within `tol` (sup-norm) of `final_config`,
/// trying sync first and then each bipolar index.
pub fn match_equilibrium(final_config: &PhaseConfig, tol: f64) -> MatchOutcome {
    let phases = final_config.phases();
    let mut best = f64::INFINITY;
    let candidates = std::iter::once(sync_candidate(phases))
        .chain((0..phases.len()).map(|b| bipolar_candidate(phases, b)));
    for (st, res) in candidates.flatten() {
        if res < tol {
            return MatchOutcome::Matched {
                state: st,
                residual: res,
            };
        }
        best = best.min(res);
    }
    MatchOutcome::Unconverged {
        best_residual: best,
    }
}

/// theta_i - 2 k_i pi - phi, with an extra -pi/N for bipolar states.
pub fn effective_phases(config: &PhaseConfig, eq: &EquilibriumState) -> Result<Vec<f64>> {
    if config.len() != eq.len() {
        return Err(Error::LengthMismatch {
            expected: eq.len(),
            found: config.len(),
        });
    }
    Ok(effective_of(config.phases(), &effective_offsets(eq)))
}

fn effective_offsets(eq: &EquilibriumState) -> Vec<f64> {
    let shift = match eq.kind {
        EquilibriumKind::Sync => 0.0,
        EquilibriumKind::Bipolar => PI / eq.len() as f64,
    };
    (0..eq.len())
        .map(|j| 2.0 * PI * eq.windings[j] as f64 + eq.phi_star + shift)
        .collect()
}

fn effective_of(phases: &[f64], offsets: &[f64]) -> Vec<f64> {
    phases.iter().zip(offsets).map(|(t, o)| t - o).collect()
}

/// Effective phases of every recorded configuration.
pub fn effective_series<S: PhaseSeries + ?Sized>(
    series: &S,
    eq: &EquilibriumState,
) -> Result<RecordedSeries> {
    let n = series.oscillators();
    if n != eq.len() {
        return Err(Error::LengthMismatch {
            expected: eq.len(),
            found: n,
        });
    }
    let offsets = effective_offsets(eq);
    let mut data = Vec::with_capacity(n * series.len());
    for k in 0..series.len() {
        data.extend(effective_of(series.phases_at(k), &offsets));
    }
    Ok(RecordedSeries::from_flat(n, series.step_size(), data))
}
