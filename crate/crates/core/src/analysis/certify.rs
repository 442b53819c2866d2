use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrate::PhaseSeries;
use crate::model::subset_diameter;

/// Default floor below which decay checks stop: beyond it the series is
/// dominated by rounding of the equilibrium offsets, not by dynamics.
pub const RESOLUTION_FLOOR: f64 = 1e-13;

/// Rate K sin(eps) / (2 eps) for data inside an eps-arc.
pub fn arc_decay_rate(coupling: f64, eps: f64) -> f64 {
    coupling * eps.sin() / (2.0 * eps)
}

/// alpha = K[(N - 1) sin(eps)/eps - 1] / (2N) for the synchronized group of
/// a near-bipolar configuration.
pub fn bipolar_group_rate(n: usize, coupling: f64, eps: f64) -> f64 {
    let nf = n as f64;
    coupling * ((nf - 1.0) * eps.sin() / eps - 1.0) / (2.0 * nf)
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    Ok(())
}

fn check_nonempty<S: PhaseSeries + ?Sized>(series: &S) -> Result<()> {
    if series.is_empty() {
        return Err(Error::precondition("empty series"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderCheck {
    Preserved,
    /// At `step`, `lower` no longer sits strictly below `upper`.
    Violated {
        step: usize,
        lower: usize,
        upper: usize,
    },
}

/// Sorts `subset` by the step-0 phases and scans for the first step at which
/// that strict order breaks.
pub fn check_order_preservation<S: PhaseSeries + ?Sized>(
    series: &S,
    subset: &[usize],
) -> Result<OrderCheck> {
    check_nonempty(series)?;
    check_subset(series.oscillators(), subset)?;
    let p0 = series.phases_at(0);
    let mut idx = subset.to_vec();
    idx.sort_by(|&a, &b| p0[a].total_cmp(&p0[b]));
    if idx.windows(2).any(|w| p0[w[0]] >= p0[w[1]]) {
        return Err(Error::precondition(
            "subset phases must be distinct at step 0",
        ));
    }
    for n in 1..series.len() {
        let p = series.phases_at(n);
        if let Some(w) = idx.windows(2).find(|w| !(p[w[0]] < p[w[1]])) {
            return Ok(OrderCheck::Violated {
                step: n,
                lower: w[0],
                upper: w[1],
            });
        }
    }
    Ok(OrderCheck::Preserved)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayCertificate {
    pub passed: bool,
    pub first_violation: Option<usize>,
    pub initial: f64,
    /// observed / bound at each checked step.
    pub margin: Vec<f64>,
    /// First step at which the observed quantity fell below the floor.
    pub resolved_at: Option<usize>,
}

fn exp_bound(d0: f64, rate: f64, n: usize, h: f64) -> f64 {
    d0 * (-rate * n as f64 * h).exp()
}

fn scan_decay(
    len: usize,
    d0: f64,
    rate: f64,
    h: f64,
    floor: f64,
    mut value: impl FnMut(usize) -> f64,
) -> DecayCertificate {
    let mut margin = Vec::new();
    let mut first_violation = None;
    let mut resolved_at = None;
    for n in 0..len {
        let v = value(n);
        if v < floor {
            resolved_at = Some(n);
            break;
        }
        let b = exp_bound(d0, rate, n, h);
        margin.push(v / b);
        // an identically zero series meets a zero bound
        let ok = if n == 0 || b == 0.0 { v <= b } else { v < b };
        if !ok && first_violation.is_none() {
            first_violation = Some(n);
        }
    }
    DecayCertificate {
        passed: first_violation.is_none(),
        first_violation,
        initial: d0,
        margin,
        resolved_at,
    }
}

/// D(n) < D(0) exp(-rate n h) over `subset`, strict for n >= 1, checked
/// until D(n) drops below `floor`.
pub fn certify_diameter_decay<S: PhaseSeries + ?Sized>(
    series: &S,
    subset: &[usize],
    eps: f64,
    rate: f64,
    floor: f64,
) -> Result<DecayCertificate> {
    check_nonempty(series)?;
    check_subset(series.oscillators(), subset)?;
    let d0 = subset_diameter(series.phases_at(0), Some(subset))?;
    if !(d0 < eps) {
        return Err(Error::precondition(format!(
            "initial diameter exceeds eps ({d0} >= {eps})"
        )));
    }
    let h = series.step_size();
    Ok(scan_decay(series.len(), d0, rate, h, floor, |n| {
        subset_diameter(series.phases_at(n), Some(subset)).expect("validated subset")
    }))
}

/// max_j |x_j(n)| < d0 exp(-rate n h) over `subset` of an effective-phase
/// series, checked until the maximum drops below `floor`.
pub fn certify_effective_decay<S: PhaseSeries + ?Sized>(
    effective: &S,
    subset: &[usize],
    d0: f64,
    rate: f64,
    floor: f64,
) -> Result<DecayCertificate> {
    check_nonempty(effective)?;
    check_subset(effective.oscillators(), subset)?;
    let h = effective.step_size();
    Ok(scan_decay(effective.len(), d0, rate, h, floor, |n| {
        let p = effective.phases_at(n);
        subset.iter().fold(0.0f64, |m, &j| m.max(p[j].abs()))
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedCertificate {
    pub passed: bool,
    pub first_violation: Option<(usize, BoundSide)>,
    pub checked_steps: usize,
    pub resolved_at: Option<usize>,
}

/// D(0) e^{-2K n h} < D(n) < D(0) e^{-alpha n h} over `subset`.
pub fn certify_two_sided_decay<S: PhaseSeries + ?Sized>(
    series: &S,
    subset: &[usize],
    coupling: f64,
    alpha: f64,
    floor: f64,
) -> Result<TwoSidedCertificate> {
    check_nonempty(series)?;
    check_subset(series.oscillators(), subset)?;
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    if alpha > 2.0 * coupling {
        return Err(Error::invalid(format!(
            "alpha = {alpha} exceeds the lower-bound rate 2K = {}",
            2.0 * coupling
        )));
    }
    let d0 = subset_diameter(series.phases_at(0), Some(subset))?;
    if d0 == 0.0 {
        return Err(Error::precondition("initial subset diameter is zero"));
    }
    let h = series.step_size();
    let mut first_violation = None;
    let mut resolved_at = None;
    let mut checked = 0;
    for n in 0..series.len() {
        let d = subset_diameter(series.phases_at(n), Some(subset))?;
        if d < floor {
            resolved_at = Some(n);
            break;
        }
        checked += 1;
        let lo = exp_bound(d0, 2.0 * coupling, n, h);
        let hi = exp_bound(d0, alpha, n, h);
        let (lo_ok, hi_ok) = if n == 0 {
            (lo <= d, d <= hi)
        } else {
            (lo < d, d < hi)
        };
        if !lo_ok {
            first_violation = Some((n, BoundSide::Lower));
            break;
        }
        if !hi_ok {
            first_violation = Some((n, BoundSide::Upper));
            break;
        }
    }
    Ok(TwoSidedCertificate {
        passed: first_violation.is_none(),
        first_violation,
        checked_steps: checked,
        resolved_at,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitSide {
    /// Bipolar member fell below min(group) + pi.
    Below,
    /// Bipolar member rose above max(group) + pi.
    Above,
}

impl ExitSide {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitSide::Below => "below",
            ExitSide::Above => "above",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub contained: Vec<bool>,
    pub first_exit: Option<(usize, ExitSide)>,
}

impl ContainmentReport {
    pub fn all_contained(&self) -> bool {
        self.first_exit.is_none()
    }
}

fn group_bounds(p: &[f64], b: usize) -> (f64, f64) {
    p.iter()
        .enumerate()
        .filter(|&(j, _)| j != b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &x)| {
            (lo.min(x), hi.max(x))
        })
}

/// min(group) + pi <= x_b <= max(group) + pi on an effective-phase series.
/// Equality counts as contained.
pub fn check_bipolar_containment<S: PhaseSeries + ?Sized>(
    effective: &S,
    bipolar_index: usize,
) -> Result<ContainmentReport> {
    check_nonempty(effective)?;
    let n_osc = effective.oscillators();
    if bipolar_index >= n_osc {
        return Err(Error::IndexOutOfRange {
            index: bipolar_index,
            len: n_osc,
        });
    }
    let mut contained = Vec::with_capacity(effective.len());
    let mut first_exit = None;
    for n in 0..effective.len() {
        let p = effective.phases_at(n);
        let (lo, hi) = group_bounds(p, bipolar_index);
        let x = p[bipolar_index];
        let side = if x < lo + PI {
            Some(ExitSide::Below)
        } else if x > hi + PI {
            Some(ExitSide::Above)
        } else {
            None
        };
        if let (Some(s), None) = (side, first_exit) {
            first_exit = Some((n, s));
        }
        contained.push(side.is_none());
    }
    Ok(ContainmentReport {
        contained,
        first_exit,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BipolarBoundsCertificate {
    pub passed: bool,
    /// (step, oscillator) of the first failed inequality.
    pub first_violation: Option<(usize, usize)>,
    pub checked_steps: usize,
    pub resolved_at: Option<usize>,
}

/// Residual bounds around the bipolar state:
/// |x_b - (N-1)pi/N| < ((N-1)/N) D_s(0) e^{-alpha n h} and
/// |x_j + pi/N| < ((2N-1)/N) D_s(0) e^{-alpha n h} for the group, where D_s
/// is the group diameter. Checked until D_s drops below `floor`.
///
/// Errors list the unmet hypotheses: D_s(0) < eps,
/// |x_b(0) - (N-1)pi/N| < eps/4 and containment at every step. The group is
/// labelled by sorting, so its ordering needs no separate check.
pub fn certify_bipolar_bounds<S: PhaseSeries + ?Sized>(
    effective: &S,
    bipolar_index: usize,
    alpha: f64,
    eps: f64,
    floor: f64,
) -> Result<BipolarBoundsCertificate> {
    check_nonempty(effective)?;
    let n_osc = effective.oscillators();
    if n_osc < 3 {
        return Err(Error::TooFewOscillators {
            min: 3,
            found: n_osc,
        });
    }
    let containment = check_bipolar_containment(effective, bipolar_index)?;
    let group: Vec<usize> = (0..n_osc).filter(|&j| j != bipolar_index).collect();
    let nf = n_osc as f64;
    let target_b = (nf - 1.0) * PI / nf;
    let p0 = effective.phases_at(0);
    let d0 = subset_diameter(p0, Some(&group))?;

    let mut unmet = Vec::new();
    if !(d0 < eps) {
        unmet.push(format!("group diameter {d0} not below eps {eps}"));
    }
    let off = (p0[bipolar_index] - target_b).abs();
    if !(off < eps / 4.0) {
        unmet.push(format!("bipolar offset {off} not below eps/4"));
    }
    if let Some((n, side)) = containment.first_exit {
        unmet.push(format!("containment lost at step {n} ({})", side.as_str()));
    }
    if !unmet.is_empty() {
        return Err(Error::precondition(unmet.join("; ")));
    }

    let h = effective.step_size();
    let mut first_violation = None;
    let mut resolved_at = None;
    let mut checked = 0;
    'steps: for n in 0..effective.len() {
        let p = effective.phases_at(n);
        if subset_diameter(p, Some(&group))? < floor {
            resolved_at = Some(n);
            break;
        }
        checked += 1;
        let e = exp_bound(d0, alpha, n, h);
        let bb = (nf - 1.0) / nf * e;
        let bg = (2.0 * nf - 1.0) / nf * e;
        let lt = |v: f64, b: f64| if n == 0 || b == 0.0 { v <= b } else { v < b };
        if !lt((p[bipolar_index] - target_b).abs(), bb) {
            first_violation = Some((n, bipolar_index));
            break;
        }
        for &j in &group {
            if !lt((p[j] + PI / nf).abs(), bg) {
                first_violation = Some((n, j));
                break 'steps;
            }
        }
    }
    Ok(BipolarBoundsCertificate {
        passed: first_violation.is_none(),
        first_violation,
        checked_steps: checked,
        resolved_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::RecordedSeries;

    fn series(rows: &[&[f64]]) -> RecordedSeries {
        RecordedSeries::new(0.1, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn rates() {
        assert!((arc_decay_rate(1.0, 0.3) - 0.3f64.sin() / 0.6).abs() < 1e-15);
        let a = bipolar_group_rate(3, 1.0, 0.3);
        assert!((a - (2.0 * 0.3f64.sin() / 0.3 - 1.0) / 6.0).abs() < 1e-15);
    }

    #[test]
    fn order_swap_detected() {
        let s = series(&[&[0.0, 0.1, 0.5], &[0.0, 0.2, 0.4], &[0.0, 0.45, 0.4]]);
        assert_eq!(
            check_order_preservation(&s, &[0]).unwrap(),
            OrderCheck::Preserved
        );
        assert_eq!(
            check_order_preservation(&s, &[2, 1, 0]).unwrap(),
            OrderCheck::Violated {
                step: 2,
                lower: 1,
                upper: 2
            }
        );
        assert_eq!(
            check_order_preservation(&s, &[0, 1]).unwrap(),
            OrderCheck::Preserved
        );
    }

    #[test]
    fn constant_zero_diameter_passes() {
        let s = series(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let c = certify_diameter_decay(&s, &[0, 1], 0.3, 1.0, 0.0).unwrap();
        assert!(c.passed);
        let c = certify_diameter_decay(&s, &[0, 1], 0.3, 1.0, 1e-13).unwrap();
        assert!(c.passed && c.resolved_at == Some(0));
    }

    #[test]
    fn decay_precondition() {
        let s = series(&[&[0.0, 0.5]]);
        assert!(matches!(
            certify_diameter_decay(&s, &[0, 1], 0.3, 1.0, 0.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn two_sided_guards() {
        let s = series(&[&[0.0, 0.1], &[0.0, 0.09]]);
        assert!(certify_two_sided_decay(&s, &[0, 1], 1.0, 2.5, 0.0).is_err());
        let z = series(&[&[0.0, 0.0]]);
        assert!(certify_two_sided_decay(&z, &[0, 1], 1.0, 0.5, 0.0).is_err());
        let c = certify_two_sided_decay(&s, &[0, 1], 1.0, 0.5, 0.0).unwrap();
        assert!(c.passed && c.checked_steps == 2);
        // shrinking faster than e^{-2Kh}
        let f = series(&[&[0.0, 0.1], &[0.0, 0.05]]);
        let c = certify_two_sided_decay(&f, &[0, 1], 1.0, 0.5, 0.0).unwrap();
        assert_eq!(c.first_violation, Some((1, BoundSide::Lower)));
    }

    #[test]
    fn containment_sides() {
        let b = 2;
        let s = series(&[
            &[-0.1, 0.1, PI],
            &[-0.1, 0.1, PI - 0.1],
            &[-0.1, 0.1, PI - 0.2],
        ]);
        let r = check_bipolar_containment(&s, b).unwrap();
        assert_eq!(r.contained, vec![true, true, false]);
        assert_eq!(r.first_exit, Some((2, ExitSide::Below)));
        let s = series(&[&[-0.1, 0.1, PI + 0.3]]);
        let r = check_bipolar_containment(&s, b).unwrap();
        assert_eq!(r.first_exit, Some((0, ExitSide::Above)));
    }

    #[test]
    fn bipolar_bounds_hypotheses_reported() {
        let s = series(&[&[-0.1, 0.1, PI + 0.3]]);
        match certify_bipolar_bounds(&s, 2, 0.1, 0.3, 0.0) {
            Err(Error::Precondition(m)) => {
                assert!(m.contains("containment") && m.contains("bipolar offset"))
            }
            other => panic!("{other:?}"),
        }
    }
}
