use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::integrate::{PhaseSeries, Trajectory};
use crate::model::{spread, subset_diameter};

/// D(Omega) / sin D(Theta_0).
pub fn threshold_ke(d_omega: f64, d_theta0: f64) -> Result<f64> {
    if !(d_omega.is_finite() && d_omega > 0.0) {
        return Err(Error::invalid("D(Omega) must be positive"));
    }
    if !(d_theta0 > 0.0 && d_theta0 < PI - 1e-9) {
        return Err(Error::invalid(format!(
            "initial diameter {d_theta0} must lie in (0, pi)"
        )));
    }
    Ok(d_omega / d_theta0.sin())
}

/// Parameters of a majority cluster of the first `n0` oscillators with
/// diameter below `l`, together with the coupling threshold and the
/// admissible step bound from the invariance argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    pub n: usize,
    pub n0: usize,
    pub l: f64,
    pub d_omega: f64,
    pub coupling: f64,
    pub k_min: f64,
    /// Zero when the coupling does not exceed `k_min`.
    pub h_max: f64,
    pub coupling_sufficient: bool,
}

impl ClusterSpec {
    pub fn l_cap(n: usize, n0: usize) -> f64 {
        2.0 * ((n - n0) as f64 / n0 as f64).acos()
    }

    /// Indices of the cluster.
    pub fn members(&self) -> Vec<usize> {
        (0..self.n0).collect()
    }

    pub fn uniform_bound(&self) -> f64 {
        4.0 * PI + 2.0 * self.l
    }
}

pub fn cluster_spec(
    n: usize,
    n0: usize,
    l: f64,
    d_omega: f64,
    coupling: f64,
) -> Result<ClusterSpec> {
    if n < 2 {
        return Err(Error::TooFewOscillators { min: 2, found: n });
    }
    if !(2 * n0 > n && n0 <= n) {
        return Err(Error::invalid(format!(
            "N0 = {n0} must lie in (N/2, N] for N = {n}"
        )));
    }
    let cap = ClusterSpec::l_cap(n, n0);
    if !(l > 0.0 && l < cap) {
        return Err(Error::invalid(format!(
            "l = {l} must lie in (0, 2 arccos((N - N0)/N0)) = (0, {cap})"
        )));
    }
    if !(d_omega.is_finite() && d_omega >= 0.0) {
        return Err(Error::invalid("D(Omega) must be nonnegative"));
    }
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(Error::invalid("coupling K must be positive"));
    }
    let (nf, n0f) = (n as f64, n0 as f64);
    let denom = n0f / nf * l.sin() - 2.0 * (nf - n0f) / nf * (0.5 * l).sin();
    if !(denom > 0.0) {
        return Err(Error::invalid(format!(
            "coupling threshold denominator (N0/N) sin l - (2(N-N0)/N) sin(l/2) = {denom} is not positive"
        )));
    }
    let k_min = d_omega / denom;
    let coupling_sufficient = coupling > k_min;
    let h_max = if coupling_sufficient {
        step_bound(nf, n0f, l, d_omega, coupling)
    } else {
        0.0
    };
    Ok(ClusterSpec {
        n,
        n0,
        l,
        d_omega,
        coupling,
        k_min,
        h_max,
        coupling_sufficient,
    })
}

fn step_bound(nf: f64, n0f: f64, l: f64, d: f64, k: f64) -> f64 {
    let (s2, c2) = (0.5 * l).sin_cos();
    let g = n0f * c2 - (nf - n0f);
    let a = n0f * (c2 * (d + 2.0 * k).powi(2) / 8.0 + (d + 2.0 * k) / 2.0);
    let b = s2 * d * d / 8.0 + d / 2.0;
    let c = 2.0 * k * b / nf * g;
    let e = 2.0 * k * a / nf * s2;
    let f = 2.0 * k / nf * s2 * g - d;
    let by_drift = if d > 0.0 { l / d } else { f64::INFINITY };
    [(PI - l) / (d + 2.0 * k), g / a, by_drift, f / (c + e)]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterCertificate {
    pub passed: bool,
    pub first_violation: Option<usize>,
    /// Cluster diameter at each step.
    pub diameters: Vec<f64>,
    pub max_diameter: f64,
}

pub fn certify_cluster_invariance(
    traj: &Trajectory,
    spec: &ClusterSpec,
) -> Result<ClusterCertificate> {
    if traj.oscillators() != spec.n {
        return Err(Error::LengthMismatch {
            expected: spec.n,
            found: traj.oscillators(),
        });
    }
    let d_traj = traj.freqs().d_omega();
    if d_traj > spec.d_omega * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::precondition(format!(
            "trajectory D(Omega) = {d_traj} exceeds the cluster D(Omega) {}",
            spec.d_omega
        )));
    }
    let k = traj.params().coupling;
    if !(k > spec.k_min) {
        return Err(Error::precondition(format!(
            "coupling {k} does not exceed k_min = {}",
            spec.k_min
        )));
    }
    let h = traj.step_size();
    let h_max = cluster_spec(spec.n, spec.n0, spec.l, spec.d_omega, k)?.h_max;
    if !(h < h_max) {
        return Err(Error::precondition(format!(
            "step {h} is not below h_max = {h_max}"
        )));
    }
    let members = spec.members();
    let d0 = subset_diameter(traj.phases_at(0), Some(&members))?;
    if !(d0 < spec.l) {
        return Err(Error::precondition(format!(
            "initial cluster diameter {d0} is not below l = {}",
            spec.l
        )));
    }
    let mut diameters = Vec::with_capacity(traj.len());
    let mut first_violation = None;
    for n in 0..traj.len() {
        let d = subset_diameter(traj.phases_at(n), Some(&members))?;
        if first_violation.is_none() && !(d < spec.l) {
            first_violation = Some(n);
        }
        diameters.push(d);
    }
    let max_diameter = diameters.iter().fold(0.0f64, |m, &d| m.max(d));
    Ok(ClusterCertificate {
        passed: first_violation.is_none(),
        first_violation,
        diameters,
        max_diameter,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformBoundCertificate {
    pub passed: bool,
    pub bound: f64,
    pub first_violation: Option<usize>,
    pub max_diameter: f64,
}

/// Full diameter <= 4 pi + 2 l at every step.
pub fn certify_uniform_bound<S: PhaseSeries + ?Sized>(
    series: &S,
    l: f64,
) -> UniformBoundCertificate {
    let bound = 4.0 * PI + 2.0 * l;
    let mut first_violation = None;
    let mut max_diameter = 0.0f64;
    for n in 0..series.len() {
        let d = spread(series.phases_at(n));
        max_diameter = max_diameter.max(d);
        if first_violation.is_none() && d > bound {
            first_violation = Some(n);
        }
    }
    UniformBoundCertificate {
        passed: first_violation.is_none(),
        bound,
        first_violation,
        max_diameter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::RecordedSeries;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ke_examples() {
        assert_abs_diff_eq!(threshold_ke(1.0, PI / 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(threshold_ke(1.0, PI / 6.0).unwrap(), 2.0, epsilon = 1e-12);
        assert!(threshold_ke(1.0, PI - 1e-10).is_err());
        assert!(threshold_ke(1.0, 0.0).is_err());
        assert!(threshold_ke(0.0, 1.0).is_err());
    }

    #[test]
    fn k_min_direct_evaluation() {
        let s = cluster_spec(4, 3, PI / 3.0, 1.0, 5.0).unwrap();
        let expect = 1.0 / (0.75 * (PI / 3.0).sin() - 0.5 * (PI / 6.0).sin());
        assert_abs_diff_eq!(s.k_min, expect, epsilon = 1e-12);
        assert!(s.coupling_sufficient && s.h_max > 0.0);
    }

    #[test]
    fn full_cluster_allows_l_near_pi() {
        assert_abs_diff_eq!(ClusterSpec::l_cap(5, 5), PI, epsilon = 1e-15);
        assert!(cluster_spec(5, 5, PI - 1e-6, 0.1, 1.0).is_ok());
        assert!(cluster_spec(5, 5, PI, 0.1, 1.0).is_err());
    }

    #[test]
    fn range_violations() {
        assert!(cluster_spec(4, 2, 0.5, 0.1, 1.0).is_err());
        assert!(cluster_spec(4, 5, 0.5, 0.1, 1.0).is_err());
        assert!(cluster_spec(4, 3, 0.0, 0.1, 1.0).is_err());
        let cap = ClusterSpec::l_cap(4, 3);
        assert!(cluster_spec(4, 3, cap + 1e-9, 0.1, 1.0).is_err());
    }

    #[test]
    fn weak_coupling_has_no_step_bound() {
        let s = cluster_spec(4, 3, PI / 3.0, 1.0, 0.1).unwrap();
        assert!(!s.coupling_sufficient);
        assert_eq!(s.h_max, 0.0);
    }

    #[test]
    fn planted_offset_breaks_uniform_bound() {
        let rows = vec![
            vec![0.0, 0.1, 0.2],
            vec![0.0, 0.1, 10.0 * PI],
            vec![0.0, 0.1, 0.2],
        ];
        let s = RecordedSeries::new(0.01, rows).unwrap();
        let c = certify_uniform_bound(&s, PI / 3.0);
        assert!(!c.passed);
        assert_eq!(c.first_violation, Some(1));
    }
}
