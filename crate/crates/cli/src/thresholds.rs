use kdgf::analysis::{cluster_spec, threshold_ke, ClusterSpec};
use serde_json::{json, Value};

use crate::error::Result;

/// Coupling threshold and step bound of a majority cluster. Without an
/// explicit coupling the step bound is reported for K = 2 k_min.
pub fn thresholds(
    n: usize,
    n0: usize,
    l: f64,
    d_omega: f64,
    coupling: Option<f64>,
    d_theta0: Option<f64>,
) -> Result<Value> {
    let probe = cluster_spec(n, n0, l, d_omega, coupling.unwrap_or(1.0))?;
    let k = coupling.unwrap_or(2.0 * probe.k_min);
    let spec = cluster_spec(n, n0, l, d_omega, k)?;
    let ke = match d_theta0 {
        Some(d) => json!(threshold_ke(d_omega, d)?),
        None => Value::Null,
    };
    Ok(json!({
        "n": n,
        "n0": n0,
        "l": l,
        "l_cap": ClusterSpec::l_cap(n, n0),
        "d_omega": d_omega,
        "k_min": probe.k_min,
        "coupling": k,
        "h_max": spec.h_max,
        "coupling_sufficient": spec.coupling_sufficient,
        "uniform_bound": probe.uniform_bound(),
        "k_e": ke,
    }))
}
