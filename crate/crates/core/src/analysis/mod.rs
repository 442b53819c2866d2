//! Classification of asymptotic states and certification of the decay,
//! ordering and invariance bounds.

mod certify;
mod classify;
mod cluster;
mod equilibrium;
mod fit;

pub use certify::{
    arc_decay_rate, bipolar_group_rate, certify_bipolar_bounds, certify_diameter_decay,
    certify_effective_decay, certify_two_sided_decay, check_bipolar_containment,
    check_order_preservation, BipolarBoundsCertificate, BoundSide, ContainmentReport,
    DecayCertificate, ExitSide, OrderCheck, TwoSidedCertificate, RESOLUTION_FLOOR,
};
pub use classify::{
    classify_initial, classify_initial_with, ClassWitness, ClassifyOptions, InitialClass,
    InitialClassKind,
};
pub use cluster::{
    certify_cluster_invariance, certify_uniform_bound, cluster_spec, threshold_ke,
    ClusterCertificate, ClusterSpec, UniformBoundCertificate,
};
pub use equilibrium::{
    effective_phases, effective_series, match_equilibrium, EquilibriumKind, EquilibriumState,
    MatchOutcome,
};
pub use fit::{fit_decay_rate, DecayFit};
