#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation and verification tools for the forward-Euler Kuramoto model
//! and for discrete gradient flows.

pub mod analysis;
pub mod dgf;
pub mod error;
pub mod init;
pub mod integrate;
pub mod model;
pub mod sum;

pub use error::{Error, Result};
pub use integrate::{
    euler_error_bound, euler_step, rk4_reference, simulate, ErrorBoundReport, PhaseSeries,
    RecordedSeries, Rk4Reference, StepDiagnostics, StopReason, StopRule, Trajectory,
};
pub use model::{
    diameter, kuramoto_gradient, kuramoto_potential, order_parameter, NaturalFrequencies,
    OrderParameter, PhaseConfig, SimParams,
};
