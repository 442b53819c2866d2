//! Config-driven runner for the discrete Kuramoto model and generic discrete
//! gradient flows.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod sweep;
pub mod thresholds;

pub use config::RunConfig;
pub use error::{CliError, Result};
pub use runner::{run, RunOutput};
