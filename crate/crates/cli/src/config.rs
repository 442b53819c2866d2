//! Run configuration. TOML by default; files ending in `.json` are read as
//! JSON with the same structure.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Identical,
    Nonidentical,
    GenericDgf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopKind {
    #[default]
    GradNorm,
    MaxSteps,
    Diameter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Explicit { phases: Vec<f64> },
    RandomArc { width: f64 },
    NearBipolar { delta: f64 },
    NearSync { delta: f64 },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OmegaSpec {
    #[default]
    Zero,
    /// Centered before use.
    Explicit {
        values: Vec<f64>,
    },
    RandomUniform {
        d_omega: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Quadratic,
    DoubleWell,
    Quartic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub x0: Vec<f64>,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    /// Run even when h >= 2/C.
    #[serde(default)]
    pub allow_large_step: bool,
}

fn default_half_width() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifierName {
    Classify,
    MatchEquilibrium,
    OrderPreservation,
    DiameterDecay,
    TwoSidedDecay,
    BipolarContainment,
    BipolarBounds,
    ErrorBound,
    ClusterInvariance,
    UniformBound,
    DecayFit,
    Descent,
    Summability,
    Lojasiewicz,
}

impl CertifierName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CertifierName::Classify => "classify",
            CertifierName::MatchEquilibrium => "match_equilibrium",
            CertifierName::OrderPreservation => "order_preservation",
            CertifierName::DiameterDecay => "diameter_decay",
            CertifierName::TwoSidedDecay => "two_sided_decay",
            CertifierName::BipolarContainment => "bipolar_containment",
            CertifierName::BipolarBounds => "bipolar_bounds",
            CertifierName::ErrorBound => "error_bound",
            CertifierName::ClusterInvariance => "cluster_invariance",
            CertifierName::UniformBound => "uniform_bound",
            CertifierName::DecayFit => "decay_fit",
            CertifierName::Descent => "descent",
            CertifierName::Summability => "summability",
            CertifierName::Lojasiewicz => "lojasiewicz",
        }
    }

    pub fn for_generic(&self) -> bool {
        matches!(
            self,
            CertifierName::Descent | CertifierName::Summability | CertifierName::Lojasiewicz
        )
    }
}

/// A certifier and its parameters; unused parameters are ignored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifierSpec {
    pub name: CertifierName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    /// Write the per-step table at all.
    #[serde(default = "yes")]
    pub trajectory: bool,
    /// Keep every `stride`-th row (the last row is always kept).
    #[serde(default = "one")]
    pub stride: usize,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: None,
            format: Format::Csv,
            trajectory: true,
            stride: 1,
        }
    }
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,
    pub step: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    /// Final time; when set, replaces `max_steps` by round(horizon / step).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default = "default_conv_tol")]
    pub conv_tol: f64,
    #[serde(default)]
    pub stop: StopKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(default)]
    pub omega: OmegaSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub certifiers: Vec<CertifierSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_max_steps() -> u64 {
    kdgf::SimParams::DEFAULT_MAX_STEPS
}

fn default_conv_tol() -> f64 {
    kdgf::SimParams::DEFAULT_CONV_TOL
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let is_json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn effective_max_steps(&self) -> u64 {
        match self.horizon {
            Some(t) => (t / self.step).round() as u64,
            None => self.max_steps,
        }
    }

    pub fn is_kuramoto(&self) -> bool {
        self.model != ModelKind::GenericDgf
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(CliError::config("step must be positive"));
        }
        if !(self.conv_tol.is_finite() && self.conv_tol > 0.0) {
            return Err(CliError::config("conv_tol must be positive"));
        }
        if let Some(t) = self.horizon {
            if !(t.is_finite() && t > 0.0) {
                return Err(CliError::config("horizon must be positive"));
            }
        }
        if self.output.stride == 0 {
            return Err(CliError::config("output.stride must be at least 1"));
        }
        if self.stop == StopKind::Diameter && !self.stop_tol.is_some_and(|t| t > 0.0) {
            return Err(CliError::config(
                "stop = \"diameter\" needs a positive stop_tol",
            ));
        }
        if self.is_kuramoto() {
            let n = self.n.ok_or_else(|| CliError::config("missing n"))?;
            if n < 2 {
                return Err(CliError::config("n must be at least 2"));
            }
            match self.coupling {
                None => return Err(CliError::config("missing coupling (K)")),
                Some(k) if !(k.is_finite() && k > 0.0) => {
                    return Err(CliError::config("coupling must be positive"))
                }
                _ => {}
            }
            let init = self
                .init
                .as_ref()
                .ok_or_else(|| CliError::config("missing [init] section"))?;
            if let InitSpec::Explicit { phases } = init {
                if phases.len() != n {
                    return Err(CliError::config(format!(
                        "init.phases has {} entries, n = {n}",
                        phases.len()
                    )));
                }
            }
            match &self.omega {
                OmegaSpec::Explicit { values } if values.len() != n => {
                    return Err(CliError::config(format!(
                        "omega.values has {} entries, n = {n}",
                        values.len()
                    )));
                }
                OmegaSpec::Zero => {}
                _ if self.model == ModelKind::Identical => {
                    return Err(CliError::config(
                        "the identical model requires omega.kind = \"zero\"",
                    ));
                }
                _ => {}
            }
            if let Some(c) = self.certifiers.iter().find(|c| c.name.for_generic()) {
                return Err(CliError::config(format!(
                    "certifier {} applies only to generic_dgf",
                    c.name.as_str()
                )));
            }
        } else {
            let p = self
                .potential
                .as_ref()
                .ok_or_else(|| CliError::config("generic_dgf needs a [potential] section"))?;
            if p.x0.is_empty() {
                return Err(CliError::config("potential.x0 must not be empty"));
            }
            if p.kind != PotentialKind::Quadratic && p.x0.len() != 1 {
                return Err(CliError::config("this potential is one-dimensional"));
            }
            if let Some(c) = self.certifiers.iter().find(|c| !c.name.for_generic()) {
                return Err(CliError::config(format!(
                    "certifier {} does not apply to generic_dgf",
                    c.name.as_str()
                )));
            }
        }
        Ok(())
    }
}
