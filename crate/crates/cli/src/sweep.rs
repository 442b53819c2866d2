//! One-parameter sweeps. Point `i` runs with seed `base ^ i` in its own
//! directory; the summary is written after all points finish.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::{Format, InitSpec, OmegaSpec, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{fmt_f64, write_atomic, write_run};
use crate::runner::{certifier_columns, run, RunOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Coupling,
    Step,
    Delta,
    DOmega,
    N,
}

impl Axis {
    pub fn as_str(&self) -> &'static str {
        match self {
            Axis::Coupling => "K",
            Axis::Step => "h",
            Axis::Delta => "delta",
            Axis::DOmega => "domega",
            Axis::N => "N",
        }
    }
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "K" | "k" | "coupling" => Ok(Axis::Coupling),
            "h" | "step" => Ok(Axis::Step),
            "delta" | "width" => Ok(Axis::Delta),
            "domega" | "d_omega" | "D(Omega)" => Ok(Axis::DOmega),
            "N" | "n" => Ok(Axis::N),
            _ => Err(CliError::config(format!(
                "unknown sweep axis {s:?} (expected K, h, delta, domega or N)"
            ))),
        }
    }
}

pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    let vals: Vec<f64> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::config(format!("bad sweep value {s:?}")))
        })
        .collect::<Result<_>>()?;
    if vals.is_empty() {
        return Err(CliError::config("sweep needs at least one value"));
    }
    Ok(vals)
}

/// The base config with `axis` set to `value` and the derived seed.
pub fn point_config(base: &RunConfig, axis: Axis, value: f64, index: usize) -> Result<RunConfig> {
    let mut c = base.clone();
    c.seed = base.seed ^ index as u64;
    match axis {
        Axis::Coupling => c.coupling = Some(value),
        Axis::Step => c.step = value,
        Axis::Delta => match &mut c.init {
            Some(InitSpec::NearSync { delta }) | Some(InitSpec::NearBipolar { delta }) => {
                *delta = value
            }
            Some(InitSpec::RandomArc { width }) => *width = value,
            _ => {
                return Err(CliError::config(
                    "delta axis needs a near_sync, near_bipolar or random_arc init",
                ))
            }
        },
        Axis::DOmega => match &mut c.omega {
            OmegaSpec::RandomUniform { d_omega } => *d_omega = value,
            _ => {
                return Err(CliError::config(
                    "domega axis needs omega.kind = \"random_uniform\"",
                ))
            }
        },
        Axis::N => {
            if !(value >= 2.0 && value.fract() == 0.0) {
                return Err(CliError::config(format!(
                    "N = {value} is not an integer >= 2"
                )));
            }
            if matches!(c.init, Some(InitSpec::Explicit { .. }))
                || matches!(c.omega, OmegaSpec::Explicit { .. })
            {
                return Err(CliError::config("N axis cannot resize explicit lists"));
            }
            c.n = Some(value as usize);
        }
    }
    c.validate()?;
    Ok(c)
}

#[derive(Debug)]
pub struct PointResult {
    pub index: usize,
    pub value: f64,
    pub seed: u64,
    pub outcome: std::result::Result<RunOutput, CliError>,
}

pub struct SweepOutcome {
    pub points: Vec<PointResult>,
    pub summary_path: PathBuf,
}

impl SweepOutcome {
    pub fn any_diverged(&self) -> bool {
        self.points
            .iter()
            .any(|p| matches!(p.outcome, Err(CliError::Divergence(_))))
    }
}

fn threads() -> Option<usize> {
    std::env::var("KDGF_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
}

/// Runs every point, writes `point_XXX/` directories and `summary.csv`.
/// Invalid point configurations abort before anything runs; divergence at a
/// point is recorded in the summary.
pub fn sweep(
    base: &RunConfig,
    axis: Axis,
    values: &[f64],
    out: &Path,
    format: Format,
) -> Result<SweepOutcome> {
    if values.is_empty() {
        return Err(CliError::config("sweep needs at least one value"));
    }
    let configs: Vec<RunConfig> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| point_config(base, axis, v, i))
        .collect::<Result<_>>()?;
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;

    let work = || -> Result<Vec<PointResult>> {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| {
                let outcome = run(cfg);
                if let Ok(o) = &outcome {
                    let dir = out.join(format!("point_{i:03}"));
                    write_run(&dir, o, format, cfg.output.trajectory)?;
                }
                Ok(PointResult {
                    index: i,
                    value: values[i],
                    seed: cfg.seed,
                    outcome,
                })
            })
            .collect()
    };
    let points = match threads() {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::config(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let cert_cols = certifier_columns(base);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "point",
        axis.as_str(),
        "seed",
        "status",
        "steps_run",
        "stop_reason",
        "final_grad_norm",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(cert_cols.iter().cloned());
    w.write_record(&header)?;
    for p in &points {
        let mut rec = vec![p.index.to_string(), fmt_f64(p.value), p.seed.to_string()];
        match &p.outcome {
            Ok(o) => {
                rec.push("ok".into());
                rec.push(o.steps_run.to_string());
                rec.push(o.stop_reason.clone());
                rec.push(fmt_f64(o.final_grad_norm));
                rec.extend(o.verdicts.iter().map(|v| v.verdict.to_string()));
            }
            Err(e) => {
                let status = if e.exit_code() == 3 {
                    "diverged"
                } else {
                    "error"
                };
                rec.push(status.into());
                rec.extend(std::iter::repeat_n(String::new(), 3 + cert_cols.len()));
            }
        }
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::io("<buffer>", e.into_error()))?;
    let summary_path = out.join("summary.csv");
    write_atomic(&summary_path, &bytes)?;
    Ok(SweepOutcome {
        points,
        summary_path,
    })
}
