use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kdgf_cli::config::Format;
use kdgf_cli::output::{report_bytes, write_atomic, write_run};
use kdgf_cli::sweep::{parse_values, sweep, Axis};
use kdgf_cli::thresholds::thresholds;
use kdgf_cli::{run, CliError, Result, RunConfig};

#[derive(Parser)]
#[command(
    name = "kdgf",
    version,
    about = "Discrete Kuramoto and gradient-flow experiments"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Trajectory format (overrides output.format).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Seed (overrides the config seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one configuration.
    Run { config: PathBuf },
    /// Run a configuration over a list of values of one parameter.
    Sweep {
        config: PathBuf,
        /// K, h, delta, domega or N.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
    },
    /// Classify the initial data of an identical-model configuration.
    Classify { config: PathBuf },
    /// Cluster coupling threshold and step bound.
    Thresholds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        n0: usize,
        #[arg(long)]
        l: f64,
        #[arg(long)]
        domega: f64,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        dtheta0: Option<f64>,
    },
}

impl Cli {
    fn load(&self, path: &Path) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(path)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out_dir(&self, cfg: Option<&RunConfig>) -> PathBuf {
        self.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
            .unwrap_or_else(|| PathBuf::from("kdgf-out"))
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn execute(cli: &Cli) -> Result<u8> {
    match &cli.cmd {
        Cmd::Run { config } => {
            let cfg = cli.load(config)?;
            let out = run(&cfg)?;
            let dir = cli.out_dir(Some(&cfg));
            write_run(&dir, &out, cfg.output.format, cfg.output.trajectory)?;
            cli.say(format!(
                "{} steps ({}), final grad norm {:e}",
                out.steps_run, out.stop_reason, out.final_grad_norm
            ));
            for v in &out.verdicts {
                cli.say(format!("  {}: {}", v.name, v.verdict));
            }
            cli.say(format!("wrote {}", dir.display()));
            Ok(0)
        }
        Cmd::Sweep {
            config,
            axis,
            values,
        } => {
            let cfg = cli.load(config)?;
            let axis: Axis = axis.parse()?;
            let values = parse_values(values)?;
            let dir = cli.out_dir(Some(&cfg));
            let res = sweep(&cfg, axis, &values, &dir, cfg.output.format)?;
            for p in &res.points {
                match &p.outcome {
                    Ok(o) => {
                        let v: Vec<String> = o
                            .verdicts
                            .iter()
                            .map(|v| format!("{}={}", v.name, v.verdict))
                            .collect();
                        cli.say(format!(
                            "point {} ({} = {}): {} steps {}",
                            p.index,
                            axis.as_str(),
                            p.value,
                            o.steps_run,
                            v.join(" ")
                        ));
                    }
                    Err(e) => eprintln!("point {}: {e}", p.index),
                }
            }
            cli.say(format!("wrote {}", res.summary_path.display()));
            Ok(if res.any_diverged() { 3 } else { 0 })
        }
        Cmd::Classify { config } => {
            let cfg = cli.load(config)?;
            let v = kdgf_cli::runner::classify(&cfg)?;
            let bytes = report_bytes(&v)?;
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
                write_atomic(&dir.join("classification.json"), &bytes)?;
            }
            print!("{}", String::from_utf8_lossy(&bytes));
            Ok(0)
        }
        Cmd::Thresholds {
            n,
            n0,
            l,
            domega,
            k,
            dtheta0,
        } => {
            let v = thresholds(*n, *n0, *l, *domega, *k, *dtheta0)?;
            print!("{}", String::from_utf8_lossy(&report_bytes(&v)?));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("kdgf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
