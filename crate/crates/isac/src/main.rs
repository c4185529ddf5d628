use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use isac::harness::run_estimator;
use isac::{analyze, build_trial, export_radar_image, run_sweep, tensor_file, AxisPair, EstimatorKind, ExperimentConfig, RustFftEngine};
use isac_core::joint::{estimate_joint, JointOptions, Scaling};
use isac_core::{EchoCube, EstimateSet, RadarCube, SeparateOptions, Target, TxSignal};
use serde_json::json;

#[derive(Parser)]
#[command(name = "isac", version, about = "MIMO-OFDM sensing simulator and joint angle-range-velocity estimator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Desk,
    Full,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Experiment config (TOML). Without it the preset is used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
    /// Sweep point to use.
    #[arg(long, default_value_t = 0)]
    point: usize,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<ExperimentConfig> {
        match &self.config {
            Some(path) => Ok(ExperimentConfig::load(path)?),
            None => Ok(match self.preset {
                Preset::Desk => ExperimentConfig::default(),
                Preset::Full => ExperimentConfig::full_scale(),
            }),
        }
    }

    fn point(&self, exp: &ExperimentConfig) -> anyhow::Result<isac::SweepPoint> {
        let mut points = exp.points()?;
        if self.point >= points.len() {
            bail!("sweep point {} out of {}", self.point, points.len());
        }
        Ok(points.swap_remove(self.point))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one trial and write the echo cube and transmit tensor.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        echo: PathBuf,
        #[arg(long)]
        tx: PathBuf,
        /// Ground-truth targets as JSON.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Estimate targets from an echo cube and its transmit tensor.
    Estimate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        echo: PathBuf,
        #[arg(long)]
        tx: PathBuf,
        /// Number of targets to report.
        #[arg(long)]
        targets: usize,
        #[arg(long, value_enum, default_value = "joint")]
        estimator: Estimator,
        /// Also write the joint radar cube.
        #[arg(long)]
        radar: Option<PathBuf>,
        /// Output JSON; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo sweep and write CSV results and a manifest.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Print unambiguous limits, resolutions and per-target SNR.
    Analyze {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        json: bool,
    },
    /// Reduce a radar cube to a 2-D magnitude image (CSV).
    RadarImage {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        cube: PathBuf,
        /// angle-range, angle-velocity or range-velocity.
        #[arg(long, default_value = "angle-range")]
        axes: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Joint,
    JointWithoutScaling,
    Separate,
}

impl From<Estimator> for EstimatorKind {
    fn from(e: Estimator) -> Self {
        match e {
            Estimator::Joint => EstimatorKind::Joint,
            Estimator::JointWithoutScaling => EstimatorKind::JointWithoutScaling,
            Estimator::Separate => EstimatorKind::Separate,
        }
    }
}

fn targets_json(targets: &[Target]) -> serde_json::Value {
    targets
        .iter()
        .map(|t| {
            json!({ "angle_deg": t.theta.to_degrees(), "range_m": t.range, "velocity_mps": t.velocity,
                    "beta_re": t.beta.re, "beta_im": t.beta.im })
        })
        .collect()
}

fn estimates_json(kind: EstimatorKind, set: &EstimateSet, clamped: usize) -> serde_json::Value {
    let list: Vec<_> = set
        .iter()
        .map(|e| {
            json!({ "angle_deg": e.theta.to_degrees(), "range_m": e.range, "velocity_mps": e.velocity,
                    "peak_magnitude": e.peak_magnitude, "bin": [e.bin.angle, e.bin.delay, e.bin.doppler] })
        })
        .collect();
    json!({ "estimator": kind, "estimates": list, "shortfall": set.shortfall, "clamp_count": clamped })
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Simulate { cfg, trial, echo, tx, truth } => {
            let exp = cfg.load()?;
            let point = cfg.point(&exp)?;
            let inputs = build_trial(&exp, &point, trial)?;
            tensor_file::save(&echo, inputs.echo.data())?;
            tensor_file::save(&tx, inputs.tx.samples())?;
            if let Some(path) = truth {
                write_json(Some(&path), &json!({ "targets": targets_json(&inputs.targets) }))?;
            }
            log::info!("wrote {} and {}", echo.display(), tx.display());
        }
        Command::Estimate { cfg, echo, tx, targets, estimator, radar, out } => {
            let exp = cfg.load()?;
            let system = cfg.point(&exp)?.system;
            let echo = EchoCube::new(&system, tensor_file::load(&echo)?)?;
            let tx = TxSignal::from_samples(tensor_file::load(&tx)?);
            let engine = RustFftEngine::new();
            let kind = EstimatorKind::from(estimator);
            let value = if kind == EstimatorKind::Separate || radar.is_none() {
                if radar.is_some() {
                    bail!("--radar is only available for the joint estimators");
                }
                let inputs = isac::TrialInputs { targets: Vec::new(), sensing: Vec::new(), tx, echo };
                let sep = SeparateOptions { angle_significance: exp.separate_angle_significance, ..Default::default() };
                let (set, clamped) = run_estimator(&engine, kind, &inputs, &system, targets, &sep)?;
                estimates_json(kind, &set, clamped)
            } else {
                let scaling = if kind == EstimatorKind::Joint { Scaling::PowerPreserving } else { Scaling::Unit };
                let outcome = estimate_joint(&engine, &echo, &tx, &system, targets, JointOptions { scaling, ..Default::default() })?;
                if let Some(path) = &radar {
                    tensor_file::save(path, outcome.cube.data())?;
                }
                estimates_json(kind, &outcome.estimates, outcome.clamped)
            };
            write_json(out.as_deref(), &value)?;
        }
        Command::Sweep { cfg, out_dir, seed, trials } => {
            let mut exp = cfg.load()?;
            if let Some(seed) = seed {
                exp.master_seed = seed;
            }
            if let Some(trials) = trials {
                exp.trials = trials;
            }
            let results = run_sweep(&exp)?;
            for path in results.write_dir(&out_dir)? {
                println!("{}", path.display());
            }
        }
        Command::Analyze { cfg, json } => {
            let exp = cfg.load()?;
            let report = analyze(&exp, cfg.point)?;
            if json {
                write_json(None, &serde_json::to_value(&report)?)?;
            } else {
                print!("{report}");
            }
        }
        Command::RadarImage { cfg, cube, axes, out } => {
            let exp = cfg.load()?;
            let system = cfg.point(&exp)?.system;
            let axes: AxisPair = axes.parse()?;
            let radar = RadarCube::new(tensor_file::load(&cube)?);
            let image = export_radar_image(&radar, &system, axes);
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            image.write_csv(BufWriter::new(file))?;
        }
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
