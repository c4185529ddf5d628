//! Monte-Carlo sweeps.
//!
//! Every trial of every sweep point redraws, from its own derived stream:
//! the scene geometry (random scenes only), the reflection coefficients
//! (unless fixed), the user channels, the data symbols and the receiver
//! noise. Streams are keyed by `(master_seed, sweep index, trial, purpose)`
//! so results do not depend on worker count or completion order, and a new
//! point appended to `sweep_values` leaves existing points untouched.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use isac_core::metrics::{trial_errors, Dimension, RmseAccumulator, SquaredErrors};
use isac_core::rng::{derive_seed, Purpose};
use isac_core::txgen::{assemble_tx, gen_qam_symbols, zf_precoder, CommChannel, PowerSplit};
use isac_core::{
    estimate_joint, estimate_separate, simulate_echo_cube, EchoCube, EstimateSet, FourierEngine, JointOptions, Scaling,
    SeparateOptions, SystemConfig, Target, TxSignal,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{io_err, HarnessError, Result};
use crate::experiment::{EstimatorKind, ExperimentConfig, SweepPoint};
use crate::fft::RustFftEngine;

/// Everything simulated for one trial.
#[derive(Debug, Clone)]
pub struct TrialInputs {
    pub targets: Vec<Target>,
    /// Sensing beam directions actually used (radians).
    pub sensing: Vec<f64>,
    pub tx: TxSignal,
    pub echo: EchoCube,
}

/// Sensing beams: the configured directions, or the target angles with
/// near-duplicates dropped (closer than half a transmit beamwidth in
/// `sin θ`, which would make zero-forcing ill-conditioned). At most
/// `N_t − K` beams are formed.
pub fn sensing_directions(exp: &ExperimentConfig, cfg: &SystemConfig, targets: &[Target]) -> Vec<f64> {
    let budget = cfg.num_tx.saturating_sub(cfg.num_users);
    if let Some(fixed) = &exp.sensing_angles_deg {
        return fixed.iter().take(budget).map(|d| d.to_radians()).collect();
    }
    let min_gap = cfg.wavelength() / (2.0 * cfg.num_tx as f64 * cfg.tx_spacing);
    let mut dirs: Vec<f64> = Vec::with_capacity(targets.len());
    for t in targets {
        if dirs.len() == budget {
            break;
        }
        if dirs.iter().all(|d: &f64| (d.sin() - t.theta.sin()).abs() >= min_gap) {
            dirs.push(t.theta);
        }
    }
    dirs
}

/// Draws and simulates trial `trial` of `point`.
pub fn build_trial(exp: &ExperimentConfig, point: &SweepPoint, trial: usize) -> Result<TrialInputs> {
    let cfg = &point.system;
    let key = |purpose| derive_seed(exp.master_seed, point.index as u64, trial as u64, purpose);
    let targets = exp.scene(point, trial);
    let channel = CommChannel::rayleigh(cfg.num_users, cfg.num_subcarriers, cfg.num_tx, exp.flat_channel, key(Purpose::Channel));
    let sensing = sensing_directions(exp, cfg, &targets);
    let precoders = zf_precoder(&channel, &sensing, cfg, PowerSplit { sensing_fraction: exp.sensing_fraction })?;
    let streams = cfg.num_users + sensing.len();
    let symbols = gen_qam_symbols(streams, cfg.num_subcarriers, cfg.num_symbols, cfg.qam_order, key(Purpose::Symbols))?;
    let tx = assemble_tx(&precoders, &symbols)?;
    let echo = simulate_echo_cube(cfg, &targets, &tx, exp.noise, key(Purpose::SensingNoise))?;
    Ok(TrialInputs { targets, sensing, tx, echo })
}

/// Output of one estimator on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorOutcome {
    pub kind: EstimatorKind,
    pub estimates: EstimateSet,
    pub errors: SquaredErrors,
    pub clamp_count: usize,
    /// Zero unless wall-clock recording is enabled.
    pub wall_ms: f64,
}

impl EstimatorOutcome {
    /// Mean `|Y|` over reported peaks; NaN when nothing was detected.
    pub fn mean_peak_magnitude(&self) -> f64 {
        let n = self.estimates.len();
        if n == 0 {
            return f64::NAN;
        }
        self.estimates.iter().map(|e| e.peak_magnitude).sum::<f64>() / n as f64
    }
}

/// One `(sweep point, trial)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub trial: usize,
    pub truth: Vec<Target>,
    pub outcomes: Vec<EstimatorOutcome>,
}

/// Runs one estimator, returning its estimates and clamp count.
pub fn run_estimator<E: FourierEngine>(
    engine: &E,
    kind: EstimatorKind,
    inputs: &TrialInputs,
    cfg: &SystemConfig,
    q: usize,
    separate: &SeparateOptions,
) -> Result<(EstimateSet, usize)> {
    Ok(match kind {
        EstimatorKind::Joint | EstimatorKind::JointWithoutScaling => {
            let scaling = if kind == EstimatorKind::Joint { Scaling::PowerPreserving } else { Scaling::Unit };
            let out = estimate_joint(engine, &inputs.echo, &inputs.tx, cfg, q, JointOptions { scaling, ..Default::default() })?;
            (out.estimates, out.clamped)
        }
        EstimatorKind::Separate => {
            let out = estimate_separate(engine, &inputs.echo, &inputs.tx, cfg, q, separate)?;
            (out.estimates, out.clamped)
        }
    })
}

fn run_trial<E: FourierEngine>(engine: &E, exp: &ExperimentConfig, point: &SweepPoint, trial: usize) -> Result<TrialResult> {
    let inputs = build_trial(exp, point, trial)?;
    let cfg = &point.system;
    let separate = SeparateOptions { angle_significance: exp.separate_angle_significance, ..Default::default() };
    let q = inputs.targets.len();
    let mut outcomes = Vec::with_capacity(exp.estimators.len());
    for &kind in &exp.estimators {
        let start = Instant::now();
        let (estimates, clamp_count) = run_estimator(engine, kind, &inputs, cfg, q, &separate)?;
        let wall_ms = if exp.record_wall_time { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
        let errors = trial_errors(&inputs.targets, &estimates, cfg)?;
        outcomes.push(EstimatorOutcome { kind, estimates, errors, clamp_count, wall_ms });
    }
    Ok(TrialResult { sweep_index: point.index, sweep_value: point.value, trial, truth: inputs.targets, outcomes })
}

/// Results of a whole sweep, ordered by sweep point then trial.
#[derive(Debug, Clone)]
pub struct SweepResults {
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
    pub trials: Vec<TrialResult>,
}

/// Aggregate over all trials of one sweep point and estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub sweep_value: f64,
    pub estimator: EstimatorKind,
    pub trials: usize,
    pub rmse_angle_deg: f64,
    pub rmse_range_m: f64,
    pub rmse_velocity_mps: f64,
    /// Targets left unmatched over all trials.
    pub missed: usize,
    pub mean_clamp_count: f64,
}

#[derive(Serialize)]
struct TrialRow {
    sweep_value: f64,
    trial: usize,
    estimator: EstimatorKind,
    rmse_angle_deg: f64,
    rmse_range_m: f64,
    rmse_velocity_mps: f64,
    mean_peak_mag: f64,
    clamp_count: usize,
    wall_ms: f64,
}

pub const TRIALS_FILE: &str = "results.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Validates every sweep point, then runs all trials on the configured
/// worker pool.
pub fn run_sweep(exp: &ExperimentConfig) -> Result<SweepResults> {
    let points = exp.points()?;
    let engine = RustFftEngine::new();
    let work: Vec<(usize, usize)> =
        (0..points.len()).flat_map(|p| (0..exp.trials).map(move |t| (p, t))).collect();
    let job = || -> Result<Vec<TrialResult>> {
        work.par_iter().map(|&(p, t)| run_trial(&engine, exp, &points[p], t)).collect()
    };
    let trials = if exp.workers == 0 {
        job()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(exp.workers)
            .build()
            .map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?
            .install(job)?
    };
    Ok(SweepResults { config: exp.clone(), points, trials })
}

impl SweepResults {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut rows = Vec::new();
        for point in &self.points {
            for &kind in &self.config.estimators {
                let mut acc = RmseAccumulator::default();
                let (mut missed, mut clamps) = (0, 0usize);
                for trial in self.trials.iter().filter(|t| t.sweep_index == point.index) {
                    let o = trial.outcomes.iter().find(|o| o.kind == kind).expect("every estimator ran");
                    acc.push(&o.errors);
                    missed += o.errors.missed;
                    clamps += o.clamp_count;
                }
                rows.push(SummaryRow {
                    sweep_value: point.value,
                    estimator: kind,
                    trials: acc.trials(),
                    rmse_angle_deg: acc.rmse(Dimension::Angle),
                    rmse_range_m: acc.rmse(Dimension::Range),
                    rmse_velocity_mps: acc.rmse(Dimension::Velocity),
                    missed,
                    mean_clamp_count: clamps as f64 / acc.trials() as f64,
                });
            }
        }
        rows
    }

    /// Summary row for `value` and `kind`.
    pub fn rmse(&self, value: f64, kind: EstimatorKind) -> Option<SummaryRow> {
        self.summary().into_iter().find(|r| r.sweep_value == value && r.estimator == kind)
    }

    /// One row per `(sweep point, trial, estimator)`.
    pub fn write_trials_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for t in &self.trials {
            for o in &t.outcomes {
                out.serialize(TrialRow {
                    sweep_value: t.sweep_value,
                    trial: t.trial,
                    estimator: o.kind,
                    rmse_angle_deg: o.errors.angle_deg2.sqrt(),
                    rmse_range_m: o.errors.range_m2.sqrt(),
                    rmse_velocity_mps: o.errors.velocity_m2s2.sqrt(),
                    mean_peak_mag: o.mean_peak_magnitude(),
                    clamp_count: o.clamp_count,
                    wall_ms: o.wall_ms,
                })?;
            }
        }
        out.flush().map_err(|e| HarnessError::Csv(e.into()))
    }

    pub fn write_summary_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.summary() {
            out.serialize(row)?;
        }
        out.flush().map_err(|e| HarnessError::Csv(e.into()))
    }

    /// Run manifest echoing the resolved configuration of every point.
    pub fn manifest(&self) -> serde_json::Value {
        let points: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|p| serde_json::json!({ "index": p.index, "value": p.value, "target_count": p.target_count, "system": system_json(&p.system) }))
            .collect();
        serde_json::json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "points": points,
            "seed_rule": "splitmix64 chain over (master_seed, sweep index, trial, purpose), feeding ChaCha12",
            "redrawn_per_trial": ["scene geometry (random scenes)", "reflection coefficients (unless fixed)", "user channels", "data symbols", "sensing noise"],
            "files": { "trials": TRIALS_FILE, "summary": SUMMARY_FILE },
        })
    }

    /// Writes the trial CSV, summary CSV and manifest into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        let create = |name: &str| -> Result<(PathBuf, BufWriter<File>)> {
            let path = dir.join(name);
            let file = File::create(&path).map_err(io_err(&path))?;
            Ok((path, BufWriter::new(file)))
        };
        let (trials, w) = create(TRIALS_FILE)?;
        self.write_trials_csv(w)?;
        let (summary, w) = create(SUMMARY_FILE)?;
        self.write_summary_csv(w)?;
        let (manifest, mut w) = create(MANIFEST_FILE)?;
        serde_json::to_writer_pretty(&mut w, &self.manifest())?;
        w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(&manifest))?;
        Ok(vec![trials, summary, manifest])
    }
}

/// SI, linear-unit view of a system configuration.
pub fn system_json(cfg: &SystemConfig) -> serde_json::Value {
    serde_json::json!({
        "carrier_freq": cfg.carrier_freq,
        "subcarrier_spacing": cfg.subcarrier_spacing,
        "num_subcarriers": cfg.num_subcarriers,
        "cp_duration": cfg.cp_duration,
        "total_symbol_duration": cfg.total_symbol_duration(),
        "num_symbols": cfg.num_symbols,
        "num_tx": cfg.num_tx,
        "num_rx": cfg.num_rx,
        "tx_spacing": cfg.tx_spacing,
        "rx_spacing": cfg.rx_spacing,
        "ref_path_loss": cfg.ref_path_loss,
        "ref_distance": cfg.ref_distance,
        "path_loss_exponent": cfg.path_loss_exponent,
        "reflection_power": cfg.reflection_power,
        "comm_noise_power": cfg.comm_noise_power,
        "sensing_noise_power": cfg.sensing_noise_power,
        "qam_order": cfg.qam_order,
        "angle_bins": cfg.angle_bins,
        "range_bins": cfg.range_bins,
        "doppler_bins": cfg.doppler_bins,
        "num_users": cfg.num_users,
        "tx_power": cfg.tx_power,
    })
}
