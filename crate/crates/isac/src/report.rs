//! Closed-form limits, resolutions and per-target SNR of a configuration.

use std::fmt;

use isac_core::analysis::{max_unambiguous, output_snr, processing_gain_bound, received_snr, resolutions};
use isac_core::config::linear_to_db;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::experiment::ExperimentConfig;
use crate::harness::build_trial;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetSnr {
    pub angle_deg: f64,
    pub range_m: f64,
    pub velocity_mps: f64,
    pub received_snr_db: f64,
    pub output_snr_db: f64,
    pub gain_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub sweep_value: f64,
    pub theta_max_deg: f64,
    pub range_max_m: f64,
    pub velocity_max_mps: f64,
    /// Angular resolution as a width in `sin θ`.
    pub angle_resolution_sin: f64,
    /// The same width expressed in degrees at broadside.
    pub angle_resolution_deg: f64,
    pub range_resolution_m: f64,
    pub velocity_resolution_mps: f64,
    /// Width of one zero-padded delay/Doppler bin.
    pub range_bin_m: f64,
    pub velocity_bin_mps: f64,
    pub gain_bound_db: f64,
    pub radar_cube_bytes: u128,
    /// Targets of trial 0 with the transmit signal drawn for it.
    pub targets: Vec<TargetSnr>,
}

/// Evaluates sweep point `point` of `exp`.
pub fn analyze(exp: &ExperimentConfig, point: usize) -> Result<AnalysisReport> {
    let points = exp.points()?;
    let point = points
        .get(point)
        .ok_or_else(|| HarnessError::Config(format!("sweep point {point} out of {}", points.len())))?;
    let cfg = &point.system;
    let lim = max_unambiguous(cfg);
    let res = resolutions(cfg);
    let inputs = build_trial(exp, point, 0)?;
    let targets = inputs
        .targets
        .iter()
        .map(|t| {
            let rx = received_snr(cfg, t, &inputs.tx)?;
            let out = output_snr(cfg, t, &inputs.tx)?;
            Ok(TargetSnr {
                angle_deg: t.theta.to_degrees(),
                range_m: t.range,
                velocity_mps: t.velocity,
                received_snr_db: linear_to_db(rx),
                output_snr_db: linear_to_db(out),
                gain_db: linear_to_db(out / rx),
            })
        })
        .collect::<Result<_>>()?;
    Ok(AnalysisReport {
        sweep_value: point.value,
        theta_max_deg: lim.theta_max.to_degrees(),
        range_max_m: lim.range_max,
        velocity_max_mps: lim.velocity_max,
        angle_resolution_sin: res.angle_sin,
        angle_resolution_deg: res.angle_sin.min(1.0).asin().to_degrees(),
        range_resolution_m: res.range,
        velocity_resolution_mps: res.velocity,
        range_bin_m: lim.range_max / cfg.range_bins as f64,
        velocity_bin_mps: 2.0 * lim.velocity_max / cfg.doppler_bins as f64,
        gain_bound_db: linear_to_db(processing_gain_bound(cfg)),
        radar_cube_bytes: cfg.radar_cube_bytes(),
        targets,
    })
}

impl fmt::Display for AnalysisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max unambiguous angle     {:>12.4} deg", self.theta_max_deg)?;
        writeln!(f, "max unambiguous range     {:>12.4} m", self.range_max_m)?;
        writeln!(f, "max unambiguous velocity  {:>12.4} m/s", self.velocity_max_mps)?;
        writeln!(f, "angle resolution          {:>12.4} (sin) / {:.4} deg at broadside", self.angle_resolution_sin, self.angle_resolution_deg)?;
        writeln!(f, "range resolution          {:>12.4} m (bin {:.4} m)", self.range_resolution_m, self.range_bin_m)?;
        writeln!(f, "velocity resolution       {:>12.4} m/s (bin {:.4} m/s)", self.velocity_resolution_mps, self.velocity_bin_mps)?;
        writeln!(f, "processing gain bound     {:>12.2} dB", self.gain_bound_db)?;
        writeln!(f, "radar cube                {:>12} bytes", self.radar_cube_bytes)?;
        writeln!(f)?;
        writeln!(f, "{:>10} {:>10} {:>10} {:>12} {:>12} {:>10}", "angle_deg", "range_m", "vel_mps", "rx_snr_db", "out_snr_db", "gain_db")?;
        for t in &self.targets {
            writeln!(
                f,
                "{:>10.3} {:>10.3} {:>10.3} {:>12.3} {:>12.3} {:>10.3}",
                t.angle_deg, t.range_m, t.velocity_mps, t.received_snr_db, t.output_snr_db, t.gain_db
            )?;
        }
        Ok(())
    }
}
