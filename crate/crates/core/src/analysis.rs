//! Closed-form limits, resolutions and SNR figures of the joint estimator.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use num_complex::Complex64;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::config::{SystemConfig, SPEED_OF_LIGHT};
use crate::echo::tx_coefficients;
use crate::freq::{omega_t, path_loss};
use crate::joint::{BinCoefficients, ClampPolicy, RadarCube, ScalingFactors};
use crate::scene::{BinIndex, Target};
use crate::txgen::TxSignal;
use crate::{Error, Result};

/// Largest parameter magnitudes representable without phase wrapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// `asin(min(λ/2d_r, 1))` (rad).
    pub theta_max: f64,
    /// `c / 2Δf` (m).
    pub range_max: f64,
    /// `c / 4Tf_c` (m/s).
    pub velocity_max: f64,
}

pub fn max_unambiguous(cfg: &SystemConfig) -> Limits {
    let s = cfg.wavelength() / (2.0 * cfg.rx_spacing);
    Limits {
        theta_max: if s >= 1.0 { FRAC_PI_2 } else { s.asin() },
        range_max: SPEED_OF_LIGHT / (2.0 * cfg.subcarrier_spacing),
        velocity_max: SPEED_OF_LIGHT / (4.0 * cfg.total_symbol_duration() * cfg.carrier_freq),
    }
}

/// Un-padded DFT resolutions. Zero-padding does not change them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolutions {
    /// `λ / (N_r d_r)`, a width in `sin θ`, so the angular resolution in
    /// radians widens away from broadside.
    pub angle_sin: f64,
    /// `c / (2 N_s Δf)` (m).
    pub range: f64,
    /// `c / (2 f_c L T)` (m/s).
    pub velocity: f64,
}

pub fn resolutions(cfg: &SystemConfig) -> Resolutions {
    Resolutions {
        angle_sin: cfg.wavelength() / (cfg.num_rx as f64 * cfg.rx_spacing),
        range: SPEED_OF_LIGHT / (2.0 * cfg.num_subcarriers as f64 * cfg.subcarrier_spacing),
        velocity: SPEED_OF_LIGHT / (2.0 * cfg.carrier_freq * cfg.num_symbols as f64 * cfg.total_symbol_duration()),
    }
}

fn target_coefficients(cfg: &SystemConfig, target: &Target, tx: &TxSignal) -> Result<Vec<Complex64>> {
    tx.check_against(cfg)?;
    Ok(tx_coefficients(omega_t(target.theta, cfg), tx))
}

/// Echo SNR of `target` over one CPI:
/// `σ_β² PL(2d) Σ|aᴴ(ω_t(θ)) x_i[l]|² / (N_s L σ_s²)`.
pub fn received_snr(cfg: &SystemConfig, target: &Target, tx: &TxSignal) -> Result<f64> {
    let coef = target_coefficients(cfg, target, tx)?;
    let energy: f64 = coef.iter().map(|c| c.norm_sqr()).sum();
    let pl = path_loss(2.0 * target.range, cfg)?;
    Ok(cfg.reflection_power * pl * energy / (coef.len() as f64 * cfg.sensing_noise_power))
}

fn output_snr_from(cfg: &SystemConfig, target: &Target, coef: impl Iterator<Item = f64>) -> Result<f64> {
    let pl = path_loss(2.0 * target.range, cfg)?;
    let inv: f64 = coef.map(|p| cfg.sensing_noise_power / p).sum();
    let (nr, ns, l) = (cfg.num_rx as f64, cfg.num_subcarriers as f64, cfg.num_symbols as f64);
    Ok(nr * ns * ns * l * l * cfg.reflection_power * pl / inv)
}

/// Peak-to-noise ratio of the joint estimator's output for an on-grid target:
/// `N_r N_s² L² σ_β² PL(2d) / Σ_{i,l} σ_s² / |aᴴ(ω_t(θ)) x_i[l]|²`.
///
/// Zero coefficients give an output SNR of zero.
pub fn output_snr(cfg: &SystemConfig, target: &Target, tx: &TxSignal) -> Result<f64> {
    let coef = target_coefficients(cfg, target, tx)?;
    output_snr_from(cfg, target, coef.iter().map(|c| c.norm_sqr()))
}

/// [`output_snr`] with the estimator's division clamp applied to the
/// coefficients first.
pub fn output_snr_clamped(cfg: &SystemConfig, target: &Target, tx: &TxSignal, clamp: ClampPolicy) -> Result<f64> {
    let coef = target_coefficients(cfg, target, tx)?;
    let mean = coef.iter().map(|c| c.norm()).sum::<f64>() / coef.len() as f64;
    let floor = clamp.relative_floor * mean;
    output_snr_from(cfg, target, coef.iter().map(|c| if mean == 0.0 { 1.0 } else { c.norm().max(floor).powi(2) }))
}

/// Upper bound `N_r N_s L` on output over received SNR.
pub fn processing_gain_bound(cfg: &SystemConfig) -> f64 {
    (cfg.num_rx * cfg.num_subcarriers * cfg.num_symbols) as f64
}

/// Variance of the processed noise in every angular bin (storage order):
/// `σ_z²(n_a) = Σ_{i,l} σ_s² / (N_r N_s² L² α² |c_{i,l}(n_a)|²)`.
pub fn output_noise_variance(cfg: &SystemConfig, coefs: &BinCoefficients, alpha: &ScalingFactors) -> Vec<f64> {
    let (nr, ns, l) = (cfg.num_rx as f64, cfg.num_subcarriers as f64, cfg.num_symbols as f64);
    let denom = nr * ns * ns * l * l;
    alpha
        .as_slice()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            coefs.data().slab(k).iter().map(|c| cfg.sensing_noise_power / (denom * a * a * c.norm_sqr())).sum()
        })
        .collect()
}

/// Peak power of `radar` at `peak` over the mean noise power `E|Z|²`, where
/// `noise` holds the processed value of the same bin in independent
/// noise-only runs.
pub fn empirical_output_snr(radar: &RadarCube, peak: BinIndex, noise: &[Complex64]) -> Result<f64> {
    if noise.is_empty() {
        return Err(Error::InvalidConfig("at least one noise trial is required".into()));
    }
    let value = radar.at(peak).ok_or(Error::BinOutOfRange(peak.angle, peak.delay, peak.doppler))?;
    let noise_power = noise.iter().map(|z| z.norm_sqr()).sum::<f64>() / noise.len() as f64;
    Ok(value.norm_sqr() / noise_power)
}
