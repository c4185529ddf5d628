//! Digital frequencies of the echo model, ULA steering vectors, path loss
//! and the signed-bin conventions of the radar cube.
//!
//! A target at angle `θ`, range `d` and radial velocity `v` imprints three
//! phase ramps on the echo cube: `ω_r(θ)` across receive antennas, `ω_d(d)`
//! across subcarriers and `ω_v(v)` across OFDM symbols. The transmit array
//! sees `ω_t(θ)` through the signal-dependent coefficient `aᴴ(ω_t) x`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::config::{SystemConfig, SPEED_OF_LIGHT};
use crate::{Error, Result};

/// Transmit spatial frequency `2π d_t sinθ / λ_c`.
pub fn omega_t(theta: f64, cfg: &SystemConfig) -> f64 {
    2.0 * PI * cfg.tx_spacing * theta.sin() / cfg.wavelength()
}

/// Receive spatial frequency `−2π d_r sinθ / λ_c`.
pub fn omega_r(theta: f64, cfg: &SystemConfig) -> f64 {
    -2.0 * PI * cfg.rx_spacing * theta.sin() / cfg.wavelength()
}

/// Delay frequency `−4π Δf d / c`, non-positive for physical ranges.
pub fn omega_d(range: f64, cfg: &SystemConfig) -> Result<f64> {
    if range < 0.0 {
        return Err(Error::NegativeRange(range));
    }
    Ok(-4.0 * PI * cfg.subcarrier_spacing * range / SPEED_OF_LIGHT)
}

/// Doppler frequency `4π T v f_c / c`.
pub fn omega_v(velocity: f64, cfg: &SystemConfig) -> f64 {
    4.0 * PI * cfg.total_symbol_duration() * velocity * cfg.carrier_freq / SPEED_OF_LIGHT
}

/// `a(ω) = [1, e^{jω}, …, e^{j(n−1)ω}]ᵀ`.
pub fn steering_vector(omega: f64, n: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::EmptyArray);
    }
    Ok((0..n).map(|k| Complex64::from_polar(1.0, k as f64 * omega)).collect())
}

/// `aᴴ(ω) x = Σₙ e^{−jnω} xₙ` without materialising `a`.
pub fn steer_inner(omega: f64, x: &[Complex64]) -> Complex64 {
    let step = Complex64::from_polar(1.0, -omega);
    let mut phasor = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, xn) in x.iter().enumerate() {
        // re-anchor periodically so long arrays do not accumulate drift
        if n % 64 == 0 {
            phasor = Complex64::from_polar(1.0, -(n as f64) * omega);
        }
        acc += phasor * xn;
        phasor *= step;
    }
    acc
}

/// One-way path loss `c_0 (d/d_0)^{−α}`.
pub fn path_loss(distance: f64, cfg: &SystemConfig) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::NonPositiveDistance(distance));
    }
    Ok(cfg.ref_path_loss * (distance / cfg.ref_distance).powf(-cfg.path_loss_exponent))
}

/// Storage ↔ signed-bin conventions.
///
/// Spatial and Doppler axes use FFT-natural order: storage `k` is bin `k`
/// for `k < ⌈N/2⌉` and `k − N` above, so even `N` spans `[−N/2, N/2 − 1]`.
/// The delay axis stores bin `n_d = −k` at index `k`, spanning
/// `[−N_d + 1, 0]`.
pub mod bins {
    use core::f64::consts::PI;

    /// Signed bin of storage index `k` on a centered axis of length `n`.
    pub fn centered(k: usize, n: usize) -> i64 {
        debug_assert!(k < n);
        if k < n.div_ceil(2) {
            k as i64
        } else {
            k as i64 - n as i64
        }
    }

    /// Storage index of a signed centered bin, if it is in range.
    pub fn centered_index(bin: i64, n: usize) -> Option<usize> {
        let n_i = n as i64;
        let lo = -(n_i / 2);
        let hi = (n_i - 1) / 2;
        if bin < lo || bin > hi {
            return None;
        }
        Some(bin.rem_euclid(n_i) as usize)
    }

    /// Signed delay bin of storage index `k`.
    pub fn delay(k: usize) -> i64 {
        -(k as i64)
    }

    /// Storage index of a delay bin in `[−n + 1, 0]`.
    pub fn delay_index(bin: i64, n: usize) -> Option<usize> {
        if bin > 0 || bin <= -(n as i64) {
            return None;
        }
        Some((-bin) as usize)
    }

    /// Digital frequency `2π k / N` of a signed bin.
    pub fn frequency(bin: i64, n: usize) -> f64 {
        2.0 * PI * bin as f64 / n as f64
    }
}
