//! System parameters of the MIMO-OFDM ISAC link and scene sanity checks.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::scene::Target;
use crate::{Error, Result};

/// Propagation speed used throughout (m/s).
pub const SPEED_OF_LIGHT: f64 = 3e8;

/// Converts a power ratio in dB to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// OFDM numerology, array geometry, channel and noise parameters, and the
/// DFT sizes of the estimator. All quantities are SI and linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Carrier frequency `f_c` (Hz).
    pub carrier_freq: f64,
    /// Subcarrier spacing `Δf` (Hz). The useful symbol duration is `1/Δf`.
    pub subcarrier_spacing: f64,
    /// Number of subcarriers `N_s`.
    pub num_subcarriers: usize,
    /// Cyclic-prefix duration `T_cp` (s).
    pub cp_duration: f64,
    /// OFDM symbols per coherent processing interval `L`.
    pub num_symbols: usize,
    /// Transmit antennas `N_t`.
    pub num_tx: usize,
    /// Receive antennas `N_r`.
    pub num_rx: usize,
    /// Transmit element spacing `d_t` (m).
    pub tx_spacing: f64,
    /// Receive element spacing `d_r` (m).
    pub rx_spacing: f64,
    /// Path loss at the reference distance, `c_0` (linear).
    pub ref_path_loss: f64,
    /// Reference distance `d_0` (m).
    pub ref_distance: f64,
    /// Path-loss exponent `α`.
    pub path_loss_exponent: f64,
    /// Reflection-coefficient power `σ_β²` (linear).
    pub reflection_power: f64,
    /// Communication noise power `σ_c²` (W).
    pub comm_noise_power: f64,
    /// Sensing noise power `σ_s²` (W).
    pub sensing_noise_power: f64,
    /// Square QAM constellation size.
    pub qam_order: usize,
    /// Spatial DFT size `N_a`.
    pub angle_bins: usize,
    /// Delay DFT size `N_d`.
    pub range_bins: usize,
    /// Doppler DFT size `N_v`.
    pub doppler_bins: usize,
    /// Communication users `K`.
    pub num_users: usize,
    /// Total transmit power `P_tx` (W).
    pub tx_power: f64,
}

impl SystemConfig {
    /// The 28 GHz 5G NR settings: 512 subcarriers at 120 kHz, 256 symbols,
    /// 16×16 half-wavelength arrays and 3× zero-padded DFTs.
    ///
    /// The total symbol duration is pinned to 8.92 µs; `T_cp` is whatever
    /// remains after the 1/Δf useful part.
    pub fn reference() -> Self {
        let carrier_freq = 28e9;
        let subcarrier_spacing = 120e3;
        let wavelength = SPEED_OF_LIGHT / carrier_freq;
        let num_subcarriers = 512;
        let num_symbols = 256;
        let num_rx = 16;
        Self {
            carrier_freq,
            subcarrier_spacing,
            num_subcarriers,
            cp_duration: 8.92e-6 - 1.0 / subcarrier_spacing,
            num_symbols,
            num_tx: 16,
            num_rx,
            tx_spacing: 0.5 * wavelength,
            rx_spacing: 0.5 * wavelength,
            ref_path_loss: db_to_linear(-30.0),
            ref_distance: 1.0,
            path_loss_exponent: 2.8,
            reflection_power: db_to_linear(-10.0),
            comm_noise_power: dbm_to_watts(-60.0),
            sensing_noise_power: dbm_to_watts(-60.0),
            qam_order: 16,
            angle_bins: 3 * num_rx,
            range_bins: 3 * num_subcarriers,
            doppler_bins: 3 * num_symbols,
            num_users: 2,
            tx_power: dbm_to_watts(30.0),
        }
    }

    /// Reference 28 GHz physics with reduced dimensions (`N_t = N_r = 8`, `N_s = 64`,
    /// `L = 32`), keeping the 3× zero-padding.
    pub fn desk() -> Self {
        Self::reference().with_dims(8, 8, 64, 32)
    }

    /// Replaces array and OFDM grid sizes and rescales the DFT sizes to 3×.
    pub fn with_dims(mut self, num_tx: usize, num_rx: usize, num_subcarriers: usize, num_symbols: usize) -> Self {
        self.num_tx = num_tx;
        self.num_rx = num_rx;
        self.num_subcarriers = num_subcarriers;
        self.num_symbols = num_symbols;
        self.angle_bins = 3 * num_rx;
        self.range_bins = 3 * num_subcarriers;
        self.doppler_bins = 3 * num_symbols;
        self
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Useful OFDM symbol duration `T_d = 1/Δf`.
    pub fn symbol_duration(&self) -> f64 {
        1.0 / self.subcarrier_spacing
    }

    /// Total symbol duration `T = T_d + T_cp`.
    pub fn total_symbol_duration(&self) -> f64 {
        self.symbol_duration() + self.cp_duration
    }

    /// Echo cube shape `[N_r, N_s, L]`.
    pub fn echo_shape(&self) -> [usize; 3] {
        [self.num_rx, self.num_subcarriers, self.num_symbols]
    }

    /// Radar cube shape `[N_a, N_d, N_v]`.
    pub fn radar_shape(&self) -> [usize; 3] {
        [self.angle_bins, self.range_bins, self.doppler_bins]
    }

    /// Bytes needed to hold the complex radar cube.
    pub fn radar_cube_bytes(&self) -> u128 {
        self.angle_bins as u128 * self.range_bins as u128 * self.doppler_bins as u128 * 16
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("carrier_freq", self.carrier_freq),
            ("subcarrier_spacing", self.subcarrier_spacing),
            ("tx_spacing", self.tx_spacing),
            ("rx_spacing", self.rx_spacing),
            ("ref_path_loss", self.ref_path_loss),
            ("ref_distance", self.ref_distance),
            ("path_loss_exponent", self.path_loss_exponent),
            ("reflection_power", self.reflection_power),
            ("comm_noise_power", self.comm_noise_power),
            ("sensing_noise_power", self.sensing_noise_power),
            ("tx_power", self.tx_power),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {value}")));
            }
        }
        if !(self.cp_duration >= 0.0 && self.cp_duration.is_finite()) {
            return Err(Error::InvalidConfig(format!("cp_duration must be non-negative, got {}", self.cp_duration)));
        }
        let counts = [
            ("num_subcarriers", self.num_subcarriers),
            ("num_symbols", self.num_symbols),
            ("num_tx", self.num_tx),
            ("num_rx", self.num_rx),
            ("num_users", self.num_users),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.num_users > self.num_tx {
            return Err(Error::InvalidConfig(format!(
                "{} users cannot be zero-forced with {} transmit antennas",
                self.num_users, self.num_tx
            )));
        }
        if !matches!(self.qam_order, 4 | 16 | 64 | 256) {
            return Err(Error::UnsupportedQamOrder(self.qam_order));
        }
        let dft = [
            ("spatial", self.angle_bins, self.num_rx),
            ("delay", self.range_bins, self.num_subcarriers),
            ("Doppler", self.doppler_bins, self.num_symbols),
        ];
        for (axis, points, required) in dft {
            if points < required {
                return Err(Error::DftTooShort { axis, points, required });
            }
        }
        Ok(())
    }
}

/// Outcome of checking a target scene against the ISI-free echo model and
/// the unambiguous region.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneCheck {
    /// Round-trip delay between nearest and furthest target (s).
    pub delay_spread: f64,
    /// Largest absolute round-trip delay (s).
    pub max_round_trip: f64,
    /// Cyclic-prefix duration the delays were compared against (s).
    pub cp_duration: f64,
    /// Indices of targets outside `(θ_max, d_max, v_max)`.
    pub ambiguous_targets: Vec<usize>,
}

impl SceneCheck {
    pub fn new(cfg: &SystemConfig, targets: &[Target]) -> Self {
        let (lo, hi) = targets.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), t| {
            (lo.min(t.range), hi.max(t.range))
        });
        let spread = if targets.is_empty() { 0.0 } else { 2.0 * (hi - lo) / SPEED_OF_LIGHT };
        let limits = crate::analysis::max_unambiguous(cfg);
        let ambiguous_targets = targets
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                !(t.theta.abs() < limits.theta_max
                    && t.range > 0.0
                    && t.range < limits.range_max
                    && t.velocity.abs() < limits.velocity_max)
            })
            .map(|(q, _)| q)
            .collect();
        Self {
            delay_spread: spread,
            max_round_trip: 2.0 * hi / SPEED_OF_LIGHT,
            cp_duration: cfg.cp_duration,
            ambiguous_targets,
        }
    }

    /// Delay spread fits inside the cyclic prefix.
    pub fn spread_ok(&self) -> bool {
        self.delay_spread <= self.cp_duration
    }

    /// Every absolute round trip fits inside the cyclic prefix.
    pub fn round_trip_ok(&self) -> bool {
        self.max_round_trip <= self.cp_duration
    }

    /// Rejects a scene whose delay spread exceeds the CP; with `strict`, the
    /// absolute round-trip delay must fit as well.
    pub fn enforce(&self, strict: bool) -> Result<()> {
        if !self.spread_ok() {
            return Err(Error::CyclicPrefixTooShort { spread: self.delay_spread, cp: self.cp_duration });
        }
        if strict && !self.round_trip_ok() {
            return Err(Error::CyclicPrefixTooShort { spread: self.max_round_trip, cp: self.cp_duration });
        }
        Ok(())
    }
}
