//! Successive single-snapshot baseline.
//!
//! Angles come from the spatial DFT of one snapshot `y(m, 0, 0)`. For each
//! angle, the first OFDM symbol is beamformed toward it, stripped of its
//! transmit coefficient and transformed over subcarriers to give a range.
//! Velocity then uses all symbols, but only at the already chosen angle
//! and range bins, so earlier mistakes carry forward.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::dft::FourierEngine;
use crate::echo::{tx_coefficients, EchoCube};
use crate::freq::bins;
use crate::joint::{bin_to_params, bin_tx_frequency, ClampPolicy};
use crate::peaks::find_peaks_1d;
use crate::scene::{BinIndex, Estimate, EstimateSet};
use crate::txgen::TxSignal;
use crate::{Error, Result};

/// Read access to echo samples `y(m, i, l)`.
pub trait EchoSource {
    /// `[N_r, N_s, L]`.
    fn shape(&self) -> [usize; 3];
    fn sample(&self, antenna: usize, subcarrier: usize, symbol: usize) -> Complex64;
}

impl EchoSource for EchoCube {
    fn shape(&self) -> [usize; 3] {
        EchoCube::shape(self)
    }

    fn sample(&self, antenna: usize, subcarrier: usize, symbol: usize) -> Complex64 {
        self.get(antenna, subcarrier, symbol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparateOptions {
    /// Angular maxima weaker than this fraction of the strongest one (in
    /// magnitude) are not counted as targets.
    pub angle_significance: f64,
    pub clamp: ClampPolicy,
}

impl Default for SeparateOptions {
    fn default() -> Self {
        Self { angle_significance: 0.25, clamp: ClampPolicy::default() }
    }
}

/// Angular peaks of the single-snapshot spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleStage {
    /// `|Y(n_a)|` in storage order.
    pub spectrum: Vec<f64>,
    /// Storage indices of accepted peaks, strongest first.
    pub peaks: Vec<usize>,
}

/// `N_a`-point normalised DFT of `y(m, 0, 0)` and its `q` strongest
/// significant peaks.
pub fn angle_stage<E: FourierEngine, S: EchoSource + ?Sized>(
    engine: &E,
    src: &S,
    cfg: &SystemConfig,
    q: usize,
    opts: &SeparateOptions,
) -> AngleStage {
    let num_rx = src.shape()[0];
    let na = cfg.angle_bins;
    let mut buf = vec![Complex64::new(0.0, 0.0); na];
    for (m, slot) in buf.iter_mut().enumerate().take(num_rx) {
        *slot = src.sample(m, 0, 0);
    }
    engine.forward(&mut buf, na);
    let spectrum: Vec<f64> = buf.iter().map(|z| z.norm() / num_rx as f64).collect();
    let cell = na as f64 / num_rx as f64;
    let peaks = find_peaks_1d(&spectrum, |k| bins::centered(k, na), true, cell, q, opts.angle_significance);
    AngleStage { spectrum, peaks }
}

/// Beamformed, coefficient-free snapshot `Y_{i,l}(n_a) / c_{i,l}(n_a)` over
/// all subcarriers of symbol `l`.
fn divided_row<S: EchoSource + ?Sized>(src: &S, cfg: &SystemConfig, angle: usize, coef: &[Complex64], l: usize) -> Vec<Complex64> {
    let [num_rx, num_subcarriers, num_symbols] = src.shape();
    let w = bins::frequency(bins::centered(angle, cfg.angle_bins), cfg.angle_bins);
    let steer: Vec<Complex64> = (0..num_rx).map(|m| Complex64::from_polar(1.0, -(m as f64) * w)).collect();
    (0..num_subcarriers)
        .map(|i| {
            let y: Complex64 = steer.iter().enumerate().map(|(m, s)| src.sample(m, i, l) * s).sum();
            y / (num_rx as f64 * coef[i * num_symbols + l])
        })
        .collect()
}

/// Zero-padded, normalised DFT of `seq` into `n` points.
fn padded_dft<E: FourierEngine>(engine: &E, seq: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[..seq.len()].copy_from_slice(seq);
    engine.forward(&mut buf, n);
    let scale = 1.0 / seq.len() as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// FFT output rearranged onto delay storage (`n_d = −k` at index `k`).
fn to_delay_storage(spec: &[Complex64]) -> Vec<Complex64> {
    let n = spec.len();
    (0..n).map(|k| spec[(n - k) % n]).collect()
}

fn clamped_coefficients(tx: &TxSignal, cfg: &SystemConfig, angle: usize, clamp: ClampPolicy) -> (Vec<Complex64>, usize) {
    let mut coef = tx_coefficients(bin_tx_frequency(angle, cfg), tx);
    let clamped = clamp.apply(&mut coef);
    (coef, clamped)
}

/// Range bin (delay storage index) at angular storage index `angle`, using
/// symbol `l = 0` only.
pub fn range_stage<E: FourierEngine, S: EchoSource + ?Sized>(
    engine: &E,
    src: &S,
    coef: &[Complex64],
    cfg: &SystemConfig,
    angle: usize,
) -> usize {
    let row = divided_row(src, cfg, angle, coef, 0);
    let spec = to_delay_storage(&padded_dft(engine, &row, cfg.range_bins));
    let mag: Vec<f64> = spec.iter().map(|z| z.norm()).collect();
    find_peaks_1d(&mag, bins::delay, false, 1.0, 1, 0.0)[0]
}

/// Doppler storage index and peak magnitude at the chosen angle and range.
pub fn velocity_stage<E: FourierEngine, S: EchoSource + ?Sized>(
    engine: &E,
    src: &S,
    coef: &[Complex64],
    cfg: &SystemConfig,
    angle: usize,
    range: usize,
) -> (usize, f64) {
    let num_symbols = src.shape()[2];
    let nd = cfg.range_bins;
    let slow_time: Vec<Complex64> = (0..num_symbols)
        .map(|l| {
            let row = divided_row(src, cfg, angle, coef, l);
            let spec = padded_dft(engine, &row, nd);
            spec[(nd - range) % nd]
        })
        .collect();
    let spec = padded_dft(engine, &slow_time, cfg.doppler_bins);
    let mag: Vec<f64> = spec.iter().map(|z| z.norm()).collect();
    let k = find_peaks_1d(&mag, |k| bins::centered(k, cfg.doppler_bins), true, 1.0, 1, 0.0)[0];
    (k, mag[k])
}

/// Output of [`estimate_separate`].
#[derive(Debug, Clone)]
pub struct SeparateOutput {
    pub estimates: EstimateSet,
    pub angle: AngleStage,
    /// Coefficients raised to the clamp floor.
    pub clamped: usize,
}

/// Runs the baseline for `q` targets. Fewer than `q` significant angular
/// peaks yields fewer estimates and sets `shortfall`.
pub fn estimate_separate<E: FourierEngine, S: EchoSource + ?Sized>(
    engine: &E,
    src: &S,
    tx: &TxSignal,
    cfg: &SystemConfig,
    q: usize,
    opts: &SeparateOptions,
) -> Result<SeparateOutput> {
    cfg.validate()?;
    if src.shape() != cfg.echo_shape() {
        return Err(Error::ShapeMismatch { expected: cfg.echo_shape(), found: src.shape() });
    }
    tx.check_against(cfg)?;
    let angle = angle_stage(engine, src, cfg, q, opts);
    let mut estimates = Vec::with_capacity(angle.peaks.len());
    let mut clamped = 0;
    for &ka in &angle.peaks {
        let (coef, c) = clamped_coefficients(tx, cfg, ka, opts.clamp);
        clamped += c;
        let kd = range_stage(engine, src, &coef, cfg, ka);
        let (kv, peak_magnitude) = velocity_stage(engine, src, &coef, cfg, ka, kd);
        let bin = BinIndex::new(bins::centered(ka, cfg.angle_bins), bins::delay(kd), bins::centered(kv, cfg.doppler_bins));
        let (theta, range, velocity) = bin_to_params(bin, cfg)?;
        estimates.push(Estimate { theta, range, velocity, peak_magnitude, bin });
    }
    let shortfall = estimates.len() < q;
    Ok(SeparateOutput { estimates: EstimateSet { estimates, shortfall }, angle, clamped })
}
