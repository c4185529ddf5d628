//! Joint angle-range-velocity estimation over the whole echo cube.
//!
//! 1. An `N_a`-point normalised spatial DFT splits every `(i, l)` antenna
//!    snapshot into angular bins.
//! 2. In each angular bin the known coefficient `aᴴ((−d_t/d_r) ω̃_r(n_a)) x_i[l]`
//!    is divided out, together with a per-bin factor `α` that keeps the
//!    bin's total power unchanged so the angular profile survives.
//! 3. A normalised, zero-padded 2-D DFT over subcarriers and symbols turns
//!    each angular bin into a range-Doppler map; targets are the peaks of
//!    the resulting 3-D cube.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::config::{SystemConfig, SPEED_OF_LIGHT};
use crate::dft::FourierEngine;
use crate::echo::{tx_coefficients, EchoCube};
use crate::freq::bins;
use crate::peaks::{find_peaks, PeakSet};
use crate::scene::{BinIndex, Estimate, EstimateSet};
use crate::tensor::Cube;
use crate::txgen::TxSignal;
use crate::{Error, Result};

/// Angular spectrum `Y_{i,l}(n_a)`, stored `[N_a, N_s, L]` with the angular
/// axis in FFT-natural order.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularSpectrum {
    data: Cube,
}

impl AngularSpectrum {
    pub fn new(data: Cube) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &Cube {
        &self.data
    }

    pub fn angle_bins(&self) -> usize {
        self.data.shape()[0]
    }

    /// `Σ_{i,l} |Y_{i,l}(n_a)|²` for every angular storage index.
    pub fn bin_powers(&self) -> Vec<f64> {
        (0..self.angle_bins()).map(|k| self.data.slab(k).iter().map(|z| z.norm_sqr()).sum()).collect()
    }
}

/// Lower bound on coefficient magnitudes before division.
///
/// In each angular bin, any `|c|` below `relative_floor` × the bin's mean
/// `|c|` is raised to that floor (phase kept).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampPolicy {
    pub relative_floor: f64,
}

impl ClampPolicy {
    /// Clamps one bin's coefficients in place and returns how many changed.
    /// A bin whose coefficients are all zero is replaced by ones.
    pub fn apply(&self, coef: &mut [Complex64]) -> usize {
        if coef.is_empty() {
            return 0;
        }
        let mean = coef.iter().map(|c| c.norm()).sum::<f64>() / coef.len() as f64;
        if mean == 0.0 {
            coef.fill(Complex64::new(1.0, 0.0));
            return coef.len();
        }
        let floor = self.relative_floor * mean;
        let mut clamped = 0;
        for c in coef.iter_mut() {
            let mag = c.norm();
            if mag < floor {
                clamped += 1;
                *c = if mag > 0.0 { *c * (floor / mag) } else { Complex64::new(floor, 0.0) };
            }
        }
        clamped
    }
}

impl Default for ClampPolicy {
    fn default() -> Self {
        Self { relative_floor: 1e-3 }
    }
}

/// Per-bin transmit coefficients `aᴴ((−d_t/d_r) ω̃_r(n_a)) x_i[l]` after
/// clamping, stored like [`AngularSpectrum`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinCoefficients {
    data: Cube,
    clamped: usize,
}

impl BinCoefficients {
    pub fn data(&self) -> &Cube {
        &self.data
    }

    /// Number of coefficients raised to the clamp floor.
    pub fn clamped(&self) -> usize {
        self.clamped
    }
}

/// Positive per-angular-bin scaling factors `α_{n_a}` (storage order).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFactors {
    alpha: Vec<f64>,
}

impl ScalingFactors {
    /// `α = 1` everywhere: plain coefficient division.
    pub fn unit(angle_bins: usize) -> Self {
        Self { alpha: vec![1.0; angle_bins] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }
}

/// Coefficient-free sequences `y_{i,l}(n_a)`, stored `[N_a, N_s, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedSpectrum {
    data: Cube,
}

impl DividedSpectrum {
    pub fn new(data: Cube) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &Cube {
        &self.data
    }

    pub fn bin_powers(&self) -> Vec<f64> {
        let n = self.data.shape()[0];
        (0..n).map(|k| self.data.slab(k).iter().map(|z| z.norm_sqr()).sum()).collect()
    }
}

/// Processed cube `Y(n_a, n_d, n_v)`, stored `[N_a, N_d, N_v]`.
///
/// Angular and Doppler storage follow FFT-natural order
/// ([`bins::centered`]); delay storage `k` holds `n_d = −k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarCube {
    data: Cube,
}

impl RadarCube {
    pub fn new(data: Cube) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &Cube {
        &self.data
    }

    pub fn into_cube(self) -> Cube {
        self.data
    }

    pub fn shape(&self) -> [usize; 3] {
        self.data.shape()
    }

    /// Signed bin of a storage index.
    pub fn bin_of(&self, [ka, kd, kv]: [usize; 3]) -> BinIndex {
        let [na, _, nv] = self.data.shape();
        BinIndex::new(bins::centered(ka, na), bins::delay(kd), bins::centered(kv, nv))
    }

    /// Storage index of a signed bin.
    pub fn index_of(&self, bin: BinIndex) -> Option<[usize; 3]> {
        let [na, nd, nv] = self.data.shape();
        Some([
            bins::centered_index(bin.angle, na)?,
            bins::delay_index(bin.delay, nd)?,
            bins::centered_index(bin.doppler, nv)?,
        ])
    }

    pub fn at(&self, bin: BinIndex) -> Option<Complex64> {
        self.index_of(bin).map(|idx| self.data[idx])
    }
}

fn check_dft(axis: &'static str, points: usize, required: usize) -> Result<()> {
    if points < required {
        return Err(Error::DftTooShort { axis, points, required });
    }
    Ok(())
}

/// `Y_{i,l}(n_a) = (1/N_r) Σ_m y(m,i,l) e^{−jm 2π n_a / N_a}`, zero-padded
/// to `N_a` points.
pub fn spatial_dft<E: FourierEngine>(engine: &E, cube: &EchoCube, angle_bins: usize) -> Result<AngularSpectrum> {
    let [num_rx, num_subcarriers, num_symbols] = cube.shape();
    check_dft("spatial", angle_bins, num_rx)?;
    let snapshots = num_subcarriers * num_symbols;
    let mut buf = vec![Complex64::new(0.0, 0.0); snapshots * angle_bins];
    for m in 0..num_rx {
        for (s, y) in cube.data().slab(m).iter().enumerate() {
            buf[s * angle_bins + m] = *y;
        }
    }
    engine.forward(&mut buf, angle_bins);
    let scale = 1.0 / num_rx as f64;
    let mut data = Cube::zeros([angle_bins, num_subcarriers, num_symbols]);
    for k in 0..angle_bins {
        for (s, out) in data.slab_mut(k).iter_mut().enumerate() {
            *out = buf[s * angle_bins + k] * scale;
        }
    }
    Ok(AngularSpectrum { data })
}

/// Transmit-side digital frequency `(−d_t/d_r) ω̃_r(n_a)` matched to angular
/// storage index `k`.
pub fn bin_tx_frequency(k: usize, cfg: &SystemConfig) -> f64 {
    let na = cfg.angle_bins;
    -(cfg.tx_spacing / cfg.rx_spacing) * bins::frequency(bins::centered(k, na), na)
}

/// Transmit coefficients for every angular bin, clamped per `clamp`.
pub fn bin_coefficients(tx: &TxSignal, cfg: &SystemConfig, clamp: ClampPolicy) -> Result<BinCoefficients> {
    tx.check_against(cfg)?;
    let na = cfg.angle_bins;
    let mut data = Cube::zeros([na, cfg.num_subcarriers, cfg.num_symbols]);
    let mut clamped = 0;
    for k in 0..na {
        let slab = data.slab_mut(k);
        slab.copy_from_slice(&tx_coefficients(bin_tx_frequency(k, cfg), tx));
        clamped += clamp.apply(slab);
    }
    Ok(BinCoefficients { data, clamped })
}

/// `α_{n_a} = sqrt(Σ|Y/c|² / Σ|Y|²)`; bins with no power get `α = 1`.
pub fn scaling_factors(spectrum: &AngularSpectrum, coefs: &BinCoefficients) -> Result<ScalingFactors> {
    if spectrum.data.shape() != coefs.data.shape() {
        return Err(Error::ShapeMismatch { expected: spectrum.data.shape(), found: coefs.data.shape() });
    }
    let alpha = (0..spectrum.angle_bins())
        .map(|k| {
            let (divided, original) = spectrum
                .data
                .slab(k)
                .iter()
                .zip(coefs.data.slab(k))
                .fold((0.0, 0.0), |(d, o), (y, c)| (d + (y / c).norm_sqr(), o + y.norm_sqr()));
            if original > 0.0 {
                (divided / original).sqrt()
            } else {
                1.0
            }
        })
        .collect();
    Ok(ScalingFactors { alpha })
}

/// `y_{i,l}(n_a) = Y_{i,l}(n_a) / (α_{n_a} c_{i,l}(n_a))`.
pub fn remove_coefficients(spectrum: &AngularSpectrum, coefs: &BinCoefficients, alpha: &ScalingFactors) -> Result<DividedSpectrum> {
    let shape = spectrum.data.shape();
    if coefs.data.shape() != shape {
        return Err(Error::ShapeMismatch { expected: shape, found: coefs.data.shape() });
    }
    if alpha.alpha.len() != shape[0] {
        return Err(Error::ShapeMismatch { expected: shape, found: [alpha.alpha.len(), shape[1], shape[2]] });
    }
    let mut data = Cube::zeros(shape);
    for k in 0..shape[0] {
        let a = alpha.alpha[k];
        for ((out, y), c) in data.slab_mut(k).iter_mut().zip(spectrum.data.slab(k)).zip(coefs.data.slab(k)) {
            *out = y / (c * a);
        }
    }
    Ok(DividedSpectrum { data })
}

/// Zero-padded, `1/(N_s L)`-normalised 2-D DFT of one `[N_s, L]` slab into
/// an `[N_d, N_v]` slab of the radar cube.
pub fn range_doppler_slab<E: FourierEngine>(
    engine: &E,
    input: &[Complex64],
    [num_subcarriers, num_symbols]: [usize; 2],
    [range_bins, doppler_bins]: [usize; 2],
    out: &mut [Complex64],
) {
    debug_assert_eq!(input.len(), num_subcarriers * num_symbols);
    debug_assert_eq!(out.len(), range_bins * doppler_bins);
    let mut rows = vec![Complex64::new(0.0, 0.0); num_subcarriers * doppler_bins];
    for i in 0..num_subcarriers {
        rows[i * doppler_bins..i * doppler_bins + num_symbols]
            .copy_from_slice(&input[i * num_symbols..(i + 1) * num_symbols]);
    }
    engine.forward(&mut rows, doppler_bins);
    let mut cols = vec![Complex64::new(0.0, 0.0); doppler_bins * range_bins];
    for i in 0..num_subcarriers {
        for v in 0..doppler_bins {
            cols[v * range_bins + i] = rows[i * doppler_bins + v];
        }
    }
    engine.forward(&mut cols, range_bins);
    let scale = 1.0 / (num_subcarriers * num_symbols) as f64;
    for kd in 0..range_bins {
        // n_d = −kd sits at FFT index (N_d − kd) mod N_d
        let f = (range_bins - kd) % range_bins;
        for v in 0..doppler_bins {
            out[kd * doppler_bins + v] = cols[v * range_bins + f] * scale;
        }
    }
}

/// `Y(n_a,n_d,n_v) = (1/N_s L) Σ_i Σ_l y_{i,l}(n_a) e^{−jl ω̃_v(n_v)} e^{−ji ω̃_d(n_d)}`.
pub fn range_doppler_dft<E: FourierEngine>(engine: &E, divided: &DividedSpectrum, range_bins: usize, doppler_bins: usize) -> Result<RadarCube> {
    let [na, num_subcarriers, num_symbols] = divided.data.shape();
    check_dft("delay", range_bins, num_subcarriers)?;
    check_dft("Doppler", doppler_bins, num_symbols)?;
    let mut data = Cube::zeros([na, range_bins, doppler_bins]);
    for k in 0..na {
        range_doppler_slab(
            engine,
            divided.data.slab(k),
            [num_subcarriers, num_symbols],
            [range_bins, doppler_bins],
            data.slab_mut(k),
        );
    }
    Ok(RadarCube { data })
}

/// Maps peak bins to `(θ, d, v)`:
/// `θ = asin(−n_a λ_c / (d_r N_a))`, `d = −c n_d / (2 N_d Δf)`,
/// `v = c n_v / (2 N_v T f_c)`.
pub fn recover_params(peaks: &PeakSet, cfg: &SystemConfig) -> Result<EstimateSet> {
    let estimates = peaks
        .peaks
        .iter()
        .map(|p| {
            let (theta, range, velocity) = bin_to_params(p.bin, cfg)?;
            Ok(Estimate { theta, range, velocity, peak_magnitude: p.magnitude, bin: p.bin })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimateSet { estimates, shortfall: peaks.shortfall })
}

/// Physical `(θ, d, v)` of a signed bin triple.
pub fn bin_to_params(bin: BinIndex, cfg: &SystemConfig) -> Result<(f64, f64, f64)> {
    let s = -(bin.angle as f64) * cfg.wavelength() / (cfg.rx_spacing * cfg.angle_bins as f64);
    if s.abs() > 1.0 {
        return Err(Error::AngleOutOfRange { bin: bin.angle });
    }
    let range = -SPEED_OF_LIGHT * bin.delay as f64 / (2.0 * cfg.range_bins as f64 * cfg.subcarrier_spacing);
    let velocity =
        SPEED_OF_LIGHT * bin.doppler as f64 / (2.0 * cfg.doppler_bins as f64 * cfg.total_symbol_duration() * cfg.carrier_freq);
    Ok((s.asin(), range, velocity))
}

/// How coefficient division is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scaling {
    /// Per-bin power-preserving `α`.
    #[default]
    PowerPreserving,
    /// `α = 1` (the "without scaling" variant).
    Unit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct JointOptions {
    pub scaling: Scaling,
    pub clamp: ClampPolicy,
}

/// Everything the joint estimator produced for one CPI.
#[derive(Debug, Clone)]
pub struct JointOutput {
    pub estimates: EstimateSet,
    pub cube: RadarCube,
    pub alpha: ScalingFactors,
    /// Coefficients raised to the clamp floor.
    pub clamped: usize,
}

fn check_inputs(cube: &EchoCube, tx: &TxSignal, cfg: &SystemConfig) -> Result<()> {
    cfg.validate()?;
    if cube.shape() != cfg.echo_shape() {
        return Err(Error::ShapeMismatch { expected: cfg.echo_shape(), found: cube.shape() });
    }
    tx.check_against(cfg)
}

/// Runs the full joint estimator and returns the `q` strongest targets.
pub fn estimate_joint<E: FourierEngine>(
    engine: &E,
    cube: &EchoCube,
    tx: &TxSignal,
    cfg: &SystemConfig,
    q: usize,
    opts: JointOptions,
) -> Result<JointOutput> {
    check_inputs(cube, tx, cfg)?;
    let spectrum = spatial_dft(engine, cube, cfg.angle_bins)?;
    let coefs = bin_coefficients(tx, cfg, opts.clamp)?;
    let alpha = match opts.scaling {
        Scaling::PowerPreserving => scaling_factors(&spectrum, &coefs)?,
        Scaling::Unit => ScalingFactors::unit(cfg.angle_bins),
    };
    let divided = remove_coefficients(&spectrum, &coefs, &alpha)?;
    drop(spectrum);
    let radar = range_doppler_dft(engine, &divided, cfg.range_bins, cfg.doppler_bins)?;
    drop(divided);
    let peaks = find_peaks(&radar, q, cfg);
    let estimates = recover_params(&peaks, cfg)?;
    Ok(JointOutput { estimates, cube: radar, alpha, clamped: coefs.clamped })
}

/// Processes `cube` with externally fixed coefficients and scaling factors.
///
/// The pipeline is linear once `α` is fixed, so feeding a noise-only cube
/// through the factors of a signal run yields the output noise `Z` of that
/// run.
pub fn process_with_factors<E: FourierEngine>(
    engine: &E,
    cube: &EchoCube,
    coefs: &BinCoefficients,
    alpha: &ScalingFactors,
    cfg: &SystemConfig,
) -> Result<RadarCube> {
    let spectrum = spatial_dft(engine, cube, cfg.angle_bins)?;
    let divided = remove_coefficients(&spectrum, coefs, alpha)?;
    range_doppler_dft(engine, &divided, cfg.range_bins, cfg.doppler_bins)
}

/// Direct evaluation of a single radar-cube cell with fixed coefficients
/// and scaling, in `O(N_r N_s L)`. Agrees with [`process_with_factors`].
pub fn evaluate_bin(cube: &EchoCube, coefs: &BinCoefficients, alpha: &ScalingFactors, cfg: &SystemConfig, bin: BinIndex) -> Result<Complex64> {
    let [num_rx, num_subcarriers, num_symbols] = cube.shape();
    let ka = bins::centered_index(bin.angle, cfg.angle_bins);
    let kd = bins::delay_index(bin.delay, cfg.range_bins);
    let kv = bins::centered_index(bin.doppler, cfg.doppler_bins);
    let (Some(ka), Some(_), Some(_)) = (ka, kd, kv) else {
        return Err(Error::BinOutOfRange(bin.angle, bin.delay, bin.doppler));
    };
    let spatial: Vec<Complex64> =
        (0..num_rx).map(|m| Complex64::from_polar(1.0, -(m as f64) * bins::frequency(bin.angle, cfg.angle_bins))).collect();
    let wd = bins::frequency(bin.delay, cfg.range_bins);
    let wv = bins::frequency(bin.doppler, cfg.doppler_bins);
    let coef = coefs.data.slab(ka);
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..num_subcarriers {
        for l in 0..num_symbols {
            let y: Complex64 = (0..num_rx).map(|m| cube.get(m, i, l) * spatial[m]).sum();
            let kernel = Complex64::from_polar(1.0, -(i as f64) * wd - l as f64 * wv);
            acc += y * kernel / coef[i * num_symbols + l];
        }
    }
    Ok(acc / (alpha.alpha[ka] * (num_rx * num_subcarriers * num_symbols) as f64))
}
