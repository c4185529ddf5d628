//! Transmit side: QAM symbols, zero-forcing precoders toward users and
//! sensing directions, and the precoded frequency-domain transmit tensor.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::config::SystemConfig;
use crate::freq::{omega_t, steering_vector};
use crate::rng::{complex_gaussian, stream};
use crate::tensor::Cube;
use crate::{Error, Result};

const RANK_TOL: f64 = 1e-10;

/// Unit-average-power square QAM alphabet, row-major over (I, Q) levels.
pub fn qam_constellation(order: usize) -> Result<Vec<Complex64>> {
    let side = match order {
        4 => 2,
        16 => 4,
        64 => 8,
        256 => 16,
        _ => return Err(Error::UnsupportedQamOrder(order)),
    };
    let norm = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
    let level = |k: usize| (2.0 * k as f64 - (side as f64 - 1.0)) / norm;
    Ok((0..order).map(|idx| Complex64::new(level(idx % side), level(idx / side))).collect())
}

/// Draws a `[streams, N_s, L]` tensor of i.i.d. uniform QAM symbols.
pub fn gen_qam_symbols(streams: usize, num_subcarriers: usize, num_symbols: usize, order: usize, seed: u64) -> Result<Cube> {
    let alphabet = qam_constellation(order)?;
    let mut rng = stream(seed);
    Ok(Cube::from_fn([streams, num_subcarriers, num_symbols], |_, _, _| {
        alphabet[rng.random_range(0..alphabet.len())]
    }))
}

/// Per-user, per-subcarrier downlink channels `h_{i,k}`, stored `[K, N_s, N_t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommChannel {
    h: Cube,
}

impl CommChannel {
    pub fn new(h: Cube) -> Self {
        Self { h }
    }

    /// I.i.d. `CN(0, 1)` entries. With `flat`, one draw per user is reused on
    /// every subcarrier.
    pub fn rayleigh(users: usize, num_subcarriers: usize, num_tx: usize, flat: bool, seed: u64) -> Self {
        let mut rng = stream(seed);
        let h = if flat {
            let per_user: Vec<Complex64> = (0..users * num_tx).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
            Cube::from_fn([users, num_subcarriers, num_tx], |k, _, n| per_user[k * num_tx + n])
        } else {
            Cube::from_fn([users, num_subcarriers, num_tx], |_, _, _| complex_gaussian(&mut rng, 1.0))
        };
        Self { h }
    }

    pub fn users(&self) -> usize {
        self.h.shape()[0]
    }

    pub fn num_subcarriers(&self) -> usize {
        self.h.shape()[1]
    }

    pub fn num_tx(&self) -> usize {
        self.h.shape()[2]
    }

    /// `h_{i,k}` as a length-`N_t` slice.
    pub fn vector(&self, user: usize, subcarrier: usize) -> &[Complex64] {
        self.h.lane(user, subcarrier)
    }
}

/// Power split between user and sensing streams.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PowerSplit {
    /// Fraction of `P_tx` given to the sensing streams. `None` shares the
    /// budget equally across all streams.
    pub sensing_fraction: Option<f64>,
}

/// Per-subcarrier precoders `W_i`, stored `[N_s, N_t, streams]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoders {
    w: Cube,
}

impl Precoders {
    pub fn new(w: Cube) -> Self {
        Self { w }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.w.shape()[0]
    }

    pub fn num_tx(&self) -> usize {
        self.w.shape()[1]
    }

    pub fn streams(&self) -> usize {
        self.w.shape()[2]
    }

    pub fn entry(&self, subcarrier: usize, antenna: usize, stream: usize) -> Complex64 {
        self.w[[subcarrier, antenna, stream]]
    }

    /// `Σ_k ‖w_{i,k}‖²` on subcarrier `i`.
    pub fn power(&self, subcarrier: usize) -> f64 {
        self.w.slab(subcarrier).iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn as_cube(&self) -> &Cube {
        &self.w
    }
}

/// Zero-forcing precoders toward the users of `channel` plus one virtual
/// user per sensing direction (radians).
///
/// On every subcarrier the stacked rows `h_{i,k}ᴴ` and `aᴴ(ω_t(φ))` are
/// pseudo-inverted; each column is normalised and given its share of
/// `P_tx`, so `Σ_k ‖w_{i,k}‖² = P_tx`.
pub fn zf_precoder(channel: &CommChannel, sense_dirs: &[f64], cfg: &SystemConfig, split: PowerSplit) -> Result<Precoders> {
    let users = channel.users();
    let num_tx = cfg.num_tx;
    let streams = users + sense_dirs.len();
    if channel.num_tx() != num_tx || channel.num_subcarriers() != cfg.num_subcarriers {
        return Err(Error::ShapeMismatch {
            expected: [users, cfg.num_subcarriers, num_tx],
            found: [users, channel.num_subcarriers(), channel.num_tx()],
        });
    }
    if streams == 0 {
        return Err(Error::InvalidConfig("zero-forcing needs at least one user or sensing direction".into()));
    }
    if streams > num_tx {
        return Err(Error::TooManyStreams { streams, antennas: num_tx });
    }
    let powers = stream_powers(users, sense_dirs.len(), cfg.tx_power, split)?;

    let sensing_rows: Vec<Vec<Complex64>> = sense_dirs
        .iter()
        .map(|&phi| steering_vector(omega_t(phi, cfg), num_tx))
        .collect::<Result<_>>()?;

    let mut w = Cube::zeros([cfg.num_subcarriers, num_tx, streams]);
    for i in 0..cfg.num_subcarriers {
        let stacked = DMatrix::<Complex64>::from_fn(streams, num_tx, |r, n| {
            if r < users {
                channel.vector(r, i)[n].conj()
            } else {
                sensing_rows[r - users][n].conj()
            }
        });
        let svd = stacked.svd(true, true);
        let s_max = svd.singular_values.max();
        let s_min = svd.singular_values.min();
        if !(s_max > 0.0) || s_min <= RANK_TOL * s_max {
            return Err(Error::SingularChannel { subcarrier: i });
        }
        let pinv = svd.pseudo_inverse(0.0).map_err(|_| Error::SingularChannel { subcarrier: i })?;
        for k in 0..streams {
            let col = pinv.column(k);
            let norm = col.norm();
            let gain = powers[k].sqrt() / norm;
            for n in 0..num_tx {
                w[[i, n, k]] = col[n] * gain;
            }
        }
    }
    Ok(Precoders { w })
}

fn stream_powers(users: usize, sensing: usize, total: f64, split: PowerSplit) -> Result<Vec<f64>> {
    let streams = users + sensing;
    let mut powers = Vec::with_capacity(streams);
    match split.sensing_fraction {
        Some(f) if users > 0 && sensing > 0 => {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidConfig(alloc::format!("sensing power fraction {f} outside [0, 1]")));
            }
            powers.extend(core::iter::repeat_n((1.0 - f) * total / users as f64, users));
            powers.extend(core::iter::repeat_n(f * total / sensing as f64, sensing));
        }
        _ => powers.extend(core::iter::repeat_n(total / streams as f64, streams)),
    }
    Ok(powers)
}

/// The precoded transmit tensor `x(n, i, l)` with the precoders and symbols
/// that produced it (absent when only the samples were loaded).
#[derive(Debug, Clone, PartialEq)]
pub struct TxSignal {
    x: Cube,
    precoders: Option<Precoders>,
    symbols: Option<Cube>,
}

impl TxSignal {
    /// Wraps raw `[N_t, N_s, L]` samples.
    pub fn from_samples(x: Cube) -> Self {
        Self { x, precoders: None, symbols: None }
    }

    pub fn samples(&self) -> &Cube {
        &self.x
    }

    pub fn precoders(&self) -> Option<&Precoders> {
        self.precoders.as_ref()
    }

    pub fn symbols(&self) -> Option<&Cube> {
        self.symbols.as_ref()
    }

    pub fn num_tx(&self) -> usize {
        self.x.shape()[0]
    }

    pub fn num_subcarriers(&self) -> usize {
        self.x.shape()[1]
    }

    pub fn num_symbols(&self) -> usize {
        self.x.shape()[2]
    }

    /// Copies `x_i[l]` into `out` (length `N_t`).
    pub fn antenna_vector(&self, subcarrier: usize, symbol: usize, out: &mut [Complex64]) {
        for (n, slot) in out.iter_mut().enumerate() {
            *slot = self.x[[n, subcarrier, symbol]];
        }
    }

    /// `(1 / N_s L) Σ_{i,l} ‖x_i[l]‖²`.
    pub fn mean_power(&self) -> f64 {
        self.x.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / (self.num_subcarriers() * self.num_symbols()) as f64
    }

    pub(crate) fn check_against(&self, cfg: &SystemConfig) -> Result<()> {
        let expected = [cfg.num_tx, cfg.num_subcarriers, cfg.num_symbols];
        if self.x.shape() != expected {
            return Err(Error::ShapeMismatch { expected, found: self.x.shape() });
        }
        Ok(())
    }
}

/// `x_i[l] = W_i s_i[l]` for every subcarrier and symbol.
pub fn assemble_tx(precoders: &Precoders, symbols: &Cube) -> Result<TxSignal> {
    let [streams, num_subcarriers, num_symbols] = symbols.shape();
    if streams != precoders.streams() || num_subcarriers != precoders.num_subcarriers() {
        return Err(Error::ShapeMismatch {
            expected: [precoders.streams(), precoders.num_subcarriers(), num_symbols],
            found: symbols.shape(),
        });
    }
    let num_tx = precoders.num_tx();
    let mut x = Cube::zeros([num_tx, num_subcarriers, num_symbols]);
    for i in 0..num_subcarriers {
        let w_i = precoders.w.slab(i);
        for l in 0..num_symbols {
            for n in 0..num_tx {
                let row = &w_i[n * streams..(n + 1) * streams];
                x[[n, i, l]] = row.iter().enumerate().map(|(k, w)| w * symbols[[k, i, l]]).sum();
            }
        }
    }
    Ok(TxSignal { x, precoders: Some(precoders.clone()), symbols: Some(symbols.clone()) })
}

/// Per-user received symbols `y_{i,k}[l] = h_{i,k}ᴴ x_i[l] + z`, shape
/// `[K, N_s, L]`. A zero noise power disables the noise draw.
pub fn comm_rx(channel: &CommChannel, tx: &TxSignal, noise_power: f64, seed: u64) -> Result<Cube> {
    let [num_tx, num_subcarriers, num_symbols] = tx.samples().shape();
    if channel.num_tx() != num_tx || channel.num_subcarriers() != num_subcarriers {
        return Err(Error::ShapeMismatch {
            expected: [channel.users(), num_subcarriers, num_tx],
            found: [channel.users(), channel.num_subcarriers(), channel.num_tx()],
        });
    }
    let mut rng = stream(seed);
    let x = tx.samples();
    Ok(Cube::from_fn([channel.users(), num_subcarriers, num_symbols], |k, i, l| {
        let h = channel.vector(k, i);
        let signal: Complex64 = (0..num_tx).map(|n| h[n].conj() * x[[n, i, l]]).sum();
        if noise_power > 0.0 {
            signal + complex_gaussian(&mut rng, noise_power)
        } else {
            signal
        }
    }))
}
