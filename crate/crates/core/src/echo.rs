//! Frequency-domain echo synthesis.
//!
//! The received cube is generated directly in the post-DFT domain:
//!
//! ```text
//! y(m,i,l) = Σ_q β_q √PL(2d_q) aᴴ(ω_t(θ_q)) x_i[l] e^{jmω_r(θ_q)} e^{jiω_d(d_q)} e^{jlω_v(v_q)} + z(m,i,l)
//! ```
//!
//! with `z ~ CN(0, σ_s²)` i.i.d. Time-domain CP handling is not simulated;
//! use [`crate::config::SceneCheck`] to confirm the scene is ISI-free.

use alloc::vec::Vec;
use num_complex::Complex64;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::config::SystemConfig;
use crate::freq::{omega_d, omega_r, omega_t, omega_v, path_loss};
use crate::rng::{complex_gaussian, stream};
use crate::scene::Target;
use crate::tensor::Cube;
use crate::txgen::TxSignal;
use crate::{Error, Result};

/// Received echoes `y(m, i, l)`, shape `[N_r, N_s, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoCube {
    data: Cube,
}

impl EchoCube {
    pub fn new(cfg: &SystemConfig, data: Cube) -> Result<Self> {
        if data.shape() != cfg.echo_shape() {
            return Err(Error::ShapeMismatch { expected: cfg.echo_shape(), found: data.shape() });
        }
        Ok(Self { data })
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

    #[inline]
    pub fn get(&self, antenna: usize, subcarrier: usize, symbol: usize) -> Complex64 {
        self.data[[antenna, subcarrier, symbol]]
    }
}

/// Signal-dependent coefficients `aᴴ(ω) x_i[l]` over all `(i, l)`,
/// row-major `[N_s, L]`.
pub fn tx_coefficients(omega: f64, tx: &TxSignal) -> Vec<Complex64> {
    let x = tx.samples();
    let [num_tx, num_subcarriers, num_symbols] = x.shape();
    let mut coef = alloc::vec![Complex64::new(0.0, 0.0); num_subcarriers * num_symbols];
    for n in 0..num_tx {
        let phase = Complex64::from_polar(1.0, -(n as f64) * omega);
        for (acc, xn) in coef.iter_mut().zip(x.slab(n)) {
            *acc += phase * xn;
        }
    }
    coef
}

/// Noise-free echo of a single target.
fn add_target(cube: &mut Cube, cfg: &SystemConfig, target: &Target, tx: &TxSignal) -> Result<()> {
    let amplitude = target.beta * path_loss(2.0 * target.range, cfg)?.sqrt();
    let coef = tx_coefficients(omega_t(target.theta, cfg), tx);
    let ramp = |omega: f64, len: usize| -> Vec<Complex64> {
        (0..len).map(|k| Complex64::from_polar(1.0, k as f64 * omega)).collect()
    };
    let [num_rx, num_subcarriers, num_symbols] = cube.shape();
    let spatial = ramp(omega_r(target.theta, cfg), num_rx);
    let delay = ramp(omega_d(target.range, cfg)?, num_subcarriers);
    let doppler = ramp(omega_v(target.velocity, cfg), num_symbols);
    for (m, pm) in spatial.iter().enumerate() {
        let slab = cube.slab_mut(m);
        for (i, pi) in delay.iter().enumerate() {
            let head = amplitude * pm * pi;
            let row = &mut slab[i * num_symbols..(i + 1) * num_symbols];
            let coef_row = &coef[i * num_symbols..(i + 1) * num_symbols];
            for ((y, c), pl) in row.iter_mut().zip(coef_row).zip(&doppler) {
                *y += head * c * pl;
            }
        }
    }
    Ok(())
}

/// Synthesises the echo cube of `targets` illuminated by `tx`. Noise is
/// drawn row-major over `(m, i, l)` from the stream seeded by `seed`.
pub fn simulate_echo_cube(cfg: &SystemConfig, targets: &[Target], tx: &TxSignal, noise_on: bool, seed: u64) -> Result<EchoCube> {
    tx.check_against(cfg)?;
    let mut data = Cube::zeros(cfg.echo_shape());
    for target in targets {
        add_target(&mut data, cfg, target, tx)?;
    }
    if noise_on {
        let mut rng = stream(seed);
        for y in data.as_mut_slice() {
            *y += complex_gaussian(&mut rng, cfg.sensing_noise_power);
        }
    }
    Ok(EchoCube { data })
}

/// A noise-only cube `z(m, i, l) ~ CN(0, σ_s²)`.
pub fn noise_cube(cfg: &SystemConfig, seed: u64) -> EchoCube {
    let mut rng = stream(seed);
    let data = Cube::from_fn(cfg.echo_shape(), |_, _, _| complex_gaussian(&mut rng, cfg.sensing_noise_power));
    EchoCube { data }
}

/// `Q` i.i.d. `CN(0, σ_β²)` reflection coefficients, held for one CPI.
pub fn reflection_coefficients(count: usize, power: f64, seed: u64) -> Vec<Complex64> {
    let mut rng = stream(seed);
    (0..count).map(|_| complex_gaussian(&mut rng, power)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::txgen::{assemble_tx, gen_qam_symbols, zf_precoder, CommChannel, PowerSplit};
    use core::f64::consts::PI;

    fn unit_tx(cfg: &SystemConfig) -> TxSignal {
        TxSignal::from_samples(Cube::from_fn([cfg.num_tx, cfg.num_subcarriers, cfg.num_symbols], |_, _, _| {
            Complex64::new(1.0, 0.0)
        }))
    }

    #[test]
    fn empty_scene_is_silent() {
        let cfg = SystemConfig::desk().with_dims(1, 4, 8, 4);
        let y = simulate_echo_cube(&cfg, &[], &unit_tx(&cfg), false, 0).unwrap();
        assert!(y.data().as_slice().iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert!(reflection_coefficients(0, 1.0, 1).is_empty());
    }

    #[test]
    fn single_target_constant_modulus() {
        let cfg = SystemConfig::desk().with_dims(1, 4, 8, 4);
        let beta = Complex64::new(0.3, -0.2);
        let t = Target::new(0.2, 55.0, 12.0).with_beta(beta);
        let y = simulate_echo_cube(&cfg, &[t], &unit_tx(&cfg), false, 0).unwrap();
        let expect = beta.norm() * path_loss(110.0, &cfg).unwrap().sqrt();
        for z in y.data().as_slice() {
            assert!((z.norm() - expect).abs() < 1e-12 * expect);
        }
        // dividing by the origin leaves the bare phase ramp
        let origin = y.get(0, 0, 0);
        let (wr, wd, wv) = (omega_r(0.2, &cfg), omega_d(55.0, &cfg).unwrap(), omega_v(12.0, &cfg));
        for m in 0..4 {
            for i in 0..8 {
                for l in 0..4 {
                    let ramp = Complex64::from_polar(1.0, m as f64 * wr + i as f64 * wd + l as f64 * wv);
                    assert!((y.get(m, i, l) / origin - ramp).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn superposition() {
        let cfg = SystemConfig::desk().with_dims(4, 4, 8, 4);
        let channel = CommChannel::rayleigh(1, 8, 4, false, 3);
        let w = zf_precoder(&channel, &[0.1], &cfg, PowerSplit::default()).unwrap();
        let tx = assemble_tx(&w, &gen_qam_symbols(2, 8, 4, 16, 4).unwrap()).unwrap();
        let a = Target::new(0.1, 50.0, 5.0).with_beta(Complex64::new(0.2, 0.1));
        let b = Target::new(-0.3, 70.0, -20.0).with_beta(Complex64::new(-0.1, 0.3));
        let both = simulate_echo_cube(&cfg, &[a, b], &tx, false, 0).unwrap();
        let mut sum = simulate_echo_cube(&cfg, &[a], &tx, false, 0).unwrap().into_cube();
        sum.add_assign(simulate_echo_cube(&cfg, &[b], &tx, false, 0).unwrap().data()).unwrap();
        assert!(both.data().max_abs_diff(&sum) < 1e-20);
    }

    #[test]
    fn rejects_mismatched_tx() {
        let cfg = SystemConfig::desk().with_dims(2, 4, 8, 4);
        let tx = TxSignal::from_samples(Cube::zeros([3, 8, 4]));
        assert!(matches!(simulate_echo_cube(&cfg, &[], &tx, false, 0), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn noise_statistics_and_seeding() {
        let cfg = SystemConfig::desk().with_dims(1, 8, 128, 100);
        let tx = unit_tx(&cfg);
        let y = simulate_echo_cube(&cfg, &[], &tx, true, 77).unwrap();
        assert!(y.data().len() >= 100_000);
        let var = y.data().as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>() / y.data().len() as f64;
        assert!((var / cfg.sensing_noise_power - 1.0).abs() < 0.03);
        assert_eq!(y, simulate_echo_cube(&cfg, &[], &tx, true, 77).unwrap());
        assert_eq!(y, noise_cube(&cfg, 77));

        // adding a target leaves the noise realisation untouched
        let t = Target::new(0.0, 60.0, 0.0).with_beta(Complex64::new(1e-2, 0.0));
        let with_target = simulate_echo_cube(&cfg, &[t], &tx, true, 77).unwrap();
        let clean = simulate_echo_cube(&cfg, &[t], &tx, false, 0).unwrap();
        let mut recombined = clean.into_cube();
        recombined.add_assign(y.data()).unwrap();
        assert!(with_target.data().max_abs_diff(&recombined) < 1e-15);
    }

    #[test]
    fn reflection_power() {
        let betas = reflection_coefficients(100_000, 0.1, 5);
        let p = betas.iter().map(|b| b.norm_sqr()).sum::<f64>() / betas.len() as f64;
        assert!((p / 0.1 - 1.0).abs() < 0.02);
        assert_eq!(betas[..10], reflection_coefficients(10, 0.1, 5)[..]);
    }

    /// Straight-line re-evaluation of the echo model, term by term.
    fn oracle(cfg: &SystemConfig, targets: &[Target], tx: &TxSignal) -> Cube {
        let lambda = cfg.wavelength();
        Cube::from_fn(cfg.echo_shape(), |m, i, l| {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in targets {
                let pl = cfg.ref_path_loss * (2.0 * t.range / cfg.ref_distance).powf(-cfg.path_loss_exponent);
                let mut ax = Complex64::new(0.0, 0.0);
                for n in 0..cfg.num_tx {
                    let w_t = 2.0 * PI * cfg.tx_spacing * t.theta.sin() / lambda;
                    ax += Complex64::from_polar(1.0, n as f64 * w_t).conj() * tx.samples()[[n, i, l]];
                }
                let w_r = -2.0 * PI * cfg.rx_spacing * t.theta.sin() / lambda;
                let w_d = -4.0 * PI * cfg.subcarrier_spacing * t.range / 3e8;
                let w_v = 4.0 * PI * cfg.total_symbol_duration() * t.velocity * cfg.carrier_freq / 3e8;
                acc += t.beta
                    * pl.sqrt()
                    * ax
                    * Complex64::from_polar(1.0, m as f64 * w_r)
                    * Complex64::from_polar(1.0, i as f64 * w_d)
                    * Complex64::from_polar(1.0, l as f64 * w_v);
            }
            acc
        })
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]
            #[test]
            fn matches_term_by_term_oracle(
                nr in 1usize..=4, ns in 1usize..=8, l in 1usize..=4, nt in 1usize..=4,
                seed in 0u64..1000,
                raw in proptest::collection::vec((-1.4f64..1.4, 1.0f64..1200.0, -290.0f64..290.0, -1.0f64..1.0, -1.0f64..1.0), 0..=3),
            ) {
                let cfg = SystemConfig::desk().with_dims(nt, nr, ns, l);
                let x = Cube::from_fn([nt, ns, l], |n, i, k| {
                    let s = (seed as f64 + 1.3 * n as f64 + 0.7 * i as f64 + 0.11 * k as f64).sin();
                    Complex64::new(s, (2.0 * s).cos())
                });
                let tx = TxSignal::from_samples(x);
                let targets: alloc::vec::Vec<Target> = raw.iter()
                    .map(|&(th, d, v, br, bi)| Target::new(th, d, v).with_beta(Complex64::new(br, bi)))
                    .collect();
                let got = simulate_echo_cube(&cfg, &targets, &tx, false, 0).unwrap();
                let want = oracle(&cfg, &targets, &tx);
                let scale = want.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
                prop_assert!(got.data().max_abs_diff(&want) <= 1e-10 * scale);
            }
        }
    }
}
