//! Seeded random streams.
//!
//! Every random quantity of a Monte-Carlo trial comes from its own ChaCha12
//! stream whose seed is derived from `(master, sweep point, trial, purpose)`:
//!
//! ```text
//! s0 = mix(master)
//! s1 = mix(s0 ^ sweep)
//! s2 = mix(s1 ^ trial)
//! seed = mix(s2 ^ purpose_tag)
//! ```
//!
//! where `mix` is the SplitMix64 finaliser. Streams for different purposes
//! never share state, so e.g. adding a target does not shift the noise draw.

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SimRng = ChaCha12Rng;

/// What a derived stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Scene = 0x5343_454e,
    Symbols = 0x5359_4d42,
    Channel = 0x4348_414e,
    Reflection = 0x5245_464c,
    SensingNoise = 0x534e_4f49,
    CommNoise = 0x434e_4f49,
}

/// SplitMix64 finaliser.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, sweep: u64, trial: u64, purpose: Purpose) -> u64 {
    mix(mix(mix(mix(master) ^ sweep) ^ trial) ^ purpose as u64)
}

pub fn stream(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// One draw of `CN(0, variance)`.
pub fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}
