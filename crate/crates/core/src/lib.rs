//! Simulation and estimation core for mono-static MIMO-OFDM integrated
//! sensing and communication.
//!
//! The crate is `no_std` (with `alloc`). Transforms go through the
//! [`FourierEngine`] trait; [`DirectDft`] is a slow reference engine and the
//! `isac` crate provides an FFT-backed one.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod config;
pub mod dft;
pub mod echo;
pub mod error;
pub mod freq;
pub mod joint;
pub mod metrics;
pub mod peaks;
pub mod rng;
pub mod scene;
pub mod separate;
pub mod tensor;
pub mod txgen;

pub use config::{SystemConfig, SPEED_OF_LIGHT};
pub use dft::{DirectDft, FourierEngine};
pub use echo::{simulate_echo_cube, EchoCube};
pub use error::{Error, Result};
pub use joint::{estimate_joint, JointOptions, JointOutput, RadarCube, Scaling};
pub use scene::{BinIndex, Estimate, EstimateSet, Target};
pub use separate::{estimate_separate, SeparateOptions};
pub use tensor::Cube;
pub use txgen::TxSignal;
