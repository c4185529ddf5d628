//! Std companion to `isac-core`: an FFT engine, tensor files, experiment
//! configs, Monte-Carlo sweeps, radar images and the `isac` command line.

pub mod error;
pub mod experiment;
pub mod fft;
pub mod harness;
pub mod image;
pub mod report;
pub mod tensor_file;

pub use error::{HarnessError, Result};
pub use experiment::{BetaModel, EstimatorKind, ExperimentConfig, SweepPoint, SweepVariable, TargetSpec};
pub use fft::RustFftEngine;
pub use harness::{build_trial, run_sweep, SummaryRow, SweepResults, TrialInputs, TrialResult};
pub use image::{export_radar_image, Axis, AxisPair, RadarImage};
pub use report::{analyze, AnalysisReport};
