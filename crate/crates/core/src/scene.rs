//! Ground-truth targets and estimator output.

use alloc::vec::Vec;
use num_complex::Complex64;

/// One point target. Angles are radians, ranges metres, velocities m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub theta: f64,
    pub range: f64,
    pub velocity: f64,
    /// Complex reflection coefficient `β`.
    pub beta: Complex64,
}

impl Target {
    /// A target with unit reflection coefficient.
    pub fn new(theta: f64, range: f64, velocity: f64) -> Self {
        Self { theta, range, velocity, beta: Complex64::new(1.0, 0.0) }
    }

    pub fn with_beta(mut self, beta: Complex64) -> Self {
        self.beta = beta;
        self
    }
}

/// Signed angular/delay/Doppler bin triple `(n_a, n_d, n_v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinIndex {
    pub angle: i64,
    pub delay: i64,
    pub doppler: i64,
}

impl BinIndex {
    pub const fn new(angle: i64, delay: i64, doppler: i64) -> Self {
        Self { angle, delay, doppler }
    }
}

/// One recovered target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub theta: f64,
    pub range: f64,
    pub velocity: f64,
    /// `|Y|` at the peak.
    pub peak_magnitude: f64,
    /// Bin the estimate came from.
    pub bin: BinIndex,
}

/// Estimates of one CPI, strongest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateSet {
    pub estimates: Vec<Estimate>,
    /// Set when the estimator found fewer peaks than requested.
    pub shortfall: bool,
}

impl EstimateSet {
    pub fn len(&self) -> usize {
        self.estimates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.estimates.is_empty()
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Estimate> {
        self.estimates.iter()
    }
}
