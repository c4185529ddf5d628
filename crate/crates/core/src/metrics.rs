//! RMSE of estimates against ground truth.
//!
//! Estimates are paired with truths by the assignment that minimises the
//! total resolution-normalised squared error. A truth left without an
//! estimate is charged the largest in-scope error on every axis.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::analysis::{max_unambiguous, resolutions};
use crate::config::SystemConfig;
use crate::scene::{Estimate, EstimateSet, Target};
use crate::{Error, Result};

const EXHAUSTIVE_MAX: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    /// Degrees.
    Angle,
    /// Metres.
    Range,
    /// Metres per second.
    Velocity,
}

/// Mean squared error over the targets of one trial.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SquaredErrors {
    pub angle_deg2: f64,
    pub range_m2: f64,
    pub velocity_m2s2: f64,
    /// Truths without a matching estimate.
    pub missed: usize,
}

impl SquaredErrors {
    pub fn get(&self, dim: Dimension) -> f64 {
        match dim {
            Dimension::Angle => self.angle_deg2,
            Dimension::Range => self.range_m2,
            Dimension::Velocity => self.velocity_m2s2,
        }
    }
}

/// Minimum-cost assignment of rows to columns on a square cost matrix
/// (row-major, `n × n`). Returns the column of each row.
pub fn assign(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    if n <= EXHAUSTIVE_MAX {
        exhaustive(cost, n)
    } else {
        hungarian(cost, n)
    }
}

fn total(cost: &[f64], n: usize, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(r, &c)| cost[r * n + c]).sum()
}

/// Tries every permutation (Heap's algorithm); the first strict minimum wins.
pub fn exhaustive(cost: &[f64], n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = total(cost, n, &perm);
    let mut stack = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if stack[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(stack[i], i);
            }
            let c = total(cost, n, &perm);
            if c < best_cost {
                best_cost = c;
                best.copy_from_slice(&perm);
            }
            stack[i] += 1;
            i = 1;
        } else {
            stack[i] = 0;
            i += 1;
        }
    }
    best
}

/// `O(n³)` Hungarian method with potentials.
pub fn hungarian(cost: &[f64], n: usize) -> Vec<usize> {
    // 1-based rows/cols; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for r in 1..=n {
        row_of[0] = r;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Raw `(angle °, range m, velocity m/s)` errors of a single pairing.
fn errors(t: &Target, e: &Estimate) -> [f64; 3] {
    [(t.theta - e.theta).to_degrees(), t.range - e.range, t.velocity - e.velocity]
}

/// Per-trial squared errors after optimal pairing.
pub fn trial_errors(truth: &[Target], est: &EstimateSet, cfg: &SystemConfig) -> Result<SquaredErrors> {
    if truth.is_empty() {
        return Err(Error::EmptyTruth);
    }
    let res = resolutions(cfg);
    let lim = max_unambiguous(cfg);
    let penalty = [(2.0 * lim.theta_max).to_degrees(), lim.range_max, 2.0 * lim.velocity_max];
    let penalty_cost = {
        let sin_span = 2.0 * lim.theta_max.sin();
        (sin_span / res.angle_sin).powi(2)
            + (lim.range_max / res.range).powi(2)
            + (2.0 * lim.velocity_max / res.velocity).powi(2)
    };
    let estimates = &est.estimates;
    let n = truth.len().max(estimates.len());
    let mut cost = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            cost[r * n + c] = match (truth.get(r), estimates.get(c)) {
                (Some(t), Some(e)) => {
                    ((t.theta.sin() - e.theta.sin()) / res.angle_sin).powi(2)
                        + ((t.range - e.range) / res.range).powi(2)
                        + ((t.velocity - e.velocity) / res.velocity).powi(2)
                }
                (Some(_), None) => penalty_cost,
                _ => 0.0,
            };
        }
    }
    let pairing = assign(&cost, n);
    let mut sums = [0.0; 3];
    let mut missed = 0;
    for (r, t) in truth.iter().enumerate() {
        let err = match estimates.get(pairing[r]) {
            Some(e) => errors(t, e),
            None => {
                missed += 1;
                penalty
            }
        };
        for (s, e) in sums.iter_mut().zip(err) {
            *s += e * e;
        }
    }
    let q = truth.len() as f64;
    Ok(SquaredErrors { angle_deg2: sums[0] / q, range_m2: sums[1] / q, velocity_m2s2: sums[2] / q, missed })
}

/// Single-trial RMSE along `dim`.
pub fn rmse(truth: &[Target], est: &EstimateSet, dim: Dimension, cfg: &SystemConfig) -> Result<f64> {
    Ok(trial_errors(truth, est, cfg)?.get(dim).sqrt())
}

/// Running average of per-trial squared errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RmseAccumulator {
    sums: [f64; 3],
    trials: usize,
}

impl RmseAccumulator {
    pub fn push(&mut self, e: &SquaredErrors) {
        self.sums[0] += e.angle_deg2;
        self.sums[1] += e.range_m2;
        self.sums[2] += e.velocity_m2s2;
        self.trials += 1;
    }

    pub fn trials(&self) -> usize {
        self.trials
    }

    /// `sqrt(mean over trials)`; `NaN` before the first trial.
    pub fn rmse(&self, dim: Dimension) -> f64 {
        let k = match dim {
            Dimension::Angle => 0,
            Dimension::Range => 1,
            Dimension::Velocity => 2,
        };
        (self.sums[k] / self.trials as f64).sqrt()
    }
}
