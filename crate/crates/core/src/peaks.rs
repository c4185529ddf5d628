//! Peak picking on radar cubes and 1-D spectra.
//!
//! A cell is a local maximum when it beats every neighbour in its
//! 26-neighbourhood (spatial and Doppler axes wrap, the delay axis does
//! not). "Beats" is a total order: larger magnitude, then the
//! lexicographically smaller signed bin triple. Maxima are accepted greedily
//! from the strongest down, skipping any that fall inside one resolution
//! cell of an already accepted peak.

use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // unused when std is linked and f64 has inherent math
use num_traits::Float;
use crate::config::SystemConfig;
use crate::joint::RadarCube;
use crate::scene::BinIndex;

/// Peaks found in a radar cube, strongest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PeakSet {
    pub peaks: Vec<Peak>,
    /// Fewer local maxima than requested were available.
    pub shortfall: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub bin: BinIndex,
    pub magnitude: f64,
}

/// Resolution-cell size in bins along each axis: `N_a/N_r`, `N_d/N_s`, `N_v/L`.
pub fn resolution_cell(cfg: &SystemConfig) -> [f64; 3] {
    [
        cfg.angle_bins as f64 / cfg.num_rx as f64,
        cfg.range_bins as f64 / cfg.num_subcarriers as f64,
        cfg.doppler_bins as f64 / cfg.num_symbols as f64,
    ]
}

fn circular_distance(a: usize, b: usize, n: usize) -> usize {
    let d = a.abs_diff(b);
    d.min(n - d)
}

/// Returns up to `count` peaks of `|Y|`.
pub fn find_peaks(cube: &RadarCube, count: usize, cfg: &SystemConfig) -> PeakSet {
    if count == 0 {
        return PeakSet::default();
    }
    let data = cube.data();
    let [na, nd, nv] = data.shape();
    let values = data.as_slice();
    let power = |k: usize| values[k].norm_sqr();
    let bin = |ka: usize, kd: usize, kv: usize| cube.bin_of([ka, kd, kv]);

    let wrap = |k: usize, step: isize, n: usize| ((k as isize + step).rem_euclid(n as isize)) as usize;
    let mut candidates: Vec<(usize, f64, BinIndex)> = Vec::new();
    for ka in 0..na {
        for kd in 0..nd {
            'cell: for kv in 0..nv {
                let here = (ka * nd + kd) * nv + kv;
                let p = power(here);
                let b = bin(ka, kd, kv);
                for sa in -1isize..=1 {
                    let ja = wrap(ka, sa, na);
                    for sd in -1isize..=1 {
                        let jd = kd as isize + sd;
                        if jd < 0 || jd >= nd as isize {
                            continue;
                        }
                        let jd = jd as usize;
                        for sv in -1isize..=1 {
                            let jv = wrap(kv, sv, nv);
                            let there = (ja * nd + jd) * nv + jv;
                            if there == here {
                                continue;
                            }
                            // the neighbour's bin only matters on a tie
                            let q = power(there);
                            if !(p > q || (p == q && b < bin(ja, jd, jv))) {
                                continue 'cell;
                            }
                        }
                    }
                }
                candidates.push((here, p, b));
            }
        }
    }
    candidates.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(Ordering::Equal).then(x.2.cmp(&y.2)));

    let cell = resolution_cell(cfg);
    let mut accepted: Vec<([usize; 3], Peak)> = Vec::with_capacity(count);
    for (flat, p, b) in candidates {
        let idx = [flat / (nd * nv), (flat / nv) % nd, flat % nv];
        let blocked = accepted.iter().any(|(other, _)| {
            (circular_distance(idx[0], other[0], na) as f64) < cell[0]
                && (idx[1].abs_diff(other[1]) as f64) < cell[1]
                && (circular_distance(idx[2], other[2], nv) as f64) < cell[2]
        });
        if blocked {
            continue;
        }
        accepted.push((idx, Peak { bin: b, magnitude: p.sqrt() }));
        if accepted.len() == count {
            break;
        }
    }
    let shortfall = accepted.len() < count;
    PeakSet { peaks: accepted.into_iter().map(|(_, p)| p).collect(), shortfall }
}

/// 1-D peak picking with the same rules as [`find_peaks`].
///
/// `signed` maps a storage index to its signed bin for tie-breaking.
/// Maxima weaker than `min_relative` × the strongest maximum are ignored.
/// Returns storage indices, strongest first.
pub fn find_peaks_1d(
    magnitude: &[f64],
    signed: impl Fn(usize) -> i64,
    circular: bool,
    cell: f64,
    count: usize,
    min_relative: f64,
) -> Vec<usize> {
    let n = magnitude.len();
    if count == 0 || n == 0 {
        return Vec::new();
    }
    let beats = |a: usize, b: usize| magnitude[a] > magnitude[b] || (magnitude[a] == magnitude[b] && signed(a) < signed(b));
    let neighbours = |k: usize| -> [Option<usize>; 2] {
        if circular {
            [Some((k + n - 1) % n), Some((k + 1) % n)]
        } else {
            [k.checked_sub(1), (k + 1 < n).then_some(k + 1)]
        }
    };
    let mut maxima: Vec<usize> = (0..n)
        .filter(|&k| neighbours(k).iter().flatten().all(|&j| j == k || beats(k, j)))
        .collect();
    maxima.sort_by(|&a, &b| if beats(a, b) { Ordering::Less } else if beats(b, a) { Ordering::Greater } else { Ordering::Equal });
    let floor = maxima.first().map_or(0.0, |&k| magnitude[k] * min_relative);
    let mut accepted: Vec<usize> = Vec::with_capacity(count);
    for k in maxima {
        if magnitude[k] < floor {
            break;
        }
        let dist = |j: usize| if circular { circular_distance(k, j, n) } else { k.abs_diff(j) };
        if accepted.iter().any(|&j| (dist(j) as f64) < cell) {
            continue;
        }
        accepted.push(k);
        if accepted.len() == count {
            break;
        }
    }
    accepted
}
