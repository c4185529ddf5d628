//! Two-dimensional radar images from a radar cube.

use std::io::Write;
use std::str::FromStr;

use isac_core::freq::bins;
use isac_core::joint::bin_to_params;
use isac_core::{BinIndex, RadarCube, SystemConfig};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Angle,
    Range,
    Velocity,
}

impl Axis {
    fn slot(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::Angle => "angle_deg",
            Axis::Range => "range_m",
            Axis::Velocity => "velocity_mps",
        }
    }

    /// Physical coordinate of storage index `k`. Angle bins that map outside
    /// the visible region are NaN.
    fn coordinate(self, k: usize, cfg: &SystemConfig) -> f64 {
        let bin = match self {
            Axis::Angle => BinIndex::new(bins::centered(k, cfg.angle_bins), 0, 0),
            Axis::Range => BinIndex::new(0, bins::delay(k), 0),
            Axis::Velocity => BinIndex::new(0, 0, bins::centered(k, cfg.doppler_bins)),
        };
        match (self, bin_to_params(bin, cfg)) {
            (_, Err(_)) => f64::NAN,
            (Axis::Angle, Ok((theta, _, _))) => theta.to_degrees(),
            (Axis::Range, Ok((_, range, _))) => range,
            (Axis::Velocity, Ok((_, _, velocity))) => velocity,
        }
    }
}

/// Row and column axes of an image; the remaining axis is reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisPair {
    pub rows: Axis,
    pub cols: Axis,
}

impl AxisPair {
    pub const ANGLE_RANGE: Self = Self { rows: Axis::Angle, cols: Axis::Range };
    pub const ANGLE_VELOCITY: Self = Self { rows: Axis::Angle, cols: Axis::Velocity };
    pub const RANGE_VELOCITY: Self = Self { rows: Axis::Range, cols: Axis::Velocity };
}

impl FromStr for AxisPair {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "angle-range" => Ok(Self::ANGLE_RANGE),
            "angle-velocity" => Ok(Self::ANGLE_VELOCITY),
            "range-velocity" => Ok(Self::RANGE_VELOCITY),
            other => Err(HarnessError::AxisPair(other.to_string())),
        }
    }
}

/// `max |Y|` over the reduced axis, rows and columns sorted by physical
/// coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarImage {
    pub axes: AxisPair,
    pub row_coords: Vec<f64>,
    pub col_coords: Vec<f64>,
    /// Row-major magnitudes.
    pub values: Vec<f64>,
}

fn sorted_axis(axis: Axis, n: usize, cfg: &SystemConfig) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = (0..n).map(|k| (k, axis.coordinate(k, cfg))).collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1));
    v
}

/// Builds the image. `cfg` supplies the physical constants; the DFT sizes
/// are taken from the cube itself.
pub fn export_radar_image(cube: &RadarCube, cfg: &SystemConfig, axes: AxisPair) -> RadarImage {
    let shape = cube.shape();
    let mut cfg = cfg.clone();
    [cfg.angle_bins, cfg.range_bins, cfg.doppler_bins] = shape;
    let reduced = 3 - axes.rows.slot() - axes.cols.slot();
    let rows = sorted_axis(axes.rows, shape[axes.rows.slot()], &cfg);
    let cols = sorted_axis(axes.cols, shape[axes.cols.slot()], &cfg);
    let data = cube.data();
    let mut values = Vec::with_capacity(rows.len() * cols.len());
    for &(r, _) in &rows {
        for &(c, _) in &cols {
            let mut idx = [0usize; 3];
            idx[axes.rows.slot()] = r;
            idx[axes.cols.slot()] = c;
            let peak = (0..shape[reduced])
                .map(|k| {
                    idx[reduced] = k;
                    data[idx].norm()
                })
                .fold(0.0, f64::max);
            values.push(peak);
        }
    }
    RadarImage {
        axes,
        row_coords: rows.into_iter().map(|(_, x)| x).collect(),
        col_coords: cols.into_iter().map(|(_, x)| x).collect(),
        values,
    }
}

impl RadarImage {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.col_coords.len() + col]
    }

    /// Physical coordinates of the brightest cell.
    pub fn brightest(&self) -> (f64, f64) {
        let (k, _) = self.values.iter().enumerate().fold((0, f64::MIN), |best, (k, &v)| if v > best.1 { (k, v) } else { best });
        let n = self.col_coords.len();
        (self.row_coords[k / n], self.col_coords[k % n])
    }

    /// CSV matrix: the first row holds the column coordinates after a
    /// `rows/cols` label, each following row starts with its coordinate.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec![format!("{}/{}", self.axes.rows.label(), self.axes.cols.label())];
        header.extend(self.col_coords.iter().map(|x| x.to_string()));
        out.write_record(&header)?;
        for (r, y) in self.row_coords.iter().enumerate() {
            let mut record = vec![y.to_string()];
            record.extend((0..self.col_coords.len()).map(|c| self.get(r, c).to_string()));
            out.write_record(&record)?;
        }
        out.flush().map_err(|e| HarnessError::Csv(e.into()))
    }
}
