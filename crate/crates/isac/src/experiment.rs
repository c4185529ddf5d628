//! Experiment description read from TOML.
//!
//! The file is a flat key-value document. Physical quantities are SI,
//! angles are degrees and powers use dB/dBm as in the usual 5G NR tables;
//! everything is converted to radians and linear units on the way in.
//!
//! ```toml
//! master_seed = 7
//! trials = 200
//! sweep_variable = "tx_power_dbm"
//! sweep_values = [0, 10, 20, 30]
//! estimators = ["joint", "joint_without_scaling", "separate"]
//! target_count = 3
//! ```

use std::fmt;
use std::path::Path;

use isac_core::config::{db_to_linear, dbm_to_watts};
use isac_core::rng::{derive_seed, stream, Purpose};
use isac_core::{SystemConfig, Target, SPEED_OF_LIGHT};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, HarnessError, Result};

/// Quantity varied across sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    TxPowerDbm,
    NumTx,
    NumSymbols,
    NumRx,
    NumSubcarriers,
    TargetCount,
}

impl SweepVariable {
    fn is_count(self) -> bool {
        !matches!(self, SweepVariable::TxPowerDbm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Joint,
    JointWithoutScaling,
    Separate,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Joint, EstimatorKind::JointWithoutScaling, EstimatorKind::Separate];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Joint => "joint",
            EstimatorKind::JointWithoutScaling => "joint_without_scaling",
            EstimatorKind::Separate => "separate",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How reflection coefficients of drawn targets are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaModel {
    /// `β ~ CN(0, σ_β²)`, redrawn every trial.
    #[default]
    Rayleigh,
    /// `|β|² = σ_β²` with a uniformly random phase, redrawn every trial.
    UnitPhase,
}

/// A fixed target. `beta_re`/`beta_im` override the beta model when both
/// are given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub angle_deg: f64,
    pub range_m: f64,
    pub velocity_mps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_re: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_im: Option<f64>,
}

/// One Monte-Carlo experiment. Defaults give the desk-scale system with
/// every physical constant of the 28 GHz reference configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub trials: usize,
    pub estimators: Vec<EstimatorKind>,
    pub sweep_variable: SweepVariable,
    /// Empty means a single point at the base configuration.
    pub sweep_values: Vec<f64>,
    /// Add receiver noise to the echoes.
    pub noise: bool,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    /// Refuse sweep points whose radar cube is larger than this.
    pub memory_cap_bytes: u64,
    /// Fill `wall_ms`; off by default so result files are reproducible.
    pub record_wall_time: bool,
    /// Fraction of the angular peak magnitude below which the separate
    /// baseline ignores a spatial maximum.
    pub separate_angle_significance: f64,

    pub carrier_freq_hz: f64,
    pub subcarrier_spacing_hz: f64,
    pub num_subcarriers: usize,
    /// Total OFDM symbol duration `T` including the cyclic prefix.
    pub total_symbol_duration_s: f64,
    pub num_symbols: usize,
    pub num_tx: usize,
    pub num_rx: usize,
    /// Element spacings; half a wavelength when absent.
    pub tx_spacing_m: Option<f64>,
    pub rx_spacing_m: Option<f64>,
    pub ref_path_loss_db: f64,
    pub ref_distance_m: f64,
    pub path_loss_exponent: f64,
    pub reflection_power_db: f64,
    pub comm_noise_power_dbm: f64,
    pub sensing_noise_power_dbm: f64,
    pub qam_order: usize,
    /// DFT sizes; three times the matching dimension when absent.
    pub angle_bins: Option<usize>,
    pub range_bins: Option<usize>,
    pub doppler_bins: Option<usize>,
    pub num_users: usize,
    pub tx_power_dbm: f64,
    /// Share of the transmit power given to sensing beams; equal per-stream
    /// power when absent.
    pub sensing_fraction: Option<f64>,
    /// Frequency-flat user channels instead of per-subcarrier draws.
    pub flat_channel: bool,
    /// Sensing beam directions. When absent, beams point at the targets.
    pub sensing_angles_deg: Option<Vec<f64>>,

    /// Fixed scene; when empty, `target_count` targets are drawn per trial.
    pub targets: Vec<TargetSpec>,
    pub target_count: usize,
    pub angle_range_deg: [f64; 2],
    pub range_range_m: [f64; 2],
    pub velocity_range_mps: [f64; 2],
    pub beta_model: BetaModel,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            trials: 200,
            estimators: EstimatorKind::ALL.to_vec(),
            sweep_variable: SweepVariable::TxPowerDbm,
            sweep_values: Vec::new(),
            noise: true,
            workers: 0,
            memory_cap_bytes: 2 << 30,
            record_wall_time: false,
            separate_angle_significance: isac_core::SeparateOptions::default().angle_significance,
            carrier_freq_hz: 28e9,
            subcarrier_spacing_hz: 120e3,
            num_subcarriers: 64,
            total_symbol_duration_s: 8.92e-6,
            num_symbols: 32,
            num_tx: 8,
            num_rx: 8,
            tx_spacing_m: None,
            rx_spacing_m: None,
            ref_path_loss_db: -30.0,
            ref_distance_m: 1.0,
            path_loss_exponent: 2.8,
            reflection_power_db: -10.0,
            comm_noise_power_dbm: -60.0,
            sensing_noise_power_dbm: -60.0,
            qam_order: 16,
            angle_bins: None,
            range_bins: None,
            doppler_bins: None,
            num_users: 2,
            tx_power_dbm: 30.0,
            sensing_fraction: None,
            flat_channel: false,
            sensing_angles_deg: None,
            targets: Vec::new(),
            target_count: 1,
            angle_range_deg: [-30.0, 30.0],
            range_range_m: [40.0, 80.0],
            velocity_range_mps: [-50.0, 50.0],
            beta_model: BetaModel::Rayleigh,
        }
    }
}

/// A resolved sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub value: f64,
    pub system: SystemConfig,
    pub target_count: usize,
}

impl ExperimentConfig {
    /// Full-size 16×16 array, 512 subcarriers and 256 symbols.
    pub fn full_scale() -> Self {
        Self { num_tx: 16, num_rx: 16, num_subcarriers: 512, num_symbols: 256, ..Self::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment config serialises")
    }

    /// The base system, before any sweep value is applied.
    pub fn base_system(&self) -> SystemConfig {
        let wavelength = SPEED_OF_LIGHT / self.carrier_freq_hz;
        let mut cfg = SystemConfig {
            carrier_freq: self.carrier_freq_hz,
            subcarrier_spacing: self.subcarrier_spacing_hz,
            num_subcarriers: self.num_subcarriers,
            cp_duration: self.total_symbol_duration_s - 1.0 / self.subcarrier_spacing_hz,
            num_symbols: self.num_symbols,
            num_tx: self.num_tx,
            num_rx: self.num_rx,
            tx_spacing: self.tx_spacing_m.unwrap_or(wavelength / 2.0),
            rx_spacing: self.rx_spacing_m.unwrap_or(wavelength / 2.0),
            ref_path_loss: db_to_linear(self.ref_path_loss_db),
            ref_distance: self.ref_distance_m,
            path_loss_exponent: self.path_loss_exponent,
            reflection_power: db_to_linear(self.reflection_power_db),
            comm_noise_power: dbm_to_watts(self.comm_noise_power_dbm),
            sensing_noise_power: dbm_to_watts(self.sensing_noise_power_dbm),
            qam_order: self.qam_order,
            angle_bins: 0,
            range_bins: 0,
            doppler_bins: 0,
            num_users: self.num_users,
            tx_power: dbm_to_watts(self.tx_power_dbm),
        };
        self.fill_bins(&mut cfg);
        cfg
    }

    fn fill_bins(&self, cfg: &mut SystemConfig) {
        cfg.angle_bins = self.angle_bins.unwrap_or(3 * cfg.num_rx);
        cfg.range_bins = self.range_bins.unwrap_or(3 * cfg.num_subcarriers);
        cfg.doppler_bins = self.doppler_bins.unwrap_or(3 * cfg.num_symbols);
    }

    fn scene_size(&self) -> usize {
        if self.targets.is_empty() {
            self.target_count
        } else {
            self.targets.len()
        }
    }

    /// Applies `value` of the sweep variable to the base configuration.
    pub fn point(&self, index: usize, value: f64) -> Result<SweepPoint> {
        let mut system = self.base_system();
        let mut target_count = self.scene_size();
        if self.sweep_variable.is_count() && !(value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
            return Err(HarnessError::Config(format!("{:?} needs whole-number sweep values, got {value}", self.sweep_variable)));
        }
        let count = value as usize;
        match self.sweep_variable {
            SweepVariable::TxPowerDbm => system.tx_power = dbm_to_watts(value),
            SweepVariable::NumTx => system.num_tx = count,
            SweepVariable::NumSymbols => system.num_symbols = count,
            SweepVariable::NumRx => system.num_rx = count,
            SweepVariable::NumSubcarriers => system.num_subcarriers = count,
            SweepVariable::TargetCount => {
                if !self.targets.is_empty() {
                    return Err(HarnessError::Config("a target-count sweep needs a random scene, not a fixed target list".into()));
                }
                target_count = count;
            }
        }
        self.fill_bins(&mut system);
        Ok(SweepPoint { index, value, system, target_count })
    }

    /// Every sweep point, validated up front: system parameters, scene
    /// ranges, user count against `N_t` and the radar-cube memory cap.
    pub fn points(&self) -> Result<Vec<SweepPoint>> {
        self.check_scene()?;
        if self.estimators.is_empty() {
            return Err(HarnessError::Config("no estimators selected".into()));
        }
        let values = if self.sweep_values.is_empty() {
            vec![match self.sweep_variable {
                SweepVariable::TxPowerDbm => self.tx_power_dbm,
                SweepVariable::NumTx => self.num_tx as f64,
                SweepVariable::NumSymbols => self.num_symbols as f64,
                SweepVariable::NumRx => self.num_rx as f64,
                SweepVariable::NumSubcarriers => self.num_subcarriers as f64,
                SweepVariable::TargetCount => self.scene_size() as f64,
            }]
        } else {
            self.sweep_values.clone()
        };
        let mut seen = Vec::with_capacity(values.len());
        let mut points = Vec::with_capacity(values.len());
        for (index, &value) in values.iter().enumerate() {
            if seen.contains(&value.to_bits()) {
                return Err(HarnessError::Config(format!("sweep value {value} listed twice")));
            }
            seen.push(value.to_bits());
            let point = self.point(index, value)?;
            users_fit(&point)?;
            point.system.validate()?;
            if point.target_count == 0 {
                return Err(HarnessError::Config(format!("sweep point {value}: scene has no targets")));
            }
            let bytes = point.system.radar_cube_bytes();
            if bytes > self.memory_cap_bytes as u128 {
                return Err(HarnessError::OverBudget { value, bytes, cap: self.memory_cap_bytes as u128 });
            }
            points.push(point);
        }
        Ok(points)
    }

    fn check_scene(&self) -> Result<()> {
        let ordered = |name: &str, [lo, hi]: [f64; 2]| {
            if lo <= hi && lo.is_finite() && hi.is_finite() {
                Ok(())
            } else {
                Err(HarnessError::Config(format!("{name} must be a finite [low, high] pair")))
            }
        };
        ordered("angle_range_deg", self.angle_range_deg)?;
        ordered("range_range_m", self.range_range_m)?;
        ordered("velocity_range_mps", self.velocity_range_mps)?;
        if self.angle_range_deg[0] <= -90.0 || self.angle_range_deg[1] >= 90.0 {
            return Err(HarnessError::Config("angle_range_deg must lie strictly inside (-90, 90)".into()));
        }
        if self.range_range_m[0] <= 0.0 {
            return Err(HarnessError::Config("range_range_m must be positive".into()));
        }
        for t in &self.targets {
            if !(t.angle_deg.abs() < 90.0 && t.range_m > 0.0 && t.velocity_mps.is_finite()) {
                return Err(HarnessError::Config(format!("invalid fixed target {t:?}")));
            }
            if t.beta_re.is_some() != t.beta_im.is_some() {
                return Err(HarnessError::Config("give both beta_re and beta_im or neither".into()));
            }
        }
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.separate_angle_significance) {
            return Err(HarnessError::Config("separate_angle_significance must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Targets of one trial. Positions come from the fixed list or are drawn
    /// uniformly from the configured ranges; reflection coefficients follow
    /// the beta model. Both use their own derived streams.
    pub fn scene(&self, point: &SweepPoint, trial: usize) -> Vec<Target> {
        let key = |purpose| derive_seed(self.master_seed, point.index as u64, trial as u64, purpose);
        let mut geometry = stream(key(Purpose::Scene));
        let mut reflection = stream(key(Purpose::Reflection));
        let sigma = point.system.reflection_power.sqrt();
        let mut beta = || match self.beta_model {
            BetaModel::Rayleigh => isac_core::rng::complex_gaussian(&mut reflection, point.system.reflection_power),
            BetaModel::UnitPhase => Complex64::from_polar(sigma, reflection.random_range(0.0..std::f64::consts::TAU)),
        };
        if self.targets.is_empty() {
            let mut draw = |[lo, hi]: [f64; 2]| if lo == hi { lo } else { geometry.random_range(lo..hi) };
            (0..point.target_count)
                .map(|_| {
                    let theta = draw(self.angle_range_deg).to_radians();
                    let range = draw(self.range_range_m);
                    let velocity = draw(self.velocity_range_mps);
                    Target::new(theta, range, velocity).with_beta(beta())
                })
                .collect()
        } else {
            self.targets
                .iter()
                .map(|t| {
                    let b = match (t.beta_re, t.beta_im) {
                        (Some(re), Some(im)) => Complex64::new(re, im),
                        _ => beta(),
                    };
                    Target::new(t.angle_deg.to_radians(), t.range_m, t.velocity_mps).with_beta(b)
                })
                .collect()
        }
    }
}

fn users_fit(point: &SweepPoint) -> Result<()> {
    let cfg = &point.system;
    if cfg.num_users > cfg.num_tx {
        return Err(HarnessError::Config(format!(
            "sweep point {}: {} users exceed {} transmit antennas",
            point.value, cfg.num_users, cfg.num_tx
        )));
    }
    Ok(())
}
