use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] isac_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: not a tensor file ({reason})")]
    Format { path: PathBuf, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(
        "sweep point {value}: radar cube needs {bytes} bytes, over the {cap} byte cap; \
         reduce N_r, N_s or L (e.g. the desk scale 8×8×64×32) or raise memory_cap_bytes"
    )]
    OverBudget { value: f64, bytes: u128, cap: u128 },
    #[error("unknown radar image axes `{0}`; use angle-range, angle-velocity or range-velocity")]
    AxisPair(String),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}
