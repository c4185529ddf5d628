use alloc::string::String;

/// Errors raised by the simulation and estimation pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: [usize; 3], found: [usize; 3] },

    #[error("range must be non-negative, got {0} m")]
    NegativeRange(f64),

    #[error("path-loss distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("steering vector needs at least one element")]
    EmptyArray,

    #[error("unsupported QAM order {0}; expected one of 4, 16, 64, 256")]
    UnsupportedQamOrder(usize),

    #[error("{axis} DFT of {points} points is shorter than the {required} input samples")]
    DftTooShort {
        axis: &'static str,
        points: usize,
        required: usize,
    },

    #[error("{streams} precoded streams exceed {antennas} transmit antennas")]
    TooManyStreams { streams: usize, antennas: usize },

    #[error("stacked channel on subcarrier {subcarrier} is rank deficient")]
    SingularChannel { subcarrier: usize },

    #[error("angular bin {bin} maps outside the visible region (|sin| > 1)")]
    AngleOutOfRange { bin: i64 },

    #[error("bin ({0}, {1}, {2}) outside the radar cube")]
    BinOutOfRange(i64, i64, i64),

    #[error("round-trip delay spread {spread:e} s exceeds the cyclic prefix {cp:e} s")]
    CyclicPrefixTooShort { spread: f64, cp: f64 },

    #[error("RMSE needs at least one ground-truth target")]
    EmptyTruth,
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
