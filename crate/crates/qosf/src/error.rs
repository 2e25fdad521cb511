use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("order {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("QPSK needs an even number of bits, got {0}")]
    OddBitCount(usize),

    #[error("{what}: expected length {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("num_subcarriers {num_subcarriers} is not a multiple of num_paths * num_tx = {block}")]
    SubcarriersNotMultiple {
        num_subcarriers: usize,
        block: usize,
    },

    #[error("path powers of state {state} sum to {sum}, expected 1")]
    PathPowersNotNormalized { state: usize, sum: f64 },

    #[error("maximum delay {max_delay_s} s exceeds the cyclic prefix ({cp_s} s)")]
    DelayExceedsCyclicPrefix { max_delay_s: f64, cp_s: f64 },

    #[error("only 2 transmit antennas are supported, got {0}")]
    UnsupportedTxCount(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("state {state} out of range 1..={num_states}")]
    StateOutOfRange { state: usize, num_states: usize },

    #[error("delay {delay_samples} samples is not an integer number of samples")]
    NonIntegerDelay { delay_samples: f64 },

    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: u128 },

    #[error("angle grid of {size} evaluations exceeds the cap of {cap}")]
    GridTooLarge { size: u128, cap: u128 },

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),

    #[error("duplicate scenario label {0:?}")]
    LabelCollision(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("config: {0}")]
    ConfigFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by bad user input (config or spec), as opposed
    /// to resource caps or I/O.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::SubcarriersNotMultiple { .. }
                | Error::PathPowersNotNormalized { .. }
                | Error::DelayExceedsCyclicPrefix { .. }
                | Error::UnsupportedTxCount(_)
                | Error::InvalidConfig(_)
                | Error::NotPowerOfTwo(_)
                | Error::InvalidSpec(_)
                | Error::ConfigFormat(_)
                | Error::LengthMismatch { .. }
                | Error::OddBitCount(_)
                | Error::UnsupportedSize(_)
                | Error::LabelCollision(_)
                | Error::Parse { .. }
        )
    }

    /// True when a configured computational cap was hit.
    pub fn is_cap_breach(&self) -> bool {
        matches!(
            self,
            Error::SearchSpaceTooLarge { .. } | Error::GridTooLarge { .. }
        )
    }
}
