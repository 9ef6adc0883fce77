// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Every failure the simulator can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is singular (pivot {pivot:e} below tolerance {tolerance:e})")]
    SingularMatrix { pivot: f64, tolerance: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("large-scale fading coefficient {index} is not positive ({value:e})")]
    NonPositiveLambda { index: usize, value: f64 },
    #[error("bit sequence of length {len} is not a multiple of {bits_per_symbol}")]
    BadLength { len: usize, bits_per_symbol: usize },
    #[error("Gram matrix is singular")]
    SingularGram,
    #[error("cannot map an all-zero matrix")]
    ZeroMatrix,
    #[error("conductance {value:e} S falls outside the device range")]
    InfeasibleMapping { value: f64 },
    #[error("LSFC ratio {ratio:e} cannot be represented by the amplifier devices")]
    DynamicRangeExceeded { ratio: f64 },
    #[error("feedback conductance matrix is singular")]
    SingularFeedback,
    #[error("feedback diagonal {index} is not positive ({value:e}), the loop would not be stable")]
    StabilityViolation { index: usize, value: f64 },
    #[error("nodal system is singular")]
    SingularSystem,
    #[error("transient did not settle within {t_end:e} s")]
    NoConvergence { t_end: f64 },
    #[error("reference signal has zero energy")]
    ZeroSignal,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
