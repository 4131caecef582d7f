use thiserror::Error;

/// Failure modes shared by every stage of the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resolution {resolution} too coarse: no quadrature cell lies inside the domain")]
    ResolutionTooCoarse { resolution: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("record is missing wavenumbers {missing:?}")]
    IncompleteRecord { missing: Vec<f64> },

    #[error("test point coincides with the observation point (|x - y| = {distance:e})")]
    SingularTestPoint { distance: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("source violates positivity: min S = {min_value}")]
    PositivityViolation { min_value: f64 },

    #[error("config line {line}: key `{key}`: {message}")]
    Config { key: String, line: usize, message: String },

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
