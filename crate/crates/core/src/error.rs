use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NonHermitianInput { asymmetry: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid system shape: {0}")]
    InvalidShape(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("geometry does not match shape: {0}")]
    GeometryMismatch(String),
    #[error("precoder of user {user} has zero power")]
    ZeroPrecoder { user: usize },
    #[error("{streams} streams exceed the {per_rru} antennas of one RRU")]
    StreamsExceedRruAntennas { streams: usize, per_rru: usize },
    #[error("quadrature did not reach tolerance {tol:e} within {max_depth} bisections")]
    QuadratureFailure { tol: f64, max_depth: u32 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by user-supplied configuration rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::InvalidShape(_)
                | Error::UnsupportedTopology(_)
                | Error::GeometryMismatch(_)
                | Error::StreamsExceedRruAntennas { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
