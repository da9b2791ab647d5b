use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergent { estimate: f64, tolerance: f64 },

    #[error("quadrature tail truncation {estimate:e} exceeds tolerance {tolerance:e}; widen the span")]
    TailTruncation { estimate: f64, tolerance: f64 },

    #[error("coefficient {n} overflowed the f64 range")]
    Overflow { n: usize },

    /// The partial-sum curve has no usable plateau below the asymptotic onset.
    #[error("no plateau found below the asymptotic onset m_alpha = {m_alpha}")]
    NoPlateau { m_alpha: usize },

    #[error("grid too coarse: spacing {spacing:e} exceeds {required:e}")]
    InsufficientGrid { spacing: f64, required: f64 },

    #[error("oracle vanishes at x = {x}")]
    OracleZero { x: f64 },

    #[error("io: {0}")]
    Io(String),

    #[error("format: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable tag, used for status rows and CLI stderr.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::QuadratureNonConvergent { .. } => "quadrature_non_convergent",
            Error::TailTruncation { .. } => "tail_truncation",
            Error::Overflow { .. } => "overflow",
            Error::NoPlateau { .. } => "no_plateau",
            Error::InsufficientGrid { .. } => "insufficient_grid",
            Error::OracleZero { .. } => "oracle_zero",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
