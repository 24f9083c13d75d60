use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid step function: {0}")]
    InvalidStepFunction(String),

    #[error("invalid shape function: {0}")]
    InvalidShape(String),

    #[error("argument {value} outside the domain of {what}")]
    Domain { what: String, value: f64 },

    #[error("function is identically zero")]
    ZeroFunction,

    #[error("function takes negative values")]
    NegativeValue,

    #[error("negative piece in decomposition")]
    NegativePiece,

    #[error("operation not supported for this shape: {0}")]
    UnsupportedFamily(String),

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("solution lies below the smallest representable log argument")]
    Underflow,

    #[error("empty input")]
    EmptyInput,

    #[error("samples are not non-decreasing")]
    NotMonotone,

    #[error("{layers} layers exceed the exhaustive search limit of {max}")]
    TooManyLayers { layers: usize, max: usize },

    #[error("illegal witness specification: {0}")]
    IllegalSpec(String),

    #[error("non-positive value {value} at t = {t}")]
    NonPositiveValue { t: f64, value: f64 },

    #[error("unknown decomposition strategy `{0}`")]
    UnknownStrategy(String),
}

impl Error {
    pub(crate) fn domain(what: impl Into<String>, value: f64) -> Self {
        Error::Domain {
            what: what.into(),
            value,
        }
    }

    /// Short machine-readable tag for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidStepFunction(_) => "invalid_step_function",
            Error::InvalidShape(_) => "invalid_shape",
            Error::Domain { .. } => "domain_error",
            Error::ZeroFunction => "zero_function",
            Error::NegativeValue => "negative_value",
            Error::NegativePiece => "negative_piece",
            Error::UnsupportedFamily(_) => "unsupported_family",
            Error::NotInvertible(_) => "not_invertible",
            Error::Underflow => "underflow",
            Error::EmptyInput => "empty_input",
            Error::NotMonotone => "not_monotone",
            Error::TooManyLayers { .. } => "too_many_layers",
            Error::IllegalSpec(_) => "illegal_spec",
            Error::NonPositiveValue { .. } => "non_positive_value",
            Error::UnknownStrategy(_) => "unknown_strategy",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
