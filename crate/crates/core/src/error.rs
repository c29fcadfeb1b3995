use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical or geometric parameter is outside its valid domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// Configuration that cannot produce a meaningful analysis
    /// (empty band, degenerate plan, missing material).
    #[error("configuration error: {0}")]
    Config(String),

    /// The inputs leave the requested quantity undefined.
    #[error("undefined input: {0}")]
    Undefined(String),

    /// Internal contract broken between two components, e.g. mismatched bin counts.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Detection rates cannot be computed for the given labels.
    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("trial {index}: {source}")]
    Trial {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parameter(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::parameter(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

pub(crate) fn require_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(name, format!("must be finite, got {value}")))
    }
}
