use thiserror::Error;

/// Errors raised by the model, samplers, geometry and calculators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("disorder field covers {have}, but {need} is required")]
    Coverage { have: String, need: String },

    #[error("window of {sites} sites exceeds the enumeration cap of {cap}")]
    Size { sites: usize, cap: usize },

    #[error("tail sum diverges for alpha = {0} (requires alpha < 1)")]
    DivergentSeries(f64),

    #[error("insufficient samples: {samples} samples cannot form {batches} batches")]
    InsufficientSamples { samples: usize, batches: usize },

    #[error("invalid triangle family: {0}")]
    InvalidFamily(String),

    #[error("parameter regime violated ({constraint}): {detail}")]
    Regime { constraint: String, detail: String },

    #[error("internal invariant violated: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
