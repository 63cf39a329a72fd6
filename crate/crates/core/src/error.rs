use std::io;

/// Errors produced by the differentiator, the generators and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An API was driven in an order it does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// The hypotheses of an error bound are not met, so the bound says nothing.
    #[error("bound not applicable: {0}")]
    BoundNotApplicable(String),

    /// An unbounded window ran past its configured sample cap.
    #[error("history cap of {cap} samples exceeded")]
    HistoryCapExceeded { cap: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

pub(crate) fn io_err(path: impl AsRef<std::path::Path>, source: io::Error) -> Error {
    Error::Io {
        path: path.as_ref().display().to_string(),
        source,
    }
}
