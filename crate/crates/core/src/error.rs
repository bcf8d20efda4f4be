use alloc::string::String;

/// Failure modes shared by every module of the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// The chart center of the opposite chart has no image under `z -> 1/z`.
    #[error("point is a pole and does not lie in the chart overlap")]
    PoleNotInOverlap,
    #[error("chart error: {0}")]
    Chart(String),
    /// A computed quantity violated an invariant beyond its tolerance.
    #[error("accuracy failure: {what} deviates by {deviation:e} (tolerance {tolerance:e})")]
    Accuracy {
        what: String,
        deviation: f64,
        tolerance: f64,
    },
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("unsupported polarization: {0}")]
    UnsupportedPolarization(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn chart(msg: impl Into<String>) -> Self {
        Error::Chart(msg.into())
    }

    pub(crate) fn accuracy(what: impl Into<String>, deviation: f64, tolerance: f64) -> Self {
        Error::Accuracy {
            what: what.into(),
            deviation,
            tolerance,
        }
    }
}
