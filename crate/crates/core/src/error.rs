use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A recognised container whose contents fall outside what is supported
    /// (codec, channel count, sample rate).
    #[error("unsupported format: {field} = {value} (expected {expected})")]
    UnsupportedFormat {
        field: &'static str,
        value: String,
        expected: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("input too short: need at least {needed} samples, got {got}")]
    InputTooShort { needed: usize, got: usize },

    #[error("input error: {0}")]
    Input(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("training error: {0}")]
    Training(String),

    #[error("non-finite value at {0}")]
    NonFinite(String),

    #[error("gradient check failed: {0}")]
    GradCheck(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves rather than of inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Training(_) | Error::NonFinite(_) | Error::GradCheck(_)
        )
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}
