use std::io;

use crate::harness::PipelineReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A precondition of an operation does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Encoder frame rate and video fps disagree with the configured stride.
    #[error(
        "alignment error: encoder rate {enc_rate_hz} Hz / video {video_fps} fps = {ratio} \
         does not match stride {stride}"
    )]
    RateMismatch {
        enc_rate_hz: f64,
        video_fps: f64,
        ratio: f64,
        stride: usize,
    },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    /// A pipeline stage failed; the timings collected before the failure are kept.
    #[error("stage '{stage}' failed: {message}")]
    StageFailed {
        stage: String,
        message: String,
        partial: Box<PipelineReport>,
    },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    }
}
