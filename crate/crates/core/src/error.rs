use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tone at {tone_hz} Hz exceeds the Nyquist limit of {nyquist_hz} Hz")]
    Aliasing { tone_hz: f64, nyquist_hz: f64 },

    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    #[error("invalid waveform spec: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {requested} requested but only {available} available ({detail})")]
    CapacityExceeded { requested: usize, available: usize, detail: String },

    #[error("sample rate mismatch: {0} Hz vs {1} Hz")]
    SampleRateMismatch(f64, f64),

    #[error("correlation has no distinct peak")]
    NoPeak,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty grid")]
    EmptyGrid,

    #[error("delay of {delay_samples:.1} samples does not fit a {buffer}-sample buffer")]
    DelayOutOfBuffer { delay_samples: f64, buffer: usize },

    #[error("inconsistent scenario: {0}")]
    Scenario(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
