use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter outside its admissible range.
    #[error("domain error: {0}")]
    Domain(String),

    /// Configuration validation failed; one entry per violated field.
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    /// An evaluation time outside the interval a trajectory is defined on.
    #[error("time {t} outside [{lo}, {hi})")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("degenerate interval: t_0 = t_f = {0}")]
    DegenerateInterval(f64),

    /// Riccati iteration did not reach the requested residual.
    #[error("gain synthesis failed: {0}")]
    Synthesis(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
