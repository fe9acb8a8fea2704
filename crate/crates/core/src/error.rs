use std::path::PathBuf;

use crate::classifier::EpochLog;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid knots: {0}")]
    InvalidKnots(String),

    #[error("invalid kernel: size {size} for series of length {len}")]
    InvalidKernel { size: usize, len: usize },

    #[error("anchor ({0}, {1}) lies outside the alignment band")]
    InfeasibleAnchor(usize, usize),

    #[error("class {label} has {count} sample(s); at least 2 are needed to draw peers")]
    InsufficientPeers { label: u8, count: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid price {price} for {stock} on day {day}")]
    InvalidPrice { stock: String, day: usize, price: f64 },

    #[error("insufficient history: {have} days available, {need} required")]
    InsufficientHistory { have: usize, need: usize },

    #[error("degenerate standardizer: training data is constant")]
    DegenerateStandardizer,

    #[error("median undefined on day {day}: only one stock active")]
    UndefinedMedian { day: usize },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize, log: Vec<EpochLog> },

    #[error("insufficient universe on {date}: {have} stocks, {need} required")]
    InsufficientUniverse { date: String, have: usize, need: usize },

    #[error("misaligned series: {0} vs {1} observations")]
    Alignment(usize, usize),

    #[error("zero tracking error")]
    DegenerateBenchmark,

    #[error("downside risk undefined: no negative excess return")]
    UndefinedDownside,

    #[error("unknown augmentation spec `{0}`")]
    UnknownSpec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
