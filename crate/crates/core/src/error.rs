use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate interval [{a}, {b}]: lower bound must be strictly below upper bound")]
    DegenerateInterval { a: f64, b: f64 },

    #[error("scale factor must be nonzero")]
    ZeroScale,

    #[error("invalid exponents p = {p}, q = {q}: {reason}")]
    InvalidExponent { p: f64, q: f64, reason: String },

    #[error("unsupported averaging kernel: {0}")]
    UnsupportedKernel(String),

    #[error("separable sampling requires a uniform density")]
    SeparableNonUniform,

    #[error("lattice series diverges: {0}")]
    DivergentSeries(String),

    #[error("lambda = {lambda} does not exceed the required threshold {threshold}")]
    BelowThreshold { lambda: f64, threshold: f64 },

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("sample matrix is rank deficient: numerical rank {rank} < {cols} columns")]
    RankDeficient { rank: usize, cols: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
