use thiserror::Error;

#[derive(Debug, Error)]
pub enum FmlError {
    #[error("invalid contraction ratio {0}: must lie in (0, 1)")]
    InvalidRatio(f64),

    #[error("an iterated function system needs at least two maps, got {0}")]
    TooFewMaps(usize),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("symbol {symbol} out of range for an alphabet of size {arity}")]
    InvalidSymbol { symbol: usize, arity: usize },

    #[error("cannot parse word {0:?}")]
    WordParse(String),

    #[error("cells are not pairwise incomparable: {0} is a prefix of {1}")]
    NotAntichain(String, String),

    #[error("content exponent must lie in (0, 1], got {0}")]
    InvalidExponent(f64),

    #[error("invalid cylinder function: {0}")]
    InvalidFunction(String),

    #[error("parameter out of range: {0}")]
    Parameter(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = FmlError> = std::result::Result<T, E>;
