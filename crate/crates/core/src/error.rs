use thiserror::Error;

use crate::metric::Symbol;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric matrix is malformed: {0}")]
    MalformedMatrix(String),

    #[error("metric is not symmetric: d({x},{y}) = {forward} but d({y},{x}) = {backward}")]
    AsymmetricMetric {
        x: usize,
        y: usize,
        forward: f64,
        backward: f64,
    },

    #[error("self-distance of symbol {x} is {value}, expected 0")]
    NonzeroDiagonal { x: usize, value: f64 },

    #[error("distinct symbols {x} and {y} are at distance 0")]
    ZeroOffDiagonal { x: usize, y: usize },

    #[error("triangle inequality violated on ({x},{z}) via {y}: {direct} > {via_first} + {via_second}")]
    TriangleViolation {
        x: usize,
        y: usize,
        z: usize,
        direct: f64,
        via_first: f64,
        via_second: f64,
    },

    #[error("alphabet of size {size} has no nonzero distance to normalize by")]
    DegenerateAlphabet { size: usize },

    #[error("distance involving a wildcard is undefined")]
    WildcardDistance,

    #[error("symbol id {symbol} is outside the alphabet of size {size}")]
    SymbolOutOfRange { symbol: Symbol, size: usize },

    #[error("operation requires a {expected} metric")]
    WrongMetricKind { expected: &'static str },

    #[error("pattern length {m} exceeds text length {n}")]
    PatternTooLong { m: usize, n: usize },

    #[error("pattern is empty")]
    EmptyPattern,

    #[error("correlation magnitude bound {bound} exceeds the exact integer limit {limit}")]
    OverflowRisk { bound: u128, limit: u128 },

    #[error("{required} sampling runs requested, budget is {cap}")]
    BudgetExceeded { required: u64, cap: u64 },

    #[error("bucket mass estimate needs at least one match (m0 = 0)")]
    DivisionGuard,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MalformedMatrix(_) => "malformed_matrix",
            Error::AsymmetricMetric { .. } => "asymmetric_metric",
            Error::NonzeroDiagonal { .. } => "nonzero_diagonal",
            Error::ZeroOffDiagonal { .. } => "zero_off_diagonal",
            Error::TriangleViolation { .. } => "triangle_violation",
            Error::DegenerateAlphabet { .. } => "degenerate_alphabet",
            Error::WildcardDistance => "wildcard_distance",
            Error::SymbolOutOfRange { .. } => "symbol_out_of_range",
            Error::WrongMetricKind { .. } => "wrong_metric_kind",
            Error::PatternTooLong { .. } => "pattern_too_long",
            Error::EmptyPattern => "empty_pattern",
            Error::OverflowRisk { .. } => "overflow_risk",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::DivisionGuard => "division_guard",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::UnknownSymbol(_) => "unknown_symbol",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
