use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("offspring law at {vertex} is not normalized: probabilities sum to {sum}")]
    InvalidLaw { vertex: String, sum: f64 },

    #[error("vertex {vertex} is not resolvable in the truncation or by its boundary policy")]
    TruncationIncomplete { vertex: String },

    #[error("invalid set tag for this graph family: {0}")]
    InvalidTag(String),

    #[error("graph is not irreducible: {0}")]
    Reducible(String),

    #[error("no automorphism fixing the root maps {a} to {b} (distances {da} and {db} differ)")]
    NoAutomorphism {
        a: String,
        b: String,
        da: u32,
        db: u32,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("projection rate-sum identity violated at source {x} toward target {y}: lhs {lhs} != rhs {rhs}")]
    ProjectionViolation {
        x: String,
        y: String,
        lhs: String,
        rhs: String,
    },

    #[error("bisection predicate is not monotone within resolution")]
    Inconclusive,

    #[error("certificate verification failed: {0}")]
    Certificate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
