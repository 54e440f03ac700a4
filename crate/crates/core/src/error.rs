use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circle map: {0}")]
    InvalidCircleMap(String),
    #[error("invalid torus map: {0}")]
    InvalidTorusMap(String),
    #[error("matrix is not unimodular or not a Dehn-twist conjugate: {0}")]
    InvalidMatrix(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("deviations appear unbounded: {0}")]
    UnboundedDeviation(String),
    #[error("height window exhausted after {rounds} rounds")]
    WindowExhausted { rounds: usize },
    #[error("lower-component ordering violated between s = {lower} and s = {upper}")]
    OrderingViolated { lower: f64, upper: f64 },
    #[error("fiber at t = {t} is not separated by the saturated region")]
    NotSeparating { t: f64 },
    #[error("precondition refused: {0}")]
    Refused(String),
    #[error("unknown gallery example {id:?}; known ids: {known}")]
    UnknownExample { id: String, known: String },
    #[error("map definition error: {0}")]
    Definition(String),
    #[error("mask format error: {0}")]
    MaskFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
