use thiserror::Error;

use crate::graph::GraphKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph kind mismatch: expected {expected:?}, found {found:?}")]
    KindMismatch { expected: GraphKind, found: GraphKind },
    #[error("malformed graph: {0}")]
    MalformedGraph(String),
    #[error("invalid morphism: {0}")]
    InvalidMorphism(String),
    #[error("{0} must be a monomorphism")]
    NotMono(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("span composition requires identical middle objects")]
    MiddleObjectMismatch,
    #[error("match is not admissible for this rule")]
    InadmissibleMatch,
    #[error("overlap is not an admissible match of rules")]
    InadmissibleOverlap,
    #[error("invalid stochastic input: {0}")]
    Stochastic(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
