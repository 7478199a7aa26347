use thiserror::Error;

use crate::model::{PeriodicPlay, ValidationReport};
use crate::values::InfeasibleReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game spec:\n{0}")]
    InvalidSpec(ValidationReport),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid play: {0}")]
    InvalidPlay(String),

    #[error("invalid mixed action: {0}")]
    InvalidMixed(String),

    #[error("invalid automaton: {0}")]
    InvalidAutomaton(String),

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cannot certify: {0}")]
    CannotCertify(String),

    #[error("unsupported objective family `{kind}` for {operation}")]
    Unsupported { operation: &'static str, kind: &'static str },

    #[error("resource cap exceeded: {what}")]
    ResourceCap {
        what: String,
        best_found: Option<Box<PeriodicPlay>>,
    },

    #[error("infeasible: {0}")]
    Infeasible(Box<InfeasibleReport>),

    #[error("target outside E approximation (distance {distance} > epsilon {epsilon})")]
    TargetOutside { distance: f64, epsilon: f64 },
}

impl Error {
    pub(crate) fn resource(what: impl Into<String>) -> Self {
        Error::ResourceCap {
            what: what.into(),
            best_found: None,
        }
    }
}
