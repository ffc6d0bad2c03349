use thiserror::Error;

use crate::grid::Cell;

#[derive(Debug, Error)]
pub enum AgrError {
    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("goal {goal} is unreachable from {from}")]
    UnreachableGoal { from: Cell, goal: Cell },

    #[error("goal set must contain at least two distinct free cells")]
    EmptyGoalSet,

    #[error("invalid goal set: {0}")]
    InvalidGoals(String),

    #[error("observation contradicts the whole belief (normalizer {0:e})")]
    DegenerateObservation(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("instance generation failed after {attempts} attempts: {reason}")]
    GenerationFailure { attempts: usize, reason: String },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<AgrError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, AgrError>;
