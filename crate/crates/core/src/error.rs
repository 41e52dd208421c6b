use thiserror::Error;

use crate::state::{InteractionMode, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{field} out of range: {value} not in [0, 1]")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("invalid state: {0}")]
    InvalidState(Violation),

    #[error("numeric domain error: {0}")]
    NumericDomain(String),

    #[error("invalid step index {0}: steps are numbered from 1")]
    InvalidStep(usize),

    #[error("schedule conflict: {0}")]
    ScheduleConflict(String),

    #[error("initial state representation does not match {mode} mode")]
    ModeMismatch { mode: InteractionMode },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("unsupported mode for sampling: {0}")]
    UnsupportedMode(InteractionMode),

    #[error("length mismatch: estimate has {estimate} steps, analytic curve has {analytic}")]
    LengthMismatch { estimate: usize, analytic: usize },

    #[error("degenerate initial weight {0}: pure states never reach the mixed target")]
    DegenerateInitial(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
