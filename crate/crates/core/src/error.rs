use alloc::string::String;

use thiserror::Error;

use crate::model::ProcessId;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised when inputs to the library are malformed.
///
/// Property violations found by the checkers (disagreement, failed limits,
/// missing witnesses) are reported through their own result types instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("process count must be between 1 and {max}, got {got}")]
    ProcessCount { got: usize, max: usize },
    #[error("process {0} is out of range")]
    ProcessOutOfRange(ProcessId),
    #[error("graph is missing the self-loop of process {0}")]
    MissingSelfLoop(ProcessId),
    #[error("graphs disagree on the process count ({expected} vs {got})")]
    MixedProcessCount { expected: usize, got: usize },
    #[error("a lasso pattern needs a non-empty loop")]
    EmptyLoop,
    #[error("malformed pattern literal {literal:?}: {reason}")]
    PatternLiteral { literal: String, reason: String },
    #[error("pattern is not admissible for the {model} adversary: {reason}")]
    Inadmissible { model: &'static str, reason: String },
    #[error("value set must be non-empty and duplicate free")]
    ValueSet,
    #[error("value {0} is not a member of the value set")]
    UnknownValue(i64),
    #[error("input assignment has {got} entries for {expected} processes")]
    InputLength { expected: usize, got: usize },
    #[error("rounds are 1-indexed; round 0 has no communication graph")]
    RoundZero,
    #[error("malformed asynchronous schedule at event {index}: {reason}")]
    Schedule { index: usize, reason: String },
    #[error("schedule violates the fair-lossy window W={window}: process {receiver} took {window} steps without hearing from {sender} (event {index})")]
    Fairness {
        window: u32,
        receiver: ProcessId,
        sender: ProcessId,
        index: usize,
    },
    #[error("invalid cut-off function: {0}")]
    Cutoff(String),
    #[error("unknown algorithm id {0:?}")]
    UnknownAlgorithm(String),
    #[error("executions must share the process count and timing model")]
    IncomparableExecutions,
    #[error("{0}")]
    Precondition(String),
}
