//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of validation, parsing, model evaluation, and
/// MDP/IRL construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("timestamps are not non-decreasing at event {index} (t={timestamp} after t={previous})")]
    NonMonotoneTimestamps {
        index: usize,
        previous: f64,
        timestamp: f64,
    },

    #[error("event {index} is self-directed (actor {actor} to itself)")]
    SelfDirectedEvent { index: usize, actor: usize },

    #[error("event {index} mixes timestamped and untimestamped events in one history")]
    MixedTimestampPresence { index: usize },

    #[error("end time {end_time} precedes the last event timestamp {last_timestamp}")]
    EndTimeBeforeLastEvent { end_time: f64, last_timestamp: f64 },

    #[error("the permissibility mask removes every action")]
    EmptyActionSpace,

    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: usize, reason: String },

    #[error("unknown column `{column}` in header")]
    UnknownColumn { column: String },

    #[error("input contains no header row")]
    EmptyFile,

    #[error("covariate index {index} out of range for dimension {dim}")]
    CovariateDimensionMismatch { index: usize, dim: usize },

    #[error("event {index} is not a member of the action space")]
    EventOutsideActionSpace { index: usize },

    #[error("timestamped likelihood requires timestamps on every event")]
    MissingTimestamps,

    #[error("timestamped likelihood requires an observation end time")]
    MissingEndTime,

    #[error("statistic {index} is constant across all candidates at every step; its coefficient is unidentifiable")]
    DegenerateStatistic { index: usize },

    #[error("history contains no events")]
    EmptyHistory,

    #[error("event {index} (actor {sender} to actor {receiver}) is not classifiable under the ego scheme")]
    UnclassifiableEvent {
        index: usize,
        sender: usize,
        receiver: usize,
    },

    #[error("state {state}, action {action} has no observed transitions and smoothing is zero")]
    UnobservedStateAction { state: usize, action: usize },

    #[error("window length {k} over {n_actions} actions yields {states} states, above the cap of {cap}")]
    StateSpaceTooLarge {
        k: usize,
        n_actions: usize,
        states: usize,
        cap: usize,
    },

    #[error("no demonstration trajectories supplied")]
    EmptyDemonstrations,

    #[error("realized state {state} at step {step} is not in that step's candidate set")]
    RealizedStateNotInCandidates { step: usize, state: usize },

    #[error("transition row for action {action}, state {state} sums to {sum}, not 1")]
    NonStochasticRow { action: usize, state: usize, sum: f64 },

    #[error("unknown statistic spec `{spec}`")]
    UnknownStatistic { spec: String },

    #[error("unknown actor label `{label}`")]
    UnknownActor { label: String },
}

impl Error {
    /// Stable machine-readable name, used in structured CLI error output.
    pub fn name(&self) -> &'static str {
        match self {
            Error::NonMonotoneTimestamps { .. } => "NonMonotoneTimestamps",
            Error::SelfDirectedEvent { .. } => "SelfDirectedEvent",
            Error::MixedTimestampPresence { .. } => "MixedTimestampPresence",
            Error::EndTimeBeforeLastEvent { .. } => "EndTimeBeforeLastEvent",
            Error::EmptyActionSpace => "EmptyActionSpace",
            Error::MalformedRow { .. } => "MalformedRow",
            Error::UnknownColumn { .. } => "UnknownColumn",
            Error::EmptyFile => "EmptyFile",
            Error::CovariateDimensionMismatch { .. } => "CovariateDimensionMismatch",
            Error::EventOutsideActionSpace { .. } => "EventOutsideActionSpace",
            Error::MissingTimestamps => "MissingTimestamps",
            Error::MissingEndTime => "MissingEndTime",
            Error::DegenerateStatistic { .. } => "DegenerateStatistic",
            Error::EmptyHistory => "EmptyHistory",
            Error::UnclassifiableEvent { .. } => "UnclassifiableEvent",
            Error::UnobservedStateAction { .. } => "UnobservedStateAction",
            Error::StateSpaceTooLarge { .. } => "StateSpaceTooLarge",
            Error::EmptyDemonstrations => "EmptyDemonstrations",
            Error::RealizedStateNotInCandidates { .. } => "RealizedStateNotInCandidates",
            Error::NonStochasticRow { .. } => "NonStochasticRow",
            Error::UnknownStatistic { .. } => "UnknownStatistic",
            Error::UnknownActor { .. } => "UnknownActor",
        }
    }
}
