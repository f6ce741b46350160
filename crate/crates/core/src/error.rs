use thiserror::Error;

use crate::model::{AgentId, Pair, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),

    #[error("agent {0} appears more than once in a ranked list")]
    DuplicateEntry(AgentId),

    #[error("ranked list contains an empty tier")]
    EmptyTier,

    #[error("matching is not an involution: {x} -> {y} but {y} -> {back}")]
    NotInvolutive {
        x: AgentId,
        y: AgentId,
        back: AgentId,
    },

    #[error("matching does not cover agent {0}")]
    MissingAgent(AgentId),

    #[error("invalid k-matching: {0} is not mutually acceptable")]
    InvalidKMatching(Pair),

    #[error("matching pairs the forbidden pair {0}")]
    ForbiddenPair(Pair),

    #[error("lists overlap on agent {0}")]
    Overlap(AgentId),

    #[error("agent {0} has no profile or weight list")]
    MissingProfile(AgentId),

    #[error("cannot truncate the list of {0}: it contains ties")]
    TiesInTruncation(AgentId),

    #[error("at least two agents are required, got {0}")]
    TooFewAgents(usize),

    #[error("lists contain no entries")]
    NoEntries,

    #[error("instance has {n} agents, brute force is limited to {bound}")]
    TooLarge { n: usize, bound: usize },

    #[error("invalid generator parameters: {0}")]
    InvalidSpec(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(ValidationReport),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
