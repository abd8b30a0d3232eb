use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(String, String),
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("edge endpoint `{0}` is not a declared node")]
    UnknownEndpoint(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("invalid params: {0}")]
    InvalidParams(String),
    #[error("profile does not match graph: {0}")]
    ProfileMismatch(String),
    #[error("edge states do not add up: {0}")]
    StateMismatch(String),
    #[error("welfare is zero, quotient undefined")]
    ZeroWelfare,
    #[error("profile is not a Nash equilibrium")]
    NotAnEquilibrium,
    #[error("H_Lambda state has {0} C-edges, expected none")]
    InvalidLambdaState(Rational),
    #[error("counting bounds are undefined when gamma equals beta or alpha")]
    DegenerateRatio,
    #[error("gamma equals beta: no C-edge construction exists, worst ratio is {ratio}")]
    PerfectCompatibility { ratio: Rational },
    #[error("realized instance failed verification: {0}")]
    InternalRealizationFailure(String),
    #[error("edge state is zero")]
    ZeroState,
    #[error("graph has {nodes} nodes, enumeration cap is {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
