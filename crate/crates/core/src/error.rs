use thiserror::Error;

use crate::networks::Family;

/// Errors produced by network construction, chain evaluation and solving.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{family} needs n >= {min}, got {n}")]
    InvalidSize {
        family: Family,
        n: usize,
        min: usize,
    },

    #[error("invalid patrol parameters: {0}")]
    InvalidParams(String),

    #[error("invalid transition matrix: {0}")]
    InvalidMatrix(String),

    #[error("parameters for {actual} cannot drive a {expected} network")]
    FamilyMismatch { expected: Family, actual: Family },

    #[error("unknown node `{0}`")]
    InvalidNode(String),

    #[error("away chain absorbed at t={t}: the patroller returns with certainty")]
    AwayChainAbsorbed { t: usize },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("delay {delay} is unreachable at node {node}")]
    UnreachableDelay { node: usize, delay: usize },

    #[error("attack duration m={0} is not valid here")]
    InvalidDuration(usize),

    #[error("invalid attack plan: {0}")]
    InvalidPlan(String),

    #[error("no node in the selection has a reachable delay")]
    NoReachableAttack,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
