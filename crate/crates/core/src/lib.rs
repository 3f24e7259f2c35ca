//! Exact interception probabilities and Stackelberg solves for the
//! uniformed-patroller game on star, line, circle, star-in-circle and
//! complete networks.
//!
//! The attacker waits at a node, counts the periods since the patroller
//! was last seen there, and attacks after `d` absences; an attack lasting
//! `m` periods is intercepted if the patroller comes back before it ends.
//! The patroller announces a symmetric Markov patrol and maximizes the
//! attacker's minimum over nodes and delays.

// `!(x <= tol)` is deliberate throughout: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod extensions;
pub mod format;
pub mod interception;
pub mod montecarlo;
pub mod networks;
pub mod stackelberg;
pub mod tables;
pub mod verify;

pub use dynamics::{
    away_sequence, away_step, hit_within, stationary_away, AwayDistribution, Stationary,
};
pub use error::{Error, Result};
pub use extensions::{
    memory_intercept, memory_solve, vision_intercept, vision_solve, Conditioning, ExtensionConfig,
    LeaveEdge, MemoryStarChain, VisionChain,
};
pub use interception::{
    best_response, intercept_prob, interception_curve, AttackPlan, InterceptionCurve,
};
pub use montecarlo::{
    simulate, simulate_extension, Extension, ExtensionResponse, SimConfig, SimEstimate,
};
pub use networks::{
    build_matrix, build_network, param_space, Family, Network, NodeClass, NodeId, ParamSpace,
    PatrolParams, TransitionMatrix,
};
pub use stackelberg::{solve, solve_star_in_circle, SolveConfig, SolveResult};
pub use tables::{reproduce_table, DefaultSolver, ReferenceData, TableReport, TableSolver};
