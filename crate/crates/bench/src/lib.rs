//! Shared fixtures for the criterion benchmarks.

use patrol_core::{build_matrix, build_network, Family, Network, PatrolParams, TransitionMatrix};

/// A network with the patrol given in parameter order.
pub fn fixture(family: Family, n: usize, params: &[f64]) -> (Network, TransitionMatrix) {
    let net = build_network(family, n).expect("benchmark network");
    let p = PatrolParams::from_vec(&net, params).expect("benchmark params");
    let t = build_matrix(&net, &p).expect("benchmark matrix");
    (net, t)
}
