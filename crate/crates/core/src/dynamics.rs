//! The patroller's away distribution and absorbing-chain hitting probabilities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::ser_vec_f64;
use crate::networks::{NodeId, TransitionMatrix};

/// Return probabilities at or above `1 - ABSORB_TOL` end the away chain.
pub const ABSORB_TOL: f64 = 1e-15;

/// One-step change above this separates a genuine period-2 cycle from slow convergence.
const CYCLE_GAP: f64 = 1e-8;

/// Location law after `t` periods away from `attack_node`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AwayDistribution {
    pub t: usize,
    #[serde(serialize_with = "ser_vec_f64")]
    pub probs: Vec<f64>,
    pub attack_node: NodeId,
}

impl AwayDistribution {
    /// The point mass at `attack_node` (t = 0).
    pub fn start(size: usize, attack_node: NodeId) -> Self {
        let mut probs = vec![0.0; size];
        probs[attack_node] = 1.0;
        AwayDistribution {
            t: 0,
            probs,
            attack_node,
        }
    }
}

/// Result of [`away_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct AwayStep {
    pub next: AwayDistribution,
    /// Probability that the patroller returns to the attack node this period.
    pub return_prob: f64,
}

/// Advances the away distribution by one period.
///
/// The surviving mass is renormalized by its own sum, which equals `1 - y[node]`
/// for exact input but does not amplify round-off over long horizons.
pub fn away_step(x: &AwayDistribution, t: &TransitionMatrix) -> Result<AwayStep> {
    let mut y = vec![0.0; t.size()];
    t.mul_left(&x.probs, &mut y);
    let node = x.attack_node;
    let return_prob = y[node];
    y[node] = 0.0;
    let survive: f64 = y.iter().sum();
    if return_prob >= 1.0 - ABSORB_TOL || survive <= ABSORB_TOL {
        return Err(Error::AwayChainAbsorbed { t: x.t + 1 });
    }
    for v in &mut y {
        *v /= survive;
    }
    Ok(AwayStep {
        next: AwayDistribution {
            t: x.t + 1,
            probs: y,
            attack_node: node,
        },
        return_prob,
    })
}

/// `x^(1), …, x^(d_max)`, cut short if the chain absorbs.
#[derive(Debug, Clone, PartialEq)]
pub struct AwaySequence {
    pub steps: Vec<AwayDistribution>,
    pub return_probs: Vec<f64>,
    /// First `t` that cannot be reached, if the chain absorbed before `d_max`.
    pub absorbed_at: Option<usize>,
}

impl AwaySequence {
    pub fn is_truncated(&self) -> bool {
        self.absorbed_at.is_some()
    }
}

pub fn away_sequence(t: &TransitionMatrix, attack_node: NodeId, d_max: usize) -> AwaySequence {
    let mut x = AwayDistribution::start(t.size(), attack_node);
    let mut steps = Vec::with_capacity(d_max);
    let mut return_probs = Vec::with_capacity(d_max);
    let mut absorbed_at = None;
    for _ in 0..d_max {
        match away_step(&x, t) {
            Ok(step) => {
                return_probs.push(step.return_prob);
                steps.push(step.next.clone());
                x = step.next;
            }
            Err(Error::AwayChainAbsorbed { t }) => {
                absorbed_at = Some(t);
                break;
            }
            Err(e) => unreachable!("away_step only fails by absorption: {e}"),
        }
    }
    AwaySequence {
        steps,
        return_probs,
        absorbed_at,
    }
}

/// Long-run behavior of the away chain.
#[derive(Debug, Clone, PartialEq)]
pub enum Stationary {
    /// A fixed point of the away map.
    Fixed {
        x: AwayDistribution,
        iterations: usize,
        residual: f64,
    },
    /// A period-2 orbit `x -> y -> x`, as on a star under reflection.
    Cycle {
        pair: [AwayDistribution; 2],
        iterations: usize,
        residual: f64,
    },
}

impl Stationary {
    /// The distributions visited in the limit (one or two).
    pub fn states(&self) -> Vec<&AwayDistribution> {
        match self {
            Stationary::Fixed { x, .. } => vec![x],
            Stationary::Cycle { pair, .. } => pair.iter().collect(),
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            Stationary::Fixed { residual, .. } | Stationary::Cycle { residual, .. } => *residual,
        }
    }
}

pub const DEFAULT_STATIONARY_TOL: f64 = 1e-12;
pub const DEFAULT_STATIONARY_MAX_ITER: usize = 1_000_000;

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Iterates the away map from `x^(1)` until it settles on a fixed point or a 2-cycle.
pub fn stationary_away(
    t: &TransitionMatrix,
    attack_node: NodeId,
    tol: f64,
    max_iter: usize,
) -> Result<Stationary> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mut prev: Option<AwayDistribution> = None;
    let mut cur = away_step(&AwayDistribution::start(t.size(), attack_node), t)?.next;
    let mut residual = f64::INFINITY;
    for iteration in 1..=max_iter {
        let next = away_step(&cur, t)?.next;
        residual = sup_dist(&next.probs, &cur.probs);
        if residual < tol {
            return Ok(Stationary::Fixed {
                x: next,
                iterations: iteration,
                residual,
            });
        }
        if let Some(p) = &prev {
            let two_step = sup_dist(&next.probs, &p.probs);
            if two_step < tol && residual >= CYCLE_GAP {
                return Ok(Stationary::Cycle {
                    pair: [cur, next],
                    iterations: iteration,
                    residual: two_step,
                });
            }
        }
        prev = Some(cur);
        cur = next;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Probability that the chain started from `x` visits `target` within `steps` transitions.
///
/// Forward evaluation: `target` is made absorbing and the mass entering it is accumulated.
pub fn hit_within(x: &[f64], t: &TransitionMatrix, target: NodeId, steps: usize) -> f64 {
    let mut hit = x[target];
    let mut v = x.to_vec();
    v[target] = 0.0;
    let mut next = vec![0.0; v.len()];
    for _ in 0..steps {
        t.mul_left(&v, &mut next);
        hit += next[target];
        next[target] = 0.0;
        std::mem::swap(&mut v, &mut next);
    }
    hit.clamp(0.0, 1.0)
}

/// `h[i]` = probability of visiting `target` within `steps` transitions from `i`.
///
/// Backward evaluation; `hit_within(x, …) == x · h`.
pub fn hit_vector(t: &TransitionMatrix, target: NodeId, steps: usize) -> Vec<f64> {
    let mut h = vec![0.0; t.size()];
    h[target] = 1.0;
    let mut next = vec![0.0; t.size()];
    for _ in 0..steps {
        t.mul_right(&h, &mut next);
        next[target] = 1.0;
        std::mem::swap(&mut h, &mut next);
    }
    h
}
