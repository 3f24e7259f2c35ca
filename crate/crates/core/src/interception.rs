//! Interception probabilities, delay curves, attacker best responses and closed forms.

use serde::Serialize;

use crate::dynamics::{
    away_step, hit_vector, hit_within, stationary_away, AwayDistribution, Stationary,
    DEFAULT_STATIONARY_MAX_ITER, DEFAULT_STATIONARY_TOL,
};
use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_opt_f64, sig17};
use crate::networks::{Network, NodeId, TransitionMatrix};

/// Interception values closer than this are treated as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Attack `node` once the patroller has been away `delay` periods; the attack lasts `duration`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AttackPlan {
    pub node: NodeId,
    pub delay: usize,
    pub duration: usize,
}

impl AttackPlan {
    pub fn new(node: NodeId, delay: usize, duration: usize) -> Result<Self> {
        if delay < 1 {
            return Err(Error::InvalidPlan("delay must be at least 1".into()));
        }
        check_duration(duration)?;
        Ok(AttackPlan {
            node,
            delay,
            duration,
        })
    }
}

fn check_duration(m: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidDuration(m));
    }
    Ok(())
}

fn check_node(t: &TransitionMatrix, node: NodeId) -> Result<()> {
    if node >= t.size() {
        return Err(Error::InvalidNode(format!("index {node}")));
    }
    Ok(())
}

/// Probability that `plan` is intercepted under `t`.
pub fn intercept_prob(t: &TransitionMatrix, plan: &AttackPlan) -> Result<f64> {
    check_node(t, plan.node)?;
    let mut x = AwayDistribution::start(t.size(), plan.node);
    for _ in 0..plan.delay {
        x = away_step(&x, t)
            .map_err(|_| Error::UnreachableDelay {
                node: plan.node,
                delay: plan.delay,
            })?
            .next;
    }
    Ok(hit_within(&x.probs, t, plan.node, plan.duration - 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub d: usize,
    /// NaN when the delay is unreachable.
    #[serde(serialize_with = "ser_f64")]
    pub pi: f64,
    pub reachable: bool,
}

/// How the curve's limit was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitKind {
    FixedPoint,
    /// Minimum over a period-2 orbit of the away chain.
    TwoCycle,
    /// The away chain absorbs, so no long-delay attack exists.
    Absorbed,
    NotConverged,
}

/// Interception probability against delay for one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterceptionCurve {
    pub node: NodeId,
    pub m: usize,
    pub points: Vec<CurvePoint>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub limit: Option<f64>,
    pub limit_kind: LimitKind,
}

impl InterceptionCurve {
    /// Smallest reachable value and the smallest delay attaining it within [`TIE_TOL`].
    pub fn min(&self) -> Option<(usize, f64)> {
        let best = self
            .points
            .iter()
            .filter(|p| p.reachable)
            .map(|p| p.pi)
            .fold(f64::INFINITY, f64::min);
        self.points
            .iter()
            .find(|p| p.reachable && p.pi <= best + TIE_TOL)
            .map(|p| (p.d, p.pi))
    }

    /// Every reachable delay within [`TIE_TOL`] of the minimum.
    pub fn minimizers(&self) -> Vec<usize> {
        match self.min() {
            None => Vec::new(),
            Some((_, v)) => self
                .points
                .iter()
                .filter(|p| p.reachable && p.pi <= v + TIE_TOL)
                .map(|p| p.d)
                .collect(),
        }
    }

    pub fn value_at(&self, d: usize) -> Option<f64> {
        self.points
            .get(d.checked_sub(1)?)
            .filter(|p| p.reachable)
            .map(|p| p.pi)
    }

    /// CSV with header `d,pi,reachable` and a final `inf` row holding the limit.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d,pi,reachable\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.d, sig17(p.pi), p.reachable));
        }
        let limit = self.limit.map(sig17).unwrap_or_else(|| "nan".into());
        out.push_str(&format!("inf,{},{}\n", limit, self.limit.is_some()));
        out
    }
}

/// Delay values only, without the limit; the inner loop of the solver.
pub fn curve_values(t: &TransitionMatrix, node: NodeId, m: usize, d_max: usize) -> Vec<f64> {
    let h = hit_vector(t, node, m - 1);
    let mut out = Vec::with_capacity(d_max);
    let mut x = AwayDistribution::start(t.size(), node);
    for _ in 0..d_max {
        match away_step(&x, t) {
            Ok(step) => {
                x = step.next;
                out.push(dot(&x.probs, &h).clamp(0.0, 1.0));
            }
            Err(_) => break,
        }
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Curve for `d = 1..=d_max` plus the long-delay limit.
pub fn interception_curve(
    t: &TransitionMatrix,
    node: NodeId,
    m: usize,
    d_max: usize,
) -> Result<InterceptionCurve> {
    check_duration(m)?;
    check_node(t, node)?;
    if d_max < 1 {
        return Err(Error::InvalidConfig(
            "delay bound must be at least 1".into(),
        ));
    }
    let values = curve_values(t, node, m, d_max);
    let points = (1..=d_max)
        .map(|d| match values.get(d - 1) {
            Some(&pi) => CurvePoint {
                d,
                pi,
                reachable: true,
            },
            None => CurvePoint {
                d,
                pi: f64::NAN,
                reachable: false,
            },
        })
        .collect();
    let h = hit_vector(t, node, m - 1);
    let (limit, limit_kind) =
        match stationary_away(t, node, DEFAULT_STATIONARY_TOL, DEFAULT_STATIONARY_MAX_ITER) {
            Ok(st @ Stationary::Fixed { .. }) => {
                (Some(dot(&st.states()[0].probs, &h)), LimitKind::FixedPoint)
            }
            Ok(st @ Stationary::Cycle { .. }) => {
                let v = st
                    .states()
                    .iter()
                    .map(|x| dot(&x.probs, &h))
                    .fold(f64::INFINITY, f64::min);
                (Some(v), LimitKind::TwoCycle)
            }
            Err(Error::AwayChainAbsorbed { .. }) => (None, LimitKind::Absorbed),
            Err(_) => (None, LimitKind::NotConverged),
        };
    Ok(InterceptionCurve {
        node,
        m,
        points,
        limit: limit.map(|v| v.clamp(0.0, 1.0)),
        limit_kind,
    })
}

/// The attacker's best (node, delay) against a fixed patrol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BestResponse {
    pub node: NodeId,
    pub delay: usize,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Every (node, delay) within [`TIE_TOL`] of the value.
    pub ties: Vec<(NodeId, usize)>,
}

/// Minimizes interception over `nodes` (default: one per symmetry class) and `d = 1..=d_max`.
///
/// Ties go to the smallest delay, then the smallest node.
pub fn best_response(
    network: &Network,
    t: &TransitionMatrix,
    m: usize,
    d_max: usize,
    nodes: Option<&[NodeId]>,
) -> Result<BestResponse> {
    check_duration(m)?;
    let reps = network.representatives();
    let nodes = nodes.unwrap_or(&reps);
    let mut all = Vec::new();
    for &node in nodes {
        check_node(t, node)?;
        for (k, v) in curve_values(t, node, m, d_max).into_iter().enumerate() {
            all.push((node, k + 1, v));
        }
    }
    let best = all.iter().map(|a| a.2).fold(f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::NoReachableAttack);
    }
    let mut ties: Vec<(NodeId, usize)> = all
        .iter()
        .filter(|a| a.2 <= best + TIE_TOL)
        .map(|a| (a.0, a.1))
        .collect();
    ties.sort_by_key(|&(node, d)| (d, node));
    let (node, delay) = ties[0];
    let value = all
        .iter()
        .find(|a| a.0 == node && a.1 == delay)
        .map(|a| a.2)
        .expect("tie comes from the list");
    Ok(BestResponse {
        node,
        delay,
        value,
        ties,
    })
}

/// Star, m = 2, reflection s = 1, delay 2: `(1 - n p) p / (1 - p)`.
pub fn closed_star_m2(n: usize, p: f64) -> f64 {
    (1.0 - n as f64 * p) * p / (1.0 - p)
}

/// Star under the random walk, odd `m`: `1 - ((n-1)/n)^((m-1)/2)`.
pub fn closed_star_odd(n: usize, m: usize) -> Result<f64> {
    if m < 3 || m % 2 == 0 {
        return Err(Error::InvalidDuration(m));
    }
    let nf = n as f64;
    Ok(1.0 - ((nf - 1.0) / nf).powi(((m - 1) / 2) as i32))
}

/// Star, m = 4, s = 1, evaluated at delay 2 with `r = 1 - n p`.
pub fn closed_star_m4(n: usize, p: f64) -> f64 {
    let r = 1.0 - n as f64 * p;
    p / (1.0 - p) * (2.0 * r - p - 2.0 * p * r - r * r + r * r * r + 1.0)
}

/// Complete graph under the random walk: `1 - ((n-2)/(n-1))^(m-1)`.
pub fn closed_complete(n: usize, m: usize) -> f64 {
    let nf = n as f64;
    1.0 - ((nf - 2.0) / (nf - 1.0)).powi((m - 1) as i32)
}

/// Star-in-circle center attack: `1 - (1-q)^(m-1)`.
pub fn closed_center(q: f64, m: usize) -> f64 {
    1.0 - (1.0 - q).powi((m - 1) as i32)
}
