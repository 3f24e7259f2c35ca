//! The patroller's max-min problem over a family's parameter space.

pub mod optimize;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_opt_f64};
use crate::interception::{
    best_response, closed_center, curve_values, interception_curve, InterceptionCurve,
};
use crate::networks::{
    build_matrix, param_space, Family, NamedParams, Network, NodeId, ParamSpace, PatrolParams,
};
use optimize::{maximize_min, OptimizeOptions, PieceFn, StartReport};

/// Largest value loss accepted when snapping the reflection probability to 1.
pub const REFLECTION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Largest delay the attacker may choose.
    pub d_max: usize,
    pub grid_resolution: usize,
    pub refine_tol: f64,
    pub multistart: usize,
    /// Pin the leaf reflection probability (`s` or `kappa`) to 1.
    pub fix_reflection: bool,
    pub max_lattice_points: usize,
    /// Attack nodes considered; `None` means one per symmetry class.
    pub nodes: Option<Vec<NodeId>>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let opts = OptimizeOptions::default();
        SolveConfig {
            d_max: 15,
            grid_resolution: opts.grid_resolution,
            refine_tol: opts.refine_tol,
            multistart: opts.multistart,
            fix_reflection: false,
            max_lattice_points: opts.max_lattice_points,
            nodes: None,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_max < 1 {
            return Err(Error::InvalidConfig(
                "delay bound must be at least 1".into(),
            ));
        }
        if self.grid_resolution < 3 {
            return Err(Error::InvalidConfig(format!(
                "grid resolution must be at least 3, got {}",
                self.grid_resolution
            )));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "refine tolerance must be positive".into(),
            ));
        }
        if self.multistart < 1 {
            return Err(Error::InvalidConfig(
                "need at least one refinement start".into(),
            ));
        }
        Ok(())
    }

    fn options(&self) -> OptimizeOptions {
        OptimizeOptions {
            grid_resolution: self.grid_resolution,
            refine_tol: self.refine_tol,
            multistart: self.multistart,
            max_lattice_points: self.max_lattice_points,
            ..OptimizeOptions::default()
        }
    }
}

/// Per-node minimum of the delay curve at the solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeMinimum {
    pub node: NodeId,
    pub label: String,
    pub delay: usize,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub evals: usize,
    pub lattice_points: usize,
    pub lattice_resolution: usize,
    pub stage: Vec<StartReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    pub d_max: usize,
    pub params: PatrolParams,
    pub attacker_node: NodeId,
    pub attacker_label: String,
    pub attacker_delay: usize,
    pub value: f64,
    pub limit_value: Option<f64>,
    pub delay_curve: InterceptionCurve,
    /// All (node, delay) pairs tied with the value.
    pub ties: Vec<(NodeId, usize)>,
    pub node_minima: Vec<NodeMinimum>,
    pub diagnostics: Diagnostics,
}

#[derive(Serialize)]
struct AttackerDoc<'a> {
    node: &'a str,
    delay: usize,
}

#[derive(Serialize)]
struct SolveDoc<'a> {
    family: Family,
    n: usize,
    m: usize,
    #[serde(rename = "D")]
    d_max: usize,
    params: NamedParams,
    attacker: AttackerDoc<'a>,
    #[serde(serialize_with = "ser_f64")]
    value: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    limit_value: Option<f64>,
    delay_curve: &'a [crate::interception::CurvePoint],
    node_minima: &'a [NodeMinimum],
    diagnostics: &'a Diagnostics,
}

impl Serialize for SolveResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SolveDoc {
            family: self.family,
            n: self.n,
            m: self.m,
            d_max: self.d_max,
            params: NamedParams(self.params.named()),
            attacker: AttackerDoc {
                node: &self.attacker_label,
                delay: self.attacker_delay,
            },
            value: self.value,
            limit_value: self.limit_value,
            delay_curve: &self.delay_curve.points,
            node_minima: &self.node_minima,
            diagnostics: &self.diagnostics,
        }
        .serialize(s)
    }
}

/// The space the solver searches: the family space, optionally with reflection pinned to 1.
pub fn search_space(network: &Network, fix_reflection: bool) -> ParamSpace {
    let mut space = param_space(network);
    if fix_reflection {
        if let Some(i) = space.reflection {
            space.fix(i, 1.0);
        }
    }
    space
}

/// Attacker payoffs at parameter vector `x`: every reachable (node, delay) value.
///
/// `None` when the patrol is not irreducible (it never reaches some node) or no delay is reachable.
pub fn attacker_pieces(
    network: &Network,
    x: &[f64],
    m: usize,
    d_max: usize,
    nodes: &[NodeId],
) -> Option<Vec<f64>> {
    let params = PatrolParams::from_vec(network, x).ok()?;
    let t = build_matrix(network, &params).ok()?;
    if !t.is_irreducible() {
        return None;
    }
    let mut out = Vec::with_capacity(nodes.len() * d_max);
    for &node in nodes {
        out.extend(curve_values(&t, node, m, d_max));
    }
    (!out.is_empty()).then_some(out)
}

/// Maximizes the minimum interception probability over the attack nodes and delays.
pub fn solve(network: &Network, m: usize, config: &SolveConfig) -> Result<SolveResult> {
    if m < 2 {
        return Err(Error::InvalidDuration(m));
    }
    config.validate()?;
    let nodes = match &config.nodes {
        Some(v) => {
            if let Some(&bad) = v.iter().find(|&&i| i >= network.len()) {
                return Err(Error::InvalidNode(format!("index {bad}")));
            }
            v.clone()
        }
        None => network.representatives(),
    };
    let space = search_space(network, config.fix_reflection);
    let problem = |x: &[f64]| attacker_pieces(network, x, m, config.d_max, &nodes);
    let outcome =
        maximize_min(&problem, &space, &config.options()).ok_or(Error::NoReachableAttack)?;
    let mut x = outcome.x.clone();
    // The value is often flat in the reflection probability; among optimal
    // patrols report the fully reflecting one when it loses nothing.
    if let Some(i) = space
        .reflection
        .filter(|&i| space.upper[i] > space.lower[i])
    {
        let mut reflected = x.clone();
        reflected[i] = 1.0;
        if problem.objective(&reflected) >= outcome.value - REFLECTION_SLACK {
            x = reflected;
        }
    }
    let params = PatrolParams::from_vec(network, &x)?;
    evaluate_at(
        network,
        &params,
        m,
        config.d_max,
        &nodes,
        Diagnostics {
            evals: outcome.evals,
            lattice_points: outcome.lattice_points,
            lattice_resolution: outcome.lattice_resolution,
            stage: outcome.starts,
        },
    )
}

/// Re-derives the attacker's best response, curves and limit at fixed parameters.
pub fn evaluate_at(
    network: &Network,
    params: &PatrolParams,
    m: usize,
    d_max: usize,
    nodes: &[NodeId],
    diagnostics: Diagnostics,
) -> Result<SolveResult> {
    let t = build_matrix(network, params)?;
    let br = best_response(network, &t, m, d_max, Some(nodes))?;
    let node_minima = nodes
        .iter()
        .filter_map(|&node| {
            let curve = interception_curve(&t, node, m, d_max).ok()?;
            let (delay, value) = curve.min()?;
            Some(NodeMinimum {
                node,
                label: network.label(node),
                delay,
                value,
            })
        })
        .collect();
    let delay_curve = interception_curve(&t, br.node, m, d_max)?;
    Ok(SolveResult {
        family: network.family(),
        n: network.n(),
        m,
        d_max,
        params: params.clone(),
        attacker_node: br.node,
        attacker_label: network.label(br.node),
        attacker_delay: br.delay,
        value: br.value,
        limit_value: delay_curve.limit,
        delay_curve,
        ties: br.ties,
        node_minima,
        diagnostics,
    })
}

/// Star-in-circle solve with the end/center indifference report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarInCircleResult {
    #[serde(flatten)]
    pub result: SolveResult,
    #[serde(serialize_with = "ser_f64")]
    pub end_value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub center_value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub indifference_gap: f64,
}

pub fn solve_star_in_circle(
    network: &Network,
    m: usize,
    config: &SolveConfig,
) -> Result<StarInCircleResult> {
    if network.family() != Family::StarInCircle {
        return Err(Error::FamilyMismatch {
            expected: Family::StarInCircle,
            actual: network.family(),
        });
    }
    let result = solve(network, m, config)?;
    let PatrolParams::StarInCircle { q, .. } = result.params else {
        unreachable!("family checked above");
    };
    let end_value = result
        .node_minima
        .iter()
        .find(|nm| nm.node == 0)
        .map(|nm| nm.value)
        .ok_or(Error::NoReachableAttack)?;
    let center_value = closed_center(q, m);
    Ok(StarInCircleResult {
        indifference_gap: (end_value - center_value).abs(),
        result,
        end_value,
        center_value,
    })
}

/// Closed-form star optimum for m = 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StarOptimum {
    #[serde(serialize_with = "ser_f64")]
    pub p: f64,
    #[serde(serialize_with = "ser_f64")]
    pub r: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
}

pub fn star_optimum_m2(n: usize) -> StarOptimum {
    let nf = n as f64;
    let root = (nf * (nf - 1.0)).sqrt();
    StarOptimum {
        p: 1.0 - root / nf,
        r: root - (nf - 1.0),
        value: 2.0 * nf - 1.0 - 2.0 * root,
    }
}

/// `4r^3 - 6r^2 + 6r - 1`, whose root in `[0, 1]` is the limiting stay probability.
pub fn asymptote_cubic(r: f64) -> f64 {
    4.0 * r.powi(3) - 6.0 * r * r + 6.0 * r - 1.0
}

/// `(1 - r)(1 + 2r - r^2 + r^3)`, the limit of `n V(n)` at stay probability `r`.
pub fn asymptote_scale(r: f64) -> f64 {
    (1.0 - r) * (1.0 + 2.0 * r - r * r + r.powi(3))
}

/// Large-`n` star behavior at m = 4: returns `(r_inf, a)` with `n V(n) -> a`.
pub fn star_asymptote_m4() -> (f64, f64) {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if asymptote_cubic(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    (r, asymptote_scale(r))
}

/// Free-reflection solve compared with reflection pinned to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflectionReport {
    pub family: Family,
    pub n: usize,
    pub m: usize,
    #[serde(serialize_with = "ser_f64")]
    pub reflection: f64,
    #[serde(serialize_with = "ser_f64")]
    pub free_value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub fixed_value: f64,
    /// `free_value - fixed_value`.
    #[serde(serialize_with = "ser_f64")]
    pub gap: f64,
}

pub fn verify_conjecture_reflection(
    network: &Network,
    m: usize,
    config: &SolveConfig,
) -> Result<ReflectionReport> {
    if network.leaves().is_empty() {
        return Err(Error::InvalidConfig(format!(
            "{} has no leaf nodes to reflect at",
            network.family()
        )));
    }
    let free = solve(
        network,
        m,
        &SolveConfig {
            fix_reflection: false,
            ..config.clone()
        },
    )?;
    let fixed = solve(
        network,
        m,
        &SolveConfig {
            fix_reflection: true,
            ..config.clone()
        },
    )?;
    Ok(ReflectionReport {
        family: network.family(),
        n: network.n(),
        m,
        reflection: free.params.reflection().unwrap_or(f64::NAN),
        free_value: free.value,
        fixed_value: fixed.value,
        gap: free.value - fixed.value,
    })
}
