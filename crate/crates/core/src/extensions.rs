//! Two model variants solved on small three-state chains.
//!
//! The memory patroller on the star remembers whether he stayed at the center
//! last period (states `cc`, `ec`, `e`). The edge-vision attacker on E4 sees
//! which edge the patroller leaves by (states `C`, `A`, `O`).
//!
//! Both chains are stored as killed (sub-stochastic) matrices: the missing
//! mass of each row is the probability of stepping onto the attacked node,
//! which is also the m = 2 payoff from that state.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_vec_f64};
use crate::networks::{build_network, param_space, Family, ParamSpace, PARAM_TOL};
use crate::stackelberg::optimize::{maximize_min, OptimizeOptions, PieceFn, StartReport};
use crate::stackelberg::{solve_star_in_circle, star_optimum_m2, SolveConfig};

type Vec3 = [f64; 3];
type Mat3 = [[f64; 3]; 3];

/// Extension delay bound.
pub const DEFAULT_EXTENSION_D: usize = 10;

/// Payoffs within this distance of the value count as minimizing responses.
pub const RESPONSE_TIE_TOL: f64 = 1e-6;

/// How the away distribution is conditioned on the patroller not returning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// Each row renormalized by its own escape probability (the published matrices).
    #[default]
    PerState,
    /// Killed chain renormalized by the total surviving mass (the exact conditional law).
    Exact,
}

impl std::str::FromStr for Conditioning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-state" => Ok(Conditioning::PerState),
            "exact" => Ok(Conditioning::Exact),
            other => Err(Error::InvalidConfig(format!(
                "unknown conditioning `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct KilledChain {
    k: Mat3,
    /// Row deficits of `k`, kept exact rather than recomputed from row sums.
    pay: Vec3,
}

impl KilledChain {
    fn payoff(&self) -> Vec3 {
        self.pay
    }

    fn conditional(&self) -> Mat3 {
        let mut a = self.k;
        for row in a.iter_mut() {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|v| *v /= s);
            }
        }
        a
    }

    /// Away distributions x^1..x^d_max from `start`; shorter if the chain is absorbed.
    fn away(&self, start: Vec3, d_max: usize, mode: Conditioning) -> Vec<Vec3> {
        let a = self.conditional();
        let mut out = Vec::with_capacity(d_max);
        let mut x = start;
        for step in 1..=d_max {
            if step > 1 {
                x = match mode {
                    Conditioning::PerState => vec_mat(&x, &a),
                    Conditioning::Exact => {
                        let y = vec_mat(&x, &self.k);
                        let total: f64 = y.iter().sum();
                        if total <= 1e-15 {
                            break;
                        }
                        y.map(|v| v / total)
                    }
                };
            }
            out.push(x);
        }
        out
    }

    fn curve(&self, start: Vec3, d_max: usize, mode: Conditioning) -> Vec<f64> {
        let pay = self.payoff();
        self.away(start, d_max, mode)
            .iter()
            .map(|x| dot(x, &pay))
            .collect()
    }
}

fn vec_mat(x: &Vec3, a: &Mat3) -> Vec3 {
    let mut y = [0.0; 3];
    for (xi, row) in x.iter().zip(a) {
        for (yj, aij) in y.iter_mut().zip(row) {
            *yj += xi * aij;
        }
    }
    y
}

fn dot(x: &Vec3, y: &Vec3) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check_range(name: &str, v: f64, hi: f64) -> Result<f64> {
    if !v.is_finite() || v < -PARAM_TOL || v > hi + PARAM_TOL {
        return Err(Error::InvalidParams(format!(
            "{name}={v} outside [0, {hi}]"
        )));
    }
    Ok(v.clamp(0.0, hi))
}

/// Star patroller who remembers whether he was already at the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MemoryStarChain {
    pub n: usize,
    /// Center to each end after staying at the center.
    #[serde(serialize_with = "ser_f64")]
    pub p: f64,
    /// Center to each end right after arriving from an end.
    #[serde(serialize_with = "ser_f64")]
    pub s: f64,
    pub conditioning: Conditioning,
}

impl MemoryStarChain {
    pub fn new(n: usize, p: f64, s: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize {
                family: Family::Star,
                n,
                min: 2,
            });
        }
        let hi = 1.0 / n as f64;
        Ok(MemoryStarChain {
            n,
            p: check_range("p", p, hi)?,
            s: check_range("s", s, hi)?,
            conditioning: Conditioning::PerState,
        })
    }

    pub fn with_conditioning(mut self, conditioning: Conditioning) -> Self {
        self.conditioning = conditioning;
        self
    }

    fn killed(&self) -> KilledChain {
        let nf = self.n as f64;
        let (p, s) = (self.p, self.s);
        KilledChain {
            k: [
                [1.0 - nf * p, 0.0, (nf - 1.0) * p],
                [1.0 - nf * s, 0.0, (nf - 1.0) * s],
                [0.0, 1.0, 0.0],
            ],
            pay: [p, s, 0.0],
        }
    }

    /// Transition matrix over `cc, ec, e` given the patroller avoids the attacked end.
    pub fn matrix(&self) -> Mat3 {
        self.killed().conditional()
    }

    /// Away distributions over `cc, ec, e` for t = 1..=d_max.
    pub fn away(&self, d_max: usize) -> Vec<Vec3> {
        self.killed()
            .away([0.0, 1.0, 0.0], d_max, self.conditioning)
    }

    /// Interception probabilities for d = 1..=d_max.
    pub fn curve(&self, d_max: usize) -> Vec<f64> {
        self.killed()
            .curve([0.0, 1.0, 0.0], d_max, self.conditioning)
    }
}

/// Probability that an m = 2 attack `d` periods after the patroller leaves is intercepted.
pub fn memory_intercept(chain: &MemoryStarChain, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidPlan("delay must be at least 1".into()));
    }
    chain
        .curve(d)
        .get(d - 1)
        .copied()
        .ok_or(Error::UnreachableDelay { node: 0, delay: d })
}

/// Payoff of delay 2 on the three-end star.
pub fn memory_u2(p: f64, s: f64) -> f64 {
    p * (1.0 - 3.0 * s) / (1.0 - s)
}

/// Payoff of delay 3 on the three-end star.
pub fn memory_u3(p: f64, s: f64) -> f64 {
    p * (1.0 - 3.0 * p) * (1.0 - 3.0 * s) / ((1.0 - p) * (1.0 - s)) + 2.0 * s * s / (1.0 - s)
}

/// The `s` equalizing delays 2 and 3 for a given `p`.
pub fn memory_s_hat(p: f64) -> f64 {
    (-3.0 * p * p + (4.0 * p * p - 4.0 * p.powi(3) + 9.0 * p.powi(4)).sqrt()) / (2.0 * (1.0 - p))
}

/// Common value of delays 2 and 3 along `s = memory_s_hat(p)`.
pub fn memory_u(p: f64) -> f64 {
    let root = (4.0 - 4.0 * p + 9.0 * p * p).sqrt();
    p * (2.0 - 2.0 * p + 9.0 * p * p - 3.0 * p * root) / (2.0 - 2.0 * p + 3.0 * p * p - p * root)
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        }
    }
    0.5 * (lo + hi)
}

/// Settings shared by the extension solves.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionConfig {
    pub d_max: usize,
    pub conditioning: Conditioning,
    pub grid_resolution: usize,
    pub refine_tol: f64,
    pub multistart: usize,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        let opts = OptimizeOptions::default();
        ExtensionConfig {
            d_max: DEFAULT_EXTENSION_D,
            conditioning: Conditioning::PerState,
            grid_resolution: opts.grid_resolution,
            refine_tol: opts.refine_tol,
            multistart: opts.multistart,
        }
    }
}

impl ExtensionConfig {
    fn validate(&self) -> Result<()> {
        SolveConfig {
            d_max: self.d_max,
            grid_resolution: self.grid_resolution,
            refine_tol: self.refine_tol,
            multistart: self.multistart,
            ..SolveConfig::default()
        }
        .validate()
    }

    fn options(&self) -> OptimizeOptions {
        OptimizeOptions {
            grid_resolution: self.grid_resolution,
            refine_tol: self.refine_tol,
            multistart: self.multistart,
            ..OptimizeOptions::default()
        }
    }
}

fn minimizers(values: &[f64], value: f64) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= value + RESPONSE_TIE_TOL)
        .map(|(i, _)| i + 1)
        .collect()
}

fn min_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Optimum along the curve where delays 2 and 3 pay the same.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgebraicOptimum {
    #[serde(serialize_with = "ser_f64")]
    pub p: f64,
    #[serde(serialize_with = "ser_f64")]
    pub s: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Full min over delays at `(p, s)`; equals `value` when 2 and 3 really are the best responses.
    #[serde(serialize_with = "ser_f64")]
    pub min_over_delays: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemorySolution {
    pub extension: &'static str,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "D")]
    pub d_max: usize,
    pub conditioning: Conditioning,
    #[serde(serialize_with = "ser_f64")]
    pub p: f64,
    #[serde(serialize_with = "ser_f64")]
    pub s: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Delays paying within `RESPONSE_TIE_TOL` of the value.
    pub delays: Vec<usize>,
    /// Payoff of each delay 1..=D at the optimum.
    #[serde(serialize_with = "ser_vec_f64")]
    pub responses: Vec<f64>,
    /// Only computed for n = 3, where the closed forms apply.
    pub algebraic: Option<AlgebraicOptimum>,
    #[serde(serialize_with = "ser_f64")]
    pub memoryless_value: f64,
    /// Relative gain `value / memoryless_value - 1`.
    #[serde(serialize_with = "ser_f64")]
    pub gain: f64,
    pub evals: usize,
    pub stage: Vec<StartReport>,
}

/// Max-min over `(p, s) in [0, 1/n]^2` of the memory patroller's interception probability.
pub fn memory_solve(n: usize, config: &ExtensionConfig) -> Result<MemorySolution> {
    config.validate()?;
    MemoryStarChain::new(n, 0.0, 0.0)?;
    let hi = 1.0 / n as f64;
    let space = ParamSpace {
        family: Family::Star,
        n,
        names: vec!["p".into(), "s".into()],
        lower: vec![0.0; 2],
        upper: vec![hi; 2],
        constraints: Vec::new(),
        reflection: None,
    };
    let mode = config.conditioning;
    let d_max = config.d_max;
    let problem = |x: &[f64]| {
        let chain = MemoryStarChain::new(n, x[0], x[1])
            .ok()?
            .with_conditioning(mode);
        let c = chain.curve(d_max);
        (!c.is_empty()).then_some(c)
    };
    let outcome =
        maximize_min(&problem, &space, &config.options()).ok_or(Error::NoReachableAttack)?;
    let chain = MemoryStarChain::new(n, outcome.x[0], outcome.x[1])?.with_conditioning(mode);
    let responses = chain.curve(d_max);
    let value = min_of(&responses);

    let algebraic = (n == 3).then(|| {
        let p = golden_max(memory_u, 1e-9, 1.0 / 3.0, 1e-12);
        let s = memory_s_hat(p);
        AlgebraicOptimum {
            p,
            s,
            value: memory_u(p),
            min_over_delays: problem.objective(&[p, s]),
        }
    });
    let memoryless_value = star_optimum_m2(n).value;
    Ok(MemorySolution {
        extension: "memory-star",
        n,
        m: 2,
        d_max,
        conditioning: mode,
        p: chain.p,
        s: chain.s,
        value,
        delays: minimizers(&responses, value),
        responses,
        algebraic,
        memoryless_value,
        gain: value / memoryless_value - 1.0,
        evals: outcome.evals,
        stage: outcome.starts,
    })
}

/// The edge by which the patroller leaves the attacked end of E4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeaveEdge {
    Center,
    Adjacent,
}

impl LeaveEdge {
    fn start(self) -> Vec3 {
        match self {
            LeaveEdge::Center => [1.0, 0.0, 0.0],
            LeaveEdge::Adjacent => [0.0, 1.0, 0.0],
        }
    }
}

impl std::str::FromStr for LeaveEdge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" | "c" => Ok(LeaveEdge::Center),
            "adjacent" | "a" => Ok(LeaveEdge::Adjacent),
            other => Err(Error::InvalidConfig(format!(
                "unknown leaving edge `{other}`"
            ))),
        }
    }
}

/// E4 patrol seen from an attacked end: states center, adjacent end, opposite end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisionChain {
    /// End to each adjacent end.
    #[serde(serialize_with = "ser_f64")]
    pub p: f64,
    /// End to center.
    #[serde(serialize_with = "ser_f64")]
    pub q: f64,
    /// Center to each end.
    #[serde(serialize_with = "ser_f64")]
    pub r: f64,
    pub conditioning: Conditioning,
}

impl VisionChain {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self> {
        let p = check_range("p", p, 0.5)?;
        let q = check_range("q", q, 1.0)?;
        let r = check_range("r", r, 0.25)?;
        let excess = 2.0 * p + q - 1.0;
        if excess > PARAM_TOL {
            return Err(Error::InvalidParams(format!(
                "2p+q={} exceeds 1",
                2.0 * p + q
            )));
        }
        let q = if excess > 0.0 { q - excess } else { q };
        Ok(VisionChain {
            p,
            q,
            r,
            conditioning: Conditioning::PerState,
        })
    }

    pub fn with_conditioning(mut self, conditioning: Conditioning) -> Self {
        self.conditioning = conditioning;
        self
    }

    fn killed(&self) -> KilledChain {
        let (p, q, r) = (self.p, self.q, self.r);
        let a = (1.0 - 2.0 * p - q).max(0.0);
        let b = 1.0 - 4.0 * r;
        KilledChain {
            k: [[b, 2.0 * r, r], [q, a, p], [q, 2.0 * p, a]],
            pay: [r, p, 0.0],
        }
    }

    /// Transition matrix over `C, A, O` given the patroller avoids the attacked end.
    pub fn matrix(&self) -> Mat3 {
        self.killed().conditional()
    }

    /// m = 2 payoff of each state: `(r, p, 0)`.
    pub fn payoff(&self) -> Vec3 {
        self.killed().payoff()
    }

    pub fn curve(&self, edge: LeaveEdge, d_max: usize) -> Vec<f64> {
        self.killed().curve(edge.start(), d_max, self.conditioning)
    }
}

/// m = 2 interception probability of an end attack `d` periods after the patroller leaves by `edge`.
pub fn vision_intercept(chain: &VisionChain, edge: LeaveEdge, d: usize) -> Result<f64> {
    if d == 0 {
        return Err(Error::InvalidPlan("delay must be at least 1".into()));
    }
    chain
        .curve(edge, d)
        .get(d - 1)
        .copied()
        .ok_or(Error::UnreachableDelay { node: 0, delay: d })
}

/// Closed form of the center-edge payoff at d = 2.
pub fn vision_center_d2(p: f64, r: f64) -> f64 {
    r * (1.0 + 2.0 * p - 4.0 * r) / (1.0 - r)
}

/// Closed form of the adjacent-edge payoff at d = 2.
pub fn vision_adjacent_d2(p: f64, q: f64, r: f64) -> f64 {
    (p * (1.0 - q) + q * r - 2.0 * p * p) / (1.0 - p)
}

/// All attacker payoffs at `(p, q, r)`: adjacent delays, center delays, then the center attack.
fn vision_pieces(chain: &VisionChain, d_max: usize) -> Vec<f64> {
    let mut out = chain.curve(LeaveEdge::Adjacent, d_max);
    out.extend(chain.curve(LeaveEdge::Center, d_max));
    out.push(chain.q);
    out
}

/// Published figures for the vision optimum compared with our own evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisionReport {
    #[serde(serialize_with = "ser_vec_f64")]
    pub printed_params: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub printed_value: f64,
    /// Our max-min objective at the printed parameters.
    #[serde(serialize_with = "ser_f64")]
    pub value_at_printed: f64,
    /// Root of `1 - 4r + 2r^2` in `[0, 1]`.
    #[serde(serialize_with = "ser_f64")]
    pub foc_root: f64,
    /// `r(1 - 2r)/(1 - r)` at the root.
    #[serde(serialize_with = "ser_f64")]
    pub foc_value: f64,
    /// Largest admissible `r` on E4.
    #[serde(serialize_with = "ser_f64")]
    pub r_bound: f64,
    /// Min over delays of each leaving edge at the no-vision optimum `(0.2835, 0.1695, 0.25)`.
    #[serde(serialize_with = "ser_f64")]
    pub no_vision_adjacent: f64,
    #[serde(serialize_with = "ser_f64")]
    pub no_vision_center: f64,
    /// Printed approximations of the two values above.
    #[serde(serialize_with = "ser_vec_f64")]
    pub printed_no_vision_responses: Vec<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisionSolution {
    pub extension: &'static str,
    pub m: usize,
    #[serde(rename = "D")]
    pub d_max: usize,
    pub conditioning: Conditioning,
    #[serde(serialize_with = "ser_f64")]
    pub p: f64,
    /// Smallest `q` attaining the value at the optimal `(p, r)`.
    #[serde(serialize_with = "ser_f64")]
    pub q: f64,
    #[serde(serialize_with = "ser_f64")]
    pub r: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Range of `q` over which the value is unchanged.
    #[serde(serialize_with = "ser_vec_f64")]
    pub q_interval: Vec<f64>,
    pub d_adjacent: usize,
    pub d_center: usize,
    #[serde(serialize_with = "ser_vec_f64")]
    pub adjacent: Vec<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub center: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub center_attack: f64,
    /// The m = 2 E4 value without edge vision.
    #[serde(serialize_with = "ser_f64")]
    pub no_vision_value: f64,
    pub report: VisionReport,
    pub evals: usize,
    pub stage: Vec<StartReport>,
}

/// Value loss tolerated when widening the flat interval in `q`.
pub const FLAT_TOL: f64 = 1e-9;

/// Smallest delay paying within `RESPONSE_TIE_TOL` of the curve's minimum.
fn argmin(values: &[f64]) -> usize {
    let v = min_of(values);
    values
        .iter()
        .position(|&x| x <= v + RESPONSE_TIE_TOL)
        .unwrap_or(0)
        + 1
}

/// Max-min of the E4 patrol against an attacker who sees the leaving edge (m = 2).
pub fn vision_solve(config: &ExtensionConfig) -> Result<VisionSolution> {
    config.validate()?;
    let network = build_network(Family::StarInCircle, 4)?;
    let space = param_space(&network);
    let mode = config.conditioning;
    let d_max = config.d_max;
    let objective = |p: f64, q: f64, r: f64| -> f64 {
        VisionChain::new(p, q, r)
            .map(|c| min_of(&vision_pieces(&c.with_conditioning(mode), d_max)))
            .unwrap_or(f64::NEG_INFINITY)
    };
    let problem = |x: &[f64]| {
        let chain = VisionChain::new(x[0], x[1], x[2])
            .ok()?
            .with_conditioning(mode);
        Some(vision_pieces(&chain, d_max))
    };
    let outcome =
        maximize_min(&problem, &space, &config.options()).ok_or(Error::NoReachableAttack)?;
    let (p, q_found, r) = (outcome.x[0], outcome.x[1], outcome.x[2]);
    let target = outcome.value - FLAT_TOL;
    let q_max = (1.0 - 2.0 * p).max(0.0);
    let attains = |q: f64| objective(p, q, r) >= target;
    let edge = |mut inside: f64, mut outside: f64| {
        for _ in 0..100 {
            let mid = 0.5 * (inside + outside);
            if attains(mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let q_lo = if attains(0.0) {
        0.0
    } else {
        edge(q_found, 0.0)
    };
    let q_hi = if attains(q_max) {
        q_max
    } else {
        edge(q_found, q_max)
    };

    let chain = VisionChain::new(p, q_lo, r)?.with_conditioning(mode);
    let adjacent = chain.curve(LeaveEdge::Adjacent, d_max);
    let center = chain.curve(LeaveEdge::Center, d_max);
    let value = min_of(&vision_pieces(&chain, d_max));

    let no_vision = solve_star_in_circle(
        &network,
        2,
        &SolveConfig {
            d_max,
            ..SolveConfig::default()
        },
    )?;
    let report = vision_report(mode, d_max, value, objective(0.25, 1.0 / 6.0, 0.25));
    Ok(VisionSolution {
        extension: "vision-e4",
        m: 2,
        d_max,
        conditioning: mode,
        p,
        q: chain.q,
        r,
        value,
        q_interval: vec![q_lo, q_hi],
        d_adjacent: argmin(&adjacent),
        d_center: argmin(&center),
        adjacent,
        center,
        center_attack: chain.q,
        no_vision_value: no_vision.result.value,
        report,
        evals: outcome.evals,
        stage: outcome.starts,
    })
}

fn vision_report(
    mode: Conditioning,
    d_max: usize,
    value: f64,
    value_at_printed: f64,
) -> VisionReport {
    let foc_root = 1.0 - 1.0 / 2f64.sqrt();
    let foc_value = foc_root * (1.0 - 2.0 * foc_root) / (1.0 - foc_root);
    let old = VisionChain::new(0.2835, 0.1695, 0.25)
        .expect("feasible")
        .with_conditioning(mode);
    let no_vision_adjacent = min_of(&old.curve(LeaveEdge::Adjacent, d_max));
    let no_vision_center = min_of(&old.curve(LeaveEdge::Center, d_max));
    let printed = [0.18, 0.13];
    let mut notes = vec![format!(
        "f(r) = r(1-2r)/(1-r) peaks at r = 1-1/sqrt(2) = {foc_root:.6} with f = {foc_value:.6}, \
         but r <= 1/4 on E4, so the bound binds and f(1/4) = 1/6"
    )];
    if (value - 1.0 / 6.0).abs() > 1e-6 {
        notes.push(format!(
            "computed value {value:.6} differs from the printed 1/6"
        ));
    }
    if (no_vision_adjacent - printed[0]).abs() > 0.005
        || (no_vision_center - printed[1]).abs() > 0.005
    {
        notes.push(format!(
            "at (0.2835, 0.1695, 0.25) the adjacent/center minima are {no_vision_adjacent:.4}/{no_vision_center:.4}, \
             printed as about {}/{}",
            printed[0], printed[1]
        ));
    }
    VisionReport {
        printed_params: vec![0.25, 1.0 / 6.0, 0.25],
        printed_value: 1.0 / 6.0,
        value_at_printed,
        foc_root,
        foc_value,
        r_bound: 0.25,
        no_vision_adjacent,
        no_vision_center,
        printed_no_vision_responses: printed.to_vec(),
        notes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interception::{intercept_prob, AttackPlan};
    use crate::networks::{build_matrix, PatrolParams};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn round3(x: f64) -> f64 {
        (x * 1000.0).round() / 1000.0
    }

    #[test]
    fn printed_payoff_sequences() {
        let a = MemoryStarChain::new(3, 0.30, 0.21).unwrap().curve(10);
        let b = MemoryStarChain::new(3, 0.30, 0.22).unwrap().curve(10);
        let pa = [
            0.21, 0.141, 0.132, 0.162, 0.139, 0.149, 0.148, 0.145, 0.148, 0.147,
        ];
        let pb = [
            0.22, 0.131, 0.143, 0.159, 0.142, 0.152, 0.148, 0.148, 0.149, 0.148,
        ];
        for d in 0..10 {
            assert_eq!(round3(a[d]), pa[d], "(0.30,0.21) d={}", d + 1);
            assert_eq!(round3(b[d]), pb[d], "(0.30,0.22) d={}", d + 1);
        }
    }

    #[test]
    fn first_payoff_is_s() {
        for mode in [Conditioning::PerState, Conditioning::Exact] {
            let c = MemoryStarChain::new(3, 0.2, 0.17)
                .unwrap()
                .with_conditioning(mode);
            assert_eq!(memory_intercept(&c, 1).unwrap(), 0.17);
        }
        let c = MemoryStarChain::new(3, 0.2, 0.17).unwrap();
        assert!(memory_intercept(&c, 0).is_err());
    }

    #[test]
    fn u2_u3_on_a_lattice() {
        for i in 0..50 {
            let p = (i % 10) as f64 / 9.0 / 3.0;
            let s = (i / 10) as f64 / 4.0 / 3.0 * 0.999;
            let c = MemoryStarChain::new(3, p, s).unwrap();
            assert_abs_diff_eq!(
                memory_intercept(&c, 2).unwrap(),
                memory_u2(p, s),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                memory_intercept(&c, 3).unwrap(),
                memory_u3(p, s),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn s_hat_equalizes() {
        for k in 1..=20 {
            let p = k as f64 / 21.0 / 3.0;
            let s = memory_s_hat(p);
            assert_abs_diff_eq!(memory_u2(p, s), memory_u3(p, s), epsilon = 1e-10);
            assert_abs_diff_eq!(memory_u(p), memory_u2(p, s), epsilon = 1e-10);
        }
    }

    #[test]
    fn per_state_matrix_rows() {
        let c = MemoryStarChain::new(3, 0.3, 0.2).unwrap();
        let a = c.matrix();
        assert_abs_diff_eq!(a[0][0], 0.1 / 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(a[1][2], 0.4 / 0.8, epsilon = 1e-15);
        assert_eq!(a[2], [0.0, 1.0, 0.0]);
        for row in a {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        assert!(MemoryStarChain::new(3, 0.34, 0.2).is_err());
        assert!(MemoryStarChain::new(1, 0.1, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn collapsed_memory_is_the_memoryless_star(n in 2usize..7, u in 0.05f64..1.0) {
            let p = u / n as f64;
            let chain = MemoryStarChain::new(n, p, p).unwrap().with_conditioning(Conditioning::Exact);
            let net = build_network(Family::Star, n).unwrap();
            let t = build_matrix(&net, &PatrolParams::Star { p, s: 1.0 }).unwrap();
            let curve = chain.curve(10);
            for d in 1..=10 {
                let plan = AttackPlan::new(0, d, 2).unwrap();
                prop_assert!((curve[d - 1] - intercept_prob(&t, &plan).unwrap()).abs() < 1e-12);
            }
        }

        #[test]
        fn vision_closed_forms(p in 0.0f64..0.5, qf in 0.0f64..1.0, r in 0.0f64..0.25) {
            let q = qf * (1.0 - 2.0 * p);
            for mode in [Conditioning::PerState, Conditioning::Exact] {
                let c = VisionChain::new(p, q, r).unwrap().with_conditioning(mode);
                prop_assert!((vision_intercept(&c, LeaveEdge::Center, 2).unwrap() - vision_center_d2(p, r)).abs() < 1e-12);
                prop_assert!((vision_intercept(&c, LeaveEdge::Adjacent, 2).unwrap() - vision_adjacent_d2(p, q, r)).abs() < 1e-12);
                prop_assert_eq!(vision_intercept(&c, LeaveEdge::Center, 1).unwrap(), r);
                prop_assert_eq!(vision_intercept(&c, LeaveEdge::Adjacent, 1).unwrap(), p);
            }
        }
    }

    #[test]
    fn vision_matrix_and_payoff() {
        let c = VisionChain::new(0.25, 0.2, 0.25).unwrap();
        let m = c.matrix();
        assert_abs_diff_eq!(m[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[1][0], 0.2 / 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m[2][1], 0.5, epsilon = 1e-15);
        for row in m {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        }
        let pay = c.payoff();
        assert_abs_diff_eq!(pay[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(pay[1], 0.25, epsilon = 1e-15);
        assert_eq!(pay[2], 0.0);
        assert!(VisionChain::new(0.3, 0.5, 0.2).is_err());
        assert!(VisionChain::new(0.2, 0.2, 0.3).is_err());
    }

    #[test]
    fn vision_printed_point() {
        let c = VisionChain::new(0.25, 1.0 / 6.0, 0.25).unwrap();
        assert_abs_diff_eq!(
            vision_intercept(&c, LeaveEdge::Center, 2).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            vision_intercept(&c, LeaveEdge::Adjacent, 2).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn memory_solve_three_ends() {
        let sol = memory_solve(3, &ExtensionConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.p, 0.305, epsilon = 3e-3);
        assert_abs_diff_eq!(sol.s, 0.217, epsilon = 3e-3);
        assert_abs_diff_eq!(sol.value, 0.136, epsilon = 3e-3);
        assert!(
            sol.delays.contains(&2) && sol.delays.contains(&3),
            "{:?}",
            sol.delays
        );
        let alg = sol.algebraic.unwrap();
        assert_abs_diff_eq!(alg.value, sol.value, epsilon = 1e-6);
        assert_abs_diff_eq!(alg.min_over_delays, alg.value, epsilon = 1e-9);
        // 0.136 / 0.101 rounds to a 34-35% gain
        assert!(sol.gain > 0.33 && sol.gain < 0.36, "{}", sol.gain);
    }

    #[test]
    fn vision_solve_reaches_one_sixth() {
        let sol = vision_solve(&ExtensionConfig::default()).unwrap();
        assert_abs_diff_eq!(sol.value, 1.0 / 6.0, epsilon = 1e-6);
        assert_abs_diff_eq!(sol.p, 0.25, epsilon = 1e-3);
        assert_abs_diff_eq!(sol.r, 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.q, 1.0 / 6.0, epsilon = 1e-6);
        assert!(sol.q_interval[1] > 0.49);
        assert_eq!((sol.d_adjacent, sol.d_center), (2, 2));
        assert!(sol.value <= sol.no_vision_value + 1e-9);
        assert!(!sol.report.notes.is_empty());
        assert_abs_diff_eq!(sol.report.value_at_printed, 1.0 / 6.0, epsilon = 1e-12);
    }
}
