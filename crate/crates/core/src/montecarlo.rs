//! Simulation of the attacker's counting strategy against a sampled patrol.
//!
//! Trials are grouped in batches of [`BATCH`]. Each batch owns a ChaCha8
//! stream (`seed`, stream = batch index) and a single patrol walk: after the
//! burn-in the trials run back to back on that walk. A trial begins at the
//! first departure from the attacked node after the previous trial ended, so
//! by the strong Markov property trials are independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extensions::{Conditioning, LeaveEdge, MemoryStarChain, VisionChain};
use crate::format::ser_f64;
use crate::interception::AttackPlan;
use crate::networks::{
    build_matrix, build_network, Family, NodeId, PatrolParams, TransitionMatrix,
};

/// Trials per RNG stream.
pub const BATCH: u64 = 10_000;

pub const RNG_NAME: &str = "ChaCha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub burn_in: usize,
    /// Periods a single trial may take before it is abandoned as truncated.
    pub max_periods: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            trials: 1_000_000,
            seed: 0,
            burn_in: 1000,
            max_periods: 100_000,
        }
    }
}

impl SimConfig {
    fn validate(&self, delay: usize, m: usize) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("need at least one trial".into()));
        }
        if self.max_periods < self.burn_in + delay + m {
            return Err(Error::InvalidConfig(format!(
                "max_periods {} is below burn_in + delay + m = {}",
                self.max_periods,
                self.burn_in + delay + m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    #[serde(serialize_with = "ser_f64")]
    pub p_hat: f64,
    #[serde(serialize_with = "ser_f64")]
    pub stderr: f64,
    /// Completed trials.
    pub trials: u64,
    pub truncated: u64,
    pub seed: u64,
    pub rng: &'static str,
}

impl SimEstimate {
    /// `|p_hat - value|` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = (self.p_hat - value).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn truncation_rate(&self) -> f64 {
        let total = self.trials + self.truncated;
        if total == 0 {
            0.0
        } else {
            self.truncated as f64 / total as f64
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct WalkState {
    node: NodeId,
    prev: NodeId,
}

trait Walk: Sync {
    fn size(&self) -> usize;
    fn step(&self, s: WalkState, rng: &mut ChaCha8Rng) -> WalkState;
}

struct MarkovWalk<'a>(&'a TransitionMatrix);

impl Walk for MarkovWalk<'_> {
    fn size(&self) -> usize {
        self.0.size()
    }

    fn step(&self, s: WalkState, rng: &mut ChaCha8Rng) -> WalkState {
        let row = self.0.nonzeros(s.node);
        let mut u: f64 = rng.random();
        let mut next = row.last().map_or(s.node, |&(j, _)| j);
        for &(j, w) in row {
            if u < w {
                next = j;
                break;
            }
            u -= w;
        }
        WalkState {
            node: next,
            prev: s.node,
        }
    }
}

/// Star walk whose center behavior depends on the previous period; ends `0..n`, center `n`.
struct MemoryWalk {
    n: usize,
    p: f64,
    s: f64,
}

impl Walk for MemoryWalk {
    fn size(&self) -> usize {
        self.n + 1
    }

    fn step(&self, st: WalkState, rng: &mut ChaCha8Rng) -> WalkState {
        let center = self.n;
        let next = if st.node == center {
            let each = if st.prev == center { self.p } else { self.s };
            let u: f64 = rng.random();
            let k = if each > 0.0 {
                (u / each) as usize
            } else {
                self.n
            };
            if k < self.n {
                k
            } else {
                center
            }
        } else {
            center
        };
        WalkState {
            node: next,
            prev: st.node,
        }
    }
}

/// Which departures from the attacked node start the attacker's count.
#[derive(Debug, Clone, Copy)]
enum Arming {
    Any,
    /// Only departures whose first step lands on (`true`) or off (`false`) this node.
    Via(NodeId, bool),
}

impl Arming {
    fn accepts(self, next: NodeId) -> bool {
        match self {
            Arming::Any => true,
            Arming::Via(c, to) => (next == c) == to,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    intercepted: u64,
    completed: u64,
    truncated: u64,
}

#[allow(clippy::too_many_arguments)]
fn run_batch<W: Walk>(
    walk: &W,
    target: NodeId,
    delay: usize,
    m: usize,
    arming: Arming,
    config: &SimConfig,
    batch: u64,
    trials: u64,
) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(batch);
    let start = rng.random_range(0..walk.size());
    let mut s = WalkState {
        node: start,
        prev: start,
    };
    let phase = rng.random_range(0..2usize);
    for _ in 0..config.burn_in + phase {
        s = walk.step(s, &mut rng);
    }
    let mut tally = Tally::default();
    for _ in 0..trials {
        let mut armed = false;
        let mut count = 0usize;
        let mut periods = 0usize;
        let mut done = false;
        while periods < config.max_periods {
            let next = walk.step(s, &mut rng);
            periods += 1;
            if next.node == target {
                armed = false;
                count = 0;
            } else {
                if s.node == target {
                    armed = arming.accepts(next.node);
                    count = 0;
                }
                if armed {
                    count += 1;
                }
            }
            s = next;
            if armed && count == delay {
                let mut hit = false;
                for _ in 1..m {
                    s = walk.step(s, &mut rng);
                    hit |= s.node == target;
                }
                tally.completed += 1;
                tally.intercepted += u64::from(hit);
                done = true;
                break;
            }
        }
        if !done {
            tally.truncated += 1;
        }
    }
    tally
}

fn run<W: Walk>(
    walk: &W,
    target: NodeId,
    delay: usize,
    m: usize,
    arming: Arming,
    config: &SimConfig,
) -> Result<SimEstimate> {
    config.validate(delay, m)?;
    if target >= walk.size() {
        return Err(Error::InvalidNode(format!("index {target}")));
    }
    let batches = config.trials.div_ceil(BATCH);
    let total = (0..batches)
        .into_par_iter()
        .map(|b| {
            let n = BATCH.min(config.trials - b * BATCH);
            run_batch(walk, target, delay, m, arming, config, b, n)
        })
        .reduce(Tally::default, |a, b| Tally {
            intercepted: a.intercepted + b.intercepted,
            completed: a.completed + b.completed,
            truncated: a.truncated + b.truncated,
        });
    let (p_hat, stderr) = if total.completed > 0 {
        let p = total.intercepted as f64 / total.completed as f64;
        (p, (p * (1.0 - p) / total.completed as f64).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SimEstimate {
        p_hat,
        stderr,
        trials: total.completed,
        truncated: total.truncated,
        seed: config.seed,
        rng: RNG_NAME,
    })
}

/// Estimates the interception probability of `plan` against the patrol `t`.
pub fn simulate(
    t: &TransitionMatrix,
    plan: &AttackPlan,
    config: &SimConfig,
) -> Result<SimEstimate> {
    run(
        &MarkovWalk(t),
        plan.node,
        plan.delay,
        plan.duration,
        Arming::Any,
        config,
    )
}

/// A model variant to simulate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extension {
    MemoryStar(MemoryStarChain),
    VisionE4(VisionChain),
}

/// The attacker's move in an extension scenario (all m = 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionResponse {
    /// Attack an end after `d` periods of absence, whatever the leaving edge.
    Delay(usize),
    /// Start counting only after the patroller leaves by `edge`.
    Leave { edge: LeaveEdge, delay: usize },
    /// Attack the E4 center as soon as the patroller has left it.
    CenterAttack,
}

pub fn simulate_extension(
    ext: &Extension,
    response: &ExtensionResponse,
    config: &SimConfig,
) -> Result<SimEstimate> {
    match (ext, *response) {
        (Extension::MemoryStar(c), ExtensionResponse::Delay(d)) => {
            check_delay(d)?;
            let walk = MemoryWalk {
                n: c.n,
                p: c.p,
                s: c.s,
            };
            run(&walk, 0, d, 2, Arming::Any, config)
        }
        (Extension::MemoryStar(_), other) => Err(Error::InvalidPlan(format!(
            "{other:?} is not a memory-star response"
        ))),
        (Extension::VisionE4(c), response) => {
            let net = build_network(Family::StarInCircle, 4)?;
            let t = build_matrix(
                &net,
                &PatrolParams::StarInCircle {
                    p: c.p,
                    q: c.q,
                    r: c.r,
                },
            )?;
            let center = net.center().expect("E4 has a center");
            let walk = MarkovWalk(&t);
            match response {
                ExtensionResponse::Delay(d) => {
                    check_delay(d)?;
                    run(&walk, 0, d, 2, Arming::Any, config)
                }
                ExtensionResponse::Leave { edge, delay } => {
                    check_delay(delay)?;
                    let arming = Arming::Via(center, edge == LeaveEdge::Center);
                    run(&walk, 0, delay, 2, arming, config)
                }
                ExtensionResponse::CenterAttack => run(&walk, center, 1, 2, Arming::Any, config),
            }
        }
    }
}

fn check_delay(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidPlan("delay must be at least 1".into()));
    }
    Ok(())
}

/// The exact analytic value of an extension scenario, for comparison with simulation.
///
/// Uses exact conditioning, since the simulation samples the true dynamics.
pub fn extension_exact(ext: &Extension, response: &ExtensionResponse) -> Result<f64> {
    use crate::extensions::{memory_intercept, vision_intercept};
    match (ext, *response) {
        (Extension::MemoryStar(c), ExtensionResponse::Delay(d)) => {
            memory_intercept(&c.with_conditioning(Conditioning::Exact), d)
        }
        (Extension::VisionE4(c), ExtensionResponse::Leave { edge, delay }) => {
            vision_intercept(&c.with_conditioning(Conditioning::Exact), edge, delay)
        }
        (Extension::VisionE4(c), ExtensionResponse::CenterAttack) => Ok(c.q),
        (Extension::VisionE4(c), ExtensionResponse::Delay(d)) => {
            let net = build_network(Family::StarInCircle, 4)?;
            let t = build_matrix(
                &net,
                &PatrolParams::StarInCircle {
                    p: c.p,
                    q: c.q,
                    r: c.r,
                },
            )?;
            crate::interception::intercept_prob(&t, &AttackPlan::new(0, d, 2)?)
        }
        (Extension::MemoryStar(_), other) => Err(Error::InvalidPlan(format!(
            "{other:?} is not a memory-star response"
        ))),
    }
}
