//! The five network families and their symmetry-respecting patrols.
//!
//! Node ordering is canonical: Line, Circle and Complete use `1..n`; Star and
//! StarInCircle list the ends `1..n` first and the center last. Internally a
//! node is its index into that ordering.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::Sig17;

/// Tolerance for accepting a probability slightly outside `[0, 1]` before clamping.
pub const PARAM_TOL: f64 = 1e-12;

/// Index of a node in the canonical ordering of its network.
pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Star,
    Line,
    Circle,
    StarInCircle,
    Complete,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Star,
        Family::Line,
        Family::Circle,
        Family::StarInCircle,
        Family::Complete,
    ];

    pub fn min_size(self) -> usize {
        match self {
            Family::Star => 2,
            _ => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Star => "star",
            Family::Line => "line",
            Family::Circle => "circle",
            Family::StarInCircle => "star-in-circle",
            Family::Complete => "complete",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "star" | "s" => Ok(Family::Star),
            "line" | "l" => Ok(Family::Line),
            "circle" | "c" => Ok(Family::Circle),
            "star-in-circle" | "starincircle" | "e" => Ok(Family::StarInCircle),
            "complete" | "k" => Ok(Family::Complete),
            other => Err(format!(
                "unknown family `{other}` (expected star, line, circle, star-in-circle or complete)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeClass {
    End,
    Internal,
    Center,
}

/// A member of one of the five families.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    family: Family,
    n: usize,
    classes: Vec<NodeClass>,
    adjacency: Vec<Vec<NodeId>>,
}

/// Builds `family` at size `n`.
pub fn build_network(family: Family, n: usize) -> Result<Network> {
    let min = family.min_size();
    if n < min {
        return Err(Error::InvalidSize { family, n, min });
    }
    let (classes, edges): (Vec<NodeClass>, Vec<(usize, usize)>) = match family {
        Family::Star => {
            let mut classes = vec![NodeClass::End; n];
            classes.push(NodeClass::Center);
            (classes, (0..n).map(|e| (e, n)).collect())
        }
        Family::Line => {
            let classes = (0..n)
                .map(|i| {
                    if i == 0 || i == n - 1 {
                        NodeClass::End
                    } else if n % 2 == 1 && i == n / 2 {
                        NodeClass::Center
                    } else {
                        NodeClass::Internal
                    }
                })
                .collect();
            (classes, (0..n - 1).map(|i| (i, i + 1)).collect())
        }
        Family::Circle => (
            vec![NodeClass::Internal; n],
            (0..n).map(|i| (i, (i + 1) % n)).collect(),
        ),
        Family::StarInCircle => {
            let mut classes = vec![NodeClass::End; n];
            classes.push(NodeClass::Center);
            let ring = (0..n).map(|i| (i, (i + 1) % n));
            (classes, ring.chain((0..n).map(|e| (e, n))).collect())
        }
        Family::Complete => (
            vec![NodeClass::Internal; n],
            (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
                .collect(),
        ),
    };
    let mut adjacency = vec![Vec::new(); classes.len()];
    for (a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    for nbrs in &mut adjacency {
        nbrs.sort_unstable();
        nbrs.dedup();
    }
    Ok(Network {
        family,
        n,
        classes,
        adjacency,
    })
}

impl Network {
    pub fn family(&self) -> Family {
        self.family
    }

    /// The family size parameter (ends for Star/StarInCircle, nodes otherwise).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class(&self, node: NodeId) -> NodeClass {
        self.classes[node]
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node]
    }

    pub fn is_adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn center(&self) -> Option<NodeId> {
        self.classes.iter().position(|c| *c == NodeClass::Center)
    }

    /// Degree-one nodes.
    pub fn leaves(&self) -> Vec<NodeId> {
        (0..self.len())
            .filter(|&i| self.adjacency[i].len() == 1)
            .collect()
    }

    /// Display label: `1..n` for ordinary nodes, `c` for a Star/StarInCircle center.
    pub fn label(&self, node: NodeId) -> String {
        match self.family {
            Family::Star | Family::StarInCircle if node == self.n => "c".to_owned(),
            _ => (node + 1).to_string(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }

    /// Parses a node label (`1..n`, or `c`/`center` where the family has one).
    pub fn node_by_label(&self, label: &str) -> Result<NodeId> {
        let trimmed = label.trim();
        if matches!(trimmed, "c" | "center") {
            if let Family::Star | Family::StarInCircle = self.family {
                return Ok(self.n);
            }
        }
        match trimmed.parse::<usize>() {
            Ok(k) if k >= 1 && k <= self.len() && self.label(k - 1) == trimmed => Ok(k - 1),
            _ => Err(Error::InvalidNode(label.to_owned())),
        }
    }

    /// One node per symmetry class, in canonical order.
    pub fn representatives(&self) -> Vec<NodeId> {
        match self.family {
            Family::Line => (0..self.n.div_ceil(2)).collect(),
            Family::Circle | Family::Complete => vec![0],
            Family::Star | Family::StarInCircle => vec![0, self.n],
        }
    }

    /// Generators of the automorphism group, as maps `i -> perm[i]`.
    pub fn automorphism_generators(&self) -> Vec<Vec<NodeId>> {
        let size = self.len();
        let identity: Vec<NodeId> = (0..size).collect();
        let transposition = |a: usize, b: usize| {
            let mut p = identity.clone();
            p.swap(a, b);
            p
        };
        let n = self.n;
        match self.family {
            Family::Star => (0..n - 1).map(|i| transposition(i, i + 1)).collect(),
            Family::Complete => (0..n - 1).map(|i| transposition(i, i + 1)).collect(),
            Family::Line => vec![(0..n).rev().collect()],
            Family::Circle | Family::StarInCircle => {
                let mut rotate = identity.clone();
                let mut reflect = identity.clone();
                for i in 0..n {
                    rotate[i] = (i + 1) % n;
                    reflect[i] = (n - i) % n;
                }
                vec![rotate, reflect]
            }
        }
    }

    /// The full automorphism group generated by [`Self::automorphism_generators`].
    pub fn automorphism_group(&self) -> Vec<Vec<NodeId>> {
        let identity: Vec<NodeId> = (0..self.len()).collect();
        let generators = self.automorphism_generators();
        let mut seen: HashSet<Vec<NodeId>> = HashSet::from([identity.clone()]);
        let mut queue = VecDeque::from([identity]);
        let mut group = Vec::new();
        while let Some(g) = queue.pop_front() {
            for h in &generators {
                let composed: Vec<NodeId> = g.iter().map(|&i| h[i]).collect();
                if seen.insert(composed.clone()) {
                    queue.push_back(composed);
                }
            }
            group.push(g);
        }
        group
    }

    /// Whether `perm` maps edges to edges.
    pub fn is_automorphism(&self, perm: &[NodeId]) -> bool {
        perm.len() == self.len()
            && (0..self.len()).all(|a| {
                self.adjacency[a]
                    .iter()
                    .all(|&b| self.is_adjacent(perm[a], perm[b]))
            })
    }
}

/// A linear inequality `sum coeff * x[index] <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub bound: f64,
}

impl LinearConstraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(i, c)| c * x[i]).sum()
    }
}

/// Dimension, box bounds and linear constraints of a family's parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamSpace {
    pub family: Family,
    pub n: usize,
    pub names: Vec<String>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub constraints: Vec<LinearConstraint>,
    /// Coordinate of the leaf reflection probability (`s` or `kappa`), if any.
    pub reflection: Option<usize>,
}

/// The parameter space of `network`'s family.
pub fn param_space(network: &Network) -> ParamSpace {
    let n = network.n();
    let nf = n as f64;
    let mut names = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut constraints = Vec::new();
    let mut reflection = None;
    let mut push = |name: &str, hi: f64| {
        names.push(name.to_owned());
        lower.push(0.0);
        upper.push(hi);
        names.len() - 1
    };
    match network.family() {
        Family::Star => {
            push("p", 1.0 / nf);
            reflection = Some(push("s", 1.0));
        }
        Family::Line => {
            let pairs = line_pair_count(n);
            for j in 0..pairs {
                let (pn, qn) = line_pair_names(pairs, j);
                let pi = push(&pn, 1.0);
                let qi = push(&qn, 1.0);
                constraints.push(LinearConstraint {
                    terms: vec![(pi, 1.0), (qi, 1.0)],
                    bound: 1.0,
                });
            }
            if n % 2 == 1 {
                push("c", 0.5);
            }
            reflection = Some(push("kappa", 1.0));
        }
        Family::Circle => {
            push("p", 0.5);
        }
        Family::StarInCircle => {
            let pi = push("p", 0.5);
            let qi = push("q", 1.0);
            push("r", 1.0 / nf);
            constraints.push(LinearConstraint {
                terms: vec![(pi, 2.0), (qi, 1.0)],
                bound: 1.0,
            });
        }
        Family::Complete => {
            push("p", 1.0 / (nf - 1.0));
        }
    }
    ParamSpace {
        family: network.family(),
        n,
        names,
        lower,
        upper,
        constraints,
        reflection,
    }
}

impl ParamSpace {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn is_feasible(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&v, (&lo, &hi))| v >= lo - tol && v <= hi + tol)
            && self.constraints.iter().all(|c| c.lhs(x) <= c.bound + tol)
    }

    /// Pins coordinate `index` to `value` by collapsing its bounds.
    pub fn fix(&mut self, index: usize, value: f64) {
        self.lower[index] = value;
        self.upper[index] = value;
    }

    /// Projects `x` onto the feasible set by cyclic box/half-space projections.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for _ in 0..64 {
            for (i, v) in y.iter_mut().enumerate() {
                *v = v.clamp(self.lower[i], self.upper[i]);
            }
            let mut violated = false;
            for c in &self.constraints {
                let excess = c.lhs(&y) - c.bound;
                if excess > 0.0 {
                    violated = true;
                    let norm2: f64 = c.terms.iter().map(|&(_, a)| a * a).sum();
                    for &(i, a) in &c.terms {
                        y[i] -= excess * a / norm2;
                    }
                }
            }
            if !violated {
                break;
            }
        }
        for (i, v) in y.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
        y
    }
}

fn line_pair_count(n: usize) -> usize {
    n / 2 - 1
}

fn line_pair_names(pairs: usize, j: usize) -> (String, String) {
    if pairs == 1 {
        ("p".to_owned(), "q".to_owned())
    } else {
        (format!("p{}", j + 2), format!("q{}", j + 2))
    }
}

/// Move probabilities of one symmetric internal pair of a line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinePair {
    /// Toward the closest end.
    pub p: f64,
    /// Toward the farthest end.
    pub q: f64,
}

/// Family-specific patrol parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PatrolParams {
    /// `p` from the center to each end, `s` reflection at the ends.
    Star { p: f64, s: f64 },
    /// `pairs[k]` governs nodes `k+2` and `n-k-1`; `center` is the odd-`n` shift.
    Line {
        pairs: Vec<LinePair>,
        center: Option<f64>,
        kappa: f64,
    },
    /// `p` in each direction.
    Circle { p: f64 },
    /// `p` end to each adjacent end, `q` end to center, `r` center to each end.
    StarInCircle { p: f64, q: f64, r: f64 },
    /// `p` to each other node.
    Complete { p: f64 },
}

impl PatrolParams {
    pub fn family(&self) -> Family {
        match self {
            PatrolParams::Star { .. } => Family::Star,
            PatrolParams::Line { .. } => Family::Line,
            PatrolParams::Circle { .. } => Family::Circle,
            PatrolParams::StarInCircle { .. } => Family::StarInCircle,
            PatrolParams::Complete { .. } => Family::Complete,
        }
    }

    /// The coordinates in [`ParamSpace`] order.
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            PatrolParams::Star { p, s } => vec![*p, *s],
            PatrolParams::Line {
                pairs,
                center,
                kappa,
            } => {
                let mut v: Vec<f64> = pairs.iter().flat_map(|lp| [lp.p, lp.q]).collect();
                v.extend(center);
                v.push(*kappa);
                v
            }
            PatrolParams::Circle { p } | PatrolParams::Complete { p } => vec![*p],
            PatrolParams::StarInCircle { p, q, r } => vec![*p, *q, *r],
        }
    }

    /// Reads a coordinate vector in [`ParamSpace`] order for `network`.
    pub fn from_vec(network: &Network, x: &[f64]) -> Result<Self> {
        let dim = param_space(network).dim();
        if x.len() != dim {
            return Err(Error::InvalidParams(format!(
                "{} n={} takes {dim} parameters, got {}",
                network.family(),
                network.n(),
                x.len()
            )));
        }
        Ok(match network.family() {
            Family::Star => PatrolParams::Star { p: x[0], s: x[1] },
            Family::Line => {
                let pairs = line_pair_count(network.n());
                let center = (network.n() % 2 == 1).then(|| x[2 * pairs]);
                PatrolParams::Line {
                    pairs: (0..pairs)
                        .map(|j| LinePair {
                            p: x[2 * j],
                            q: x[2 * j + 1],
                        })
                        .collect(),
                    center,
                    kappa: x[dim - 1],
                }
            }
            Family::Circle => PatrolParams::Circle { p: x[0] },
            Family::StarInCircle => PatrolParams::StarInCircle {
                p: x[0],
                q: x[1],
                r: x[2],
            },
            Family::Complete => PatrolParams::Complete { p: x[0] },
        })
    }

    /// The simple random walk on `network`, which reflects at every leaf.
    pub fn random_walk(network: &Network) -> Self {
        let n = network.n() as f64;
        match network.family() {
            Family::Star => PatrolParams::Star { p: 1.0 / n, s: 1.0 },
            Family::Line => PatrolParams::Line {
                pairs: vec![LinePair { p: 0.5, q: 0.5 }; line_pair_count(network.n())],
                center: (network.n() % 2 == 1).then_some(0.5),
                kappa: 1.0,
            },
            Family::Circle => PatrolParams::Circle { p: 0.5 },
            Family::StarInCircle => PatrolParams::StarInCircle {
                p: 1.0 / 3.0,
                q: 1.0 / 3.0,
                r: 1.0 / n,
            },
            Family::Complete => PatrolParams::Complete { p: 1.0 / (n - 1.0) },
        }
    }

    /// `(name, value)` pairs in [`ParamSpace`] order.
    pub fn named(&self) -> Vec<(String, f64)> {
        let names: Vec<String> = match self {
            PatrolParams::Star { .. } => vec!["p".into(), "s".into()],
            PatrolParams::Line { pairs, center, .. } => {
                let mut names: Vec<String> = (0..pairs.len())
                    .flat_map(|j| {
                        let (p, q) = line_pair_names(pairs.len(), j);
                        [p, q]
                    })
                    .collect();
                if center.is_some() {
                    names.push("c".into());
                }
                names.push("kappa".into());
                names
            }
            PatrolParams::Circle { .. } | PatrolParams::Complete { .. } => vec!["p".into()],
            PatrolParams::StarInCircle { .. } => vec!["p".into(), "q".into(), "r".into()],
        };
        names.into_iter().zip(self.to_vec()).collect()
    }

    /// The leaf reflection probability, for families with leaves.
    pub fn reflection(&self) -> Option<f64> {
        match self {
            PatrolParams::Star { s, .. } => Some(*s),
            PatrolParams::Line { kappa, .. } => Some(*kappa),
            _ => None,
        }
    }
}

/// Parameters as a JSON object `{name: value}` with 17 significant digits.
#[derive(Debug, Clone)]
pub struct NamedParams(pub Vec<(String, f64)>);

impl Serialize for NamedParams {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, &Sig17(*v))?;
        }
        map.end()
    }
}

/// Row-stochastic matrix with a cached sparse view of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    dense: Vec<f64>,
    sparse: Vec<Vec<(NodeId, f64)>>,
}

impl TransitionMatrix {
    /// Builds a matrix from rows, checking shape, range and row sums.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let size = rows.len();
        if size == 0 {
            return Err(Error::InvalidMatrix("empty matrix".into()));
        }
        let mut dense = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidMatrix(format!("row {i} has entry {v}")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {sum}")));
            }
            dense.extend_from_slice(row);
        }
        Ok(Self::from_dense(size, dense))
    }

    fn from_dense(size: usize, dense: Vec<f64>) -> Self {
        let sparse = (0..size)
            .map(|i| {
                dense[i * size..(i + 1) * size]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect()
            })
            .collect();
        TransitionMatrix {
            size,
            dense,
            sparse,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> f64 {
        self.dense[i * self.size + j]
    }

    pub fn row(&self, i: NodeId) -> &[f64] {
        &self.dense[i * self.size..(i + 1) * self.size]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.size).map(|i| self.row(i).to_vec()).collect()
    }

    /// Nonzero entries of row `i`.
    pub fn nonzeros(&self, i: NodeId) -> &[(NodeId, f64)] {
        &self.sparse[i]
    }

    /// `out = x * T` (row vector times matrix).
    pub fn mul_left(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                for &(j, t) in &self.sparse[i] {
                    out[j] += xi * t;
                }
            }
        }
    }

    /// `out = T * v` (matrix times column vector).
    pub fn mul_right(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.sparse[i].iter().map(|&(j, t)| t * v[j]).sum();
        }
    }

    pub fn max_row_error(&self) -> f64 {
        (0..self.size)
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Whether every node reaches every other along positive entries.
    pub fn is_irreducible(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.size];
            seen[0] = true;
            let mut stack = vec![0];
            while let Some(i) = stack.pop() {
                for (j, s) in seen.iter_mut().enumerate() {
                    let w = if forward {
                        self.get(i, j)
                    } else {
                        self.get(j, i)
                    };
                    if w > 0.0 && !*s {
                        *s = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }

    /// Largest `|T[perm i][perm j] - T[i][j]|`; zero iff `perm` commutes with `T`.
    pub fn asymmetry_under(&self, perm: &[NodeId]) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.size {
            for j in 0..self.size {
                worst = worst.max((self.get(perm[i], perm[j]) - self.get(i, j)).abs());
            }
        }
        worst
    }
}

struct RowBuilder {
    size: usize,
    dense: Vec<f64>,
}

impl RowBuilder {
    fn new(size: usize) -> Self {
        RowBuilder {
            size,
            dense: vec![0.0; size * size],
        }
    }

    /// Writes the moves of `node`; the remainder becomes its stay probability.
    fn set(&mut self, node: NodeId, moves: &[(NodeId, f64)]) -> Result<()> {
        let total: f64 = moves.iter().map(|(_, p)| p).sum();
        if total > 1.0 + PARAM_TOL {
            return Err(Error::InvalidParams(format!(
                "moves out of a node sum to {total}, above 1"
            )));
        }
        let scale = if total > 1.0 { 1.0 / total } else { 1.0 };
        let row = &mut self.dense[node * self.size..(node + 1) * self.size];
        for &(j, p) in moves {
            row[j] += p * scale;
        }
        row[node] += (1.0 - total * scale).max(0.0);
        Ok(())
    }

    fn finish(self) -> TransitionMatrix {
        TransitionMatrix::from_dense(self.size, self.dense)
    }
}

fn checked(name: &str, v: f64) -> Result<f64> {
    if !(-PARAM_TOL..=1.0 + PARAM_TOL).contains(&v) {
        return Err(Error::InvalidParams(format!("{name}={v} outside [0, 1]")));
    }
    Ok(v.clamp(0.0, 1.0))
}

/// Builds the transition matrix of `params` on `network`.
///
/// Probabilities within `1e-12` of a bound are clamped onto it.
pub fn build_matrix(network: &Network, params: &PatrolParams) -> Result<TransitionMatrix> {
    if params.family() != network.family() {
        return Err(Error::FamilyMismatch {
            expected: network.family(),
            actual: params.family(),
        });
    }
    let n = network.n();
    let mut rows = RowBuilder::new(network.len());
    match params {
        PatrolParams::Star { p, s } => {
            let p = checked("p", *p)?;
            let s = checked("s", *s)?;
            for e in 0..n {
                rows.set(e, &[(n, s)])?;
            }
            let moves: Vec<_> = (0..n).map(|e| (e, p)).collect();
            rows.set(n, &moves)?;
        }
        PatrolParams::Line {
            pairs,
            center,
            kappa,
        } => {
            if pairs.len() != line_pair_count(n) || center.is_some() != (n % 2 == 1) {
                return Err(Error::InvalidParams(format!(
                    "line n={n} takes {} internal pairs{}",
                    line_pair_count(n),
                    if n % 2 == 1 {
                        " and a center shift"
                    } else {
                        ""
                    }
                )));
            }
            let kappa = checked("kappa", *kappa)?;
            rows.set(0, &[(1, kappa)])?;
            rows.set(n - 1, &[(n - 2, kappa)])?;
            for (k, pair) in pairs.iter().enumerate() {
                let p = checked("p", pair.p)?;
                let q = checked("q", pair.q)?;
                // node k+1 is closer to node 0; its mirror n-k-2 is closer to n-1
                let left = k + 1;
                let right = n - k - 2;
                rows.set(left, &[(left - 1, p), (left + 1, q)])?;
                rows.set(right, &[(right + 1, p), (right - 1, q)])?;
            }
            if let Some(c) = center {
                let c = checked("c", *c)?;
                if c > 0.5 + PARAM_TOL {
                    return Err(Error::InvalidParams(format!("c={c} exceeds 1/2")));
                }
                let mid = n / 2;
                rows.set(mid, &[(mid - 1, c), (mid + 1, c)])?;
            }
        }
        PatrolParams::Circle { p } => {
            let p = checked("p", *p)?;
            for i in 0..n {
                rows.set(i, &[((i + 1) % n, p), ((i + n - 1) % n, p)])?;
            }
        }
        PatrolParams::StarInCircle { p, q, r } => {
            let p = checked("p", *p)?;
            let q = checked("q", *q)?;
            let r = checked("r", *r)?;
            for e in 0..n {
                rows.set(e, &[((e + 1) % n, p), ((e + n - 1) % n, p), (n, q)])?;
            }
            let moves: Vec<_> = (0..n).map(|e| (e, r)).collect();
            rows.set(n, &moves)?;
        }
        PatrolParams::Complete { p } => {
            let p = checked("p", *p)?;
            for i in 0..n {
                let moves: Vec<_> = (0..n).filter(|&j| j != i).map(|j| (j, p)).collect();
                rows.set(i, &moves)?;
            }
        }
    }
    Ok(rows.finish())
}

/// `{family, n, nodes, matrix}` with 17-significant-digit entries.
#[derive(Debug, Serialize)]
pub struct MatrixDocument {
    pub family: Family,
    pub n: usize,
    pub nodes: Vec<String>,
    pub matrix: Vec<Vec<Sig17>>,
}

impl MatrixDocument {
    pub fn new(network: &Network, matrix: &TransitionMatrix) -> Self {
        MatrixDocument {
            family: network.family(),
            n: network.n(),
            nodes: network.labels(),
            matrix: (0..matrix.size())
                .map(|i| matrix.row(i).iter().map(|&v| Sig17(v)).collect())
                .collect(),
        }
    }
}
