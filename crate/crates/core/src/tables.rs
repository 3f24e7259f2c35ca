//! Reproduction of the published optimum tables.
//!
//! The reference values and tolerances live in `data/reference_tables.toml`,
//! compiled into the crate so the CLI and the tests read the same numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::format::{ser_f64, ser_opt_f64, ser_vec_f64};
use crate::interception::{closed_center, interception_curve};
use crate::networks::{build_matrix, build_network, Family, Network, PatrolParams};
use crate::stackelberg::{solve, SolveConfig, SolveResult};

pub const REFERENCE_TOML: &str = include_str!("../data/reference_tables.toml");

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct Tolerances {
    pub value: f64,
    pub params: f64,
    pub delay_value: f64,
    pub indifference: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RefRow {
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub params: Vec<f64>,
    pub delay: Option<usize>,
    pub value: f64,
    pub limit: Option<f64>,
    pub param_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RefTable {
    pub id: u32,
    pub title: String,
    pub family: Family,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub param_names: Vec<String>,
    pub rows: Vec<RefRow>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct RefNode {
    pub label: String,
    pub delay: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DominanceRow {
    pub m: usize,
    pub params: Vec<f64>,
    pub nodes: Vec<RefNode>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DominanceTable {
    pub id: u32,
    pub title: String,
    pub family: Family,
    pub n: usize,
    pub rows: Vec<DominanceRow>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReferenceData {
    pub version: u32,
    pub tolerance: Tolerances,
    pub tables: Vec<RefTable>,
    pub dominance: Vec<DominanceTable>,
}

impl ReferenceData {
    pub fn builtin() -> Self {
        Self::parse(REFERENCE_TOML).expect("bundled reference tables parse")
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("reference tables: {e}")))
    }

    pub fn ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self
            .tables
            .iter()
            .map(|t| t.id)
            .chain(self.dominance.iter().map(|t| t.id))
            .collect();
        ids.sort_unstable();
        ids
    }

    pub fn table(&self, id: u32) -> Option<&RefTable> {
        self.tables.iter().find(|t| t.id == id)
    }

    pub fn dominance_table(&self, id: u32) -> Option<&DominanceTable> {
        self.dominance.iter().find(|t| t.id == id)
    }
}

/// Produces the optimum for one table row; swapped out in tests.
pub trait TableSolver: Sync {
    fn solve(&self, network: &Network, m: usize) -> Result<SolveResult>;
}

/// The library's own solver.
#[derive(Debug, Clone, Default)]
pub struct DefaultSolver {
    pub config: SolveConfig,
}

impl TableSolver for DefaultSolver {
    fn solve(&self, network: &Network, m: usize) -> Result<SolveResult> {
        solve(network, m, &self.config)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowReport {
    /// `n=..` for table 2, `m=..` elsewhere.
    pub key: String,
    #[serde(serialize_with = "ser_vec_f64")]
    pub params: Vec<f64>,
    #[serde(serialize_with = "ser_vec_f64")]
    pub printed_params: Vec<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub param_dev: f64,
    #[serde(serialize_with = "ser_f64")]
    pub param_tol: f64,
    pub delay: usize,
    pub printed_delay: Option<usize>,
    /// Our curve's value at the printed delay, when one is printed.
    #[serde(serialize_with = "ser_opt_f64")]
    pub value_at_printed_delay: Option<f64>,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub printed_value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value_dev: f64,
    #[serde(serialize_with = "ser_opt_f64")]
    pub limit: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub printed_limit: Option<f64>,
    #[serde(serialize_with = "ser_opt_f64")]
    pub limit_dev: Option<f64>,
    /// Star-in-circle only: `|end attack - center attack|`.
    #[serde(serialize_with = "ser_opt_f64")]
    pub indifference_gap: Option<f64>,
    pub failures: Vec<String>,
}

impl RowReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceNodeReport {
    pub label: String,
    pub delay: usize,
    pub printed_delay: usize,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub printed_value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub value_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominanceRowReport {
    pub key: String,
    pub nodes: Vec<DominanceNodeReport>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TableRows {
    Optimum(Vec<RowReport>),
    Dominance(Vec<DominanceRowReport>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableReport {
    pub id: u32,
    pub title: String,
    pub rows: TableRows,
    #[serde(serialize_with = "ser_f64")]
    pub max_value_dev: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_param_dev: f64,
    pub passed: bool,
}

impl TableReport {
    /// `(row key, reason)` for every failed check.
    pub fn failures(&self) -> Vec<(String, String)> {
        match &self.rows {
            TableRows::Optimum(rows) => rows
                .iter()
                .flat_map(|r| r.failures.iter().map(|f| (r.key.clone(), f.clone())))
                .collect(),
            TableRows::Dominance(rows) => rows
                .iter()
                .flat_map(|r| r.failures.iter().map(|f| (r.key.clone(), f.clone())))
                .collect(),
        }
    }
}

/// Recomputes table `id` and compares every row with the printed values.
pub fn reproduce_table(
    id: u32,
    solver: &dyn TableSolver,
    data: &ReferenceData,
) -> Result<TableReport> {
    if let Some(table) = data.table(id) {
        let rows = table
            .rows
            .iter()
            .map(|row| reproduce_row(table, row, solver, &data.tolerance))
            .collect::<Result<Vec<_>>>()?;
        let max_value_dev = rows.iter().map(|r| r.value_dev).fold(0.0, f64::max);
        let max_param_dev = rows.iter().map(|r| r.param_dev).fold(0.0, f64::max);
        let passed = rows.iter().all(RowReport::passed);
        return Ok(TableReport {
            id,
            title: table.title.clone(),
            rows: TableRows::Optimum(rows),
            max_value_dev,
            max_param_dev,
            passed,
        });
    }
    if let Some(table) = data.dominance_table(id) {
        let rows = table
            .rows
            .iter()
            .map(|row| reproduce_dominance_row(table, row, &data.tolerance))
            .collect::<Result<Vec<_>>>()?;
        let max_value_dev = rows
            .iter()
            .flat_map(|r| r.nodes.iter().skip(1).map(|n| n.value_dev))
            .fold(0.0, f64::max);
        let passed = rows.iter().all(|r| r.failures.is_empty());
        return Ok(TableReport {
            id,
            title: table.title.clone(),
            rows: TableRows::Dominance(rows),
            max_value_dev,
            max_param_dev: 0.0,
            passed,
        });
    }
    Err(Error::InvalidConfig(format!(
        "no reference table {id} (available: {:?})",
        data.ids()
    )))
}

/// Parameters in the order the table prints them.
fn printed_order(table: &RefTable, n: usize, params: &PatrolParams) -> Vec<f64> {
    match (table.id, params) {
        (2, PatrolParams::Star { p, .. }) => vec![1.0 - n as f64 * p, *p],
        _ => params.to_vec(),
    }
}

fn reproduce_row(
    table: &RefTable,
    row: &RefRow,
    solver: &dyn TableSolver,
    tol: &Tolerances,
) -> Result<RowReport> {
    let n = row
        .n
        .or(table.n)
        .ok_or_else(|| Error::InvalidConfig("row without n".into()))?;
    let m = row
        .m
        .or(table.m)
        .ok_or_else(|| Error::InvalidConfig("row without m".into()))?;
    let key = if row.n.is_some() {
        format!("n={n}")
    } else {
        format!("m={m}")
    };
    let network = build_network(table.family, n)?;
    let res = solver.solve(&network, m)?;
    let params = printed_order(table, n, &res.params);
    let param_tol = row.param_tol.unwrap_or(tol.params);
    let param_dev = if params.len() == row.params.len() {
        params
            .iter()
            .zip(&row.params)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let value_dev = (res.value - row.value).abs();
    let limit_dev = row
        .limit
        .map(|l| res.limit_value.map_or(f64::INFINITY, |v| (v - l).abs()));

    let mut failures = Vec::new();
    if value_dev > tol.value {
        failures.push(format!(
            "value {:.6} vs printed {} (off by {value_dev:.2e})",
            res.value, row.value
        ));
    }
    if !(param_dev <= param_tol) {
        failures.push(format!(
            "params {} vs printed {} (off by {param_dev:.2e}, tolerance {param_tol:.0e})",
            fmt_vec(&params),
            fmt_vec(&row.params)
        ));
    }
    if let Some(dev) = limit_dev {
        if !(dev <= tol.value) {
            failures.push(format!(
                "limit {} vs printed {} (off by {dev:.2e})",
                res.limit_value.map_or("none".into(), |v| format!("{v:.6}")),
                row.limit.unwrap_or(f64::NAN)
            ));
        }
    }
    // the printed delay must be a best response on our curve, to print precision
    let mut value_at_printed_delay = None;
    if let Some(d) = row.delay {
        let at = res.delay_curve.value_at(d);
        value_at_printed_delay = at;
        let ok = d == res.attacker_delay || at.is_some_and(|v| v - res.value <= tol.delay_value);
        if !ok {
            failures.push(format!(
                "best delay {} vs printed {d} (value there {})",
                res.attacker_delay,
                at.map_or("unreachable".into(), |v| format!("{v:.6}"))
            ));
        }
    }
    let mut indifference_gap = None;
    if let PatrolParams::StarInCircle { q, .. } = res.params {
        let end = res
            .node_minima
            .iter()
            .find(|nm| nm.node == 0)
            .map_or(f64::NAN, |nm| nm.value);
        let gap = (end - closed_center(q, m)).abs();
        indifference_gap = Some(gap);
        if !(gap < tol.indifference) {
            failures.push(format!("end/center indifference gap {gap:.2e}"));
        }
    }
    Ok(RowReport {
        key,
        params,
        printed_params: row.params.clone(),
        param_dev,
        param_tol,
        delay: res.attacker_delay,
        printed_delay: row.delay,
        value_at_printed_delay,
        value: res.value,
        printed_value: row.value,
        value_dev,
        limit: res.limit_value,
        printed_limit: row.limit,
        limit_dev,
        indifference_gap,
        failures,
    })
}

fn reproduce_dominance_row(
    table: &DominanceTable,
    row: &DominanceRow,
    tol: &Tolerances,
) -> Result<DominanceRowReport> {
    let network = build_network(table.family, table.n)?;
    let params = PatrolParams::from_vec(&network, &row.params)?;
    let t = build_matrix(&network, &params)?;
    let d_max = SolveConfig::default().d_max;
    let mut nodes = Vec::new();
    for rn in &row.nodes {
        let node = network.node_by_label(&rn.label)?;
        let curve = interception_curve(&t, node, row.m, d_max)?;
        let (delay, value) = curve.min().ok_or(Error::NoReachableAttack)?;
        nodes.push(DominanceNodeReport {
            label: rn.label.clone(),
            delay,
            printed_delay: rn.delay,
            value,
            printed_value: rn.value,
            value_dev: (value - rn.value).abs(),
        });
    }
    let mut failures = Vec::new();
    // node 1 is the table's own optimum; its value is checked with the optimum tables
    for nr in nodes.iter().skip(1) {
        if nr.value_dev > tol.value {
            failures.push(format!(
                "node {} minimum {:.6} vs printed {} (off by {:.2e})",
                nr.label, nr.value, nr.printed_value, nr.value_dev
            ));
        }
    }
    for pair in nodes.windows(2) {
        if !(pair[1].value > pair[0].value) {
            failures.push(format!(
                "node {} minimum {:.6} does not exceed node {} minimum {:.6}",
                pair[1].label, pair[1].value, pair[0].label, pair[0].value
            ));
        }
    }
    Ok(DominanceRowReport {
        key: format!("m={}", row.m),
        nodes,
        failures,
    })
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
    format!("({})", parts.join(", "))
}
