//! Parsing for sweep grids, integer ranges and parameter lists.

use anyhow::{anyhow, bail, Context, Result};

use patrol_core::{param_space, Network, PatrolParams};

/// Slack when deciding whether the last grid step lands on the upper end.
const GRID_EPS: f64 = 1e-9;

/// One swept parameter: `name=lo:hi:step` or `name=v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxis {
    pub name: String,
    pub values: Vec<f64>,
}

impl std::str::FromStr for GridAxis {
    type Err = anyhow::Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (name, range) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("grid `{spec}` must look like name=lo:hi:step"))?;
        let name = name.trim();
        if name.is_empty() {
            bail!("grid `{spec}` has no parameter name");
        }
        let values = if range.contains(':') {
            let parts: Vec<f64> = range
                .split(':')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("grid `{spec}` has a non-numeric bound"))?;
            let [lo, hi, step] = parts[..] else {
                bail!("grid `{spec}` needs exactly lo:hi:step");
            };
            if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi < lo {
                bail!("grid `{spec}` needs finite lo <= hi and step > 0");
            }
            let count = ((hi - lo) / step + GRID_EPS).floor() as usize + 1;
            if count > 1_000_000 {
                bail!("grid `{spec}` has {count} points");
            }
            (0..count).map(|k| lo + k as f64 * step).collect()
        } else {
            range
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .with_context(|| format!("grid `{spec}` has a non-numeric value"))?
        };
        if values.is_empty() {
            bail!("grid `{spec}` is empty");
        }
        Ok(GridAxis {
            name: name.to_owned(),
            values,
        })
    }
}

/// Every combination of the axes, first axis slowest.
pub fn cartesian(axes: &[GridAxis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut row = prefix.clone();
                    row.push(v);
                    row
                })
            })
            .collect()
    })
}

/// `n`, `a..b` (exclusive) or `a..=b`.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let bad = || anyhow!("size `{spec}` must be an integer or a range like 2..=8");
    if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let (b, inclusive) = match b.strip_prefix('=') {
            Some(b) => (b, true),
            None => (b, false),
        };
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        let sizes: Vec<usize> = if inclusive {
            (a..=b).collect()
        } else {
            (a..b).collect()
        };
        if sizes.is_empty() {
            bail!("size range `{spec}` is empty");
        }
        Ok(sizes)
    } else {
        Ok(vec![spec.trim().parse().map_err(|_| bad())?])
    }
}

/// Reads `p,q,...` in parameter order, or `name=value,...` over the random-walk defaults.
pub fn parse_params(network: &Network, spec: &str) -> Result<PatrolParams> {
    let space = param_space(network);
    let x = if spec.contains('=') {
        let mut x = PatrolParams::random_walk(network).to_vec();
        for item in spec.split(',') {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("parameter `{item}` must be name=value"))?;
            let idx = space.index_of(name.trim()).ok_or_else(|| {
                anyhow!(
                    "{} n={} has no parameter `{}` (expected one of {})",
                    network.family(),
                    network.n(),
                    name.trim(),
                    space.names.join(", ")
                )
            })?;
            x[idx] = parse_number(value)?;
        }
        x
    } else {
        spec.split(',')
            .map(parse_number)
            .collect::<Result<Vec<_>>>()?
    };
    Ok(PatrolParams::from_vec(network, &x)?)
}

/// A decimal or a fraction such as `1/3`.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    let value = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .with_context(|| format!("bad number `{s}`"))?;
            let b: f64 = b
                .trim()
                .parse()
                .with_context(|| format!("bad number `{s}`"))?;
            a / b
        }
        None => s.parse().with_context(|| format!("bad number `{s}`"))?,
    };
    if !value.is_finite() {
        bail!("`{s}` is not a finite number");
    }
    Ok(value)
}
