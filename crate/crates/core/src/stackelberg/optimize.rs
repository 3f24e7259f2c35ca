//! Derivative-free maximization of a minimum of finitely many pieces.
//!
//! Stage one scores a lattice over the parameter box; stage two runs a pattern
//! search from the best lattice points. Besides the coordinate and diagonal
//! directions, each poll also tries the steepest ascent direction of the
//! currently active pieces, estimated by finite differences. Without it the
//! search stalls on ridges where two delays tie at an angle the fixed pattern
//! does not contain.

use rayon::prelude::*;
use serde::Serialize;

use crate::format::ser_vec_f64;
use crate::networks::ParamSpace;

/// A max-min problem: `pieces(x)` lists the attacker's payoffs at `x`, or `None` if `x` is inadmissible.
pub trait PieceFn: Sync {
    fn pieces(&self, x: &[f64]) -> Option<Vec<f64>>;

    fn objective(&self, x: &[f64]) -> f64 {
        match self.pieces(x) {
            Some(v) if !v.is_empty() => v.into_iter().fold(f64::INFINITY, f64::min),
            _ => f64::NEG_INFINITY,
        }
    }
}

impl<F> PieceFn for F
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + Sync,
{
    fn pieces(&self, x: &[f64]) -> Option<Vec<f64>> {
        self(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOptions {
    pub grid_resolution: usize,
    pub refine_tol: f64,
    pub multistart: usize,
    /// Lattices larger than this are coarsened uniformly.
    pub max_lattice_points: usize,
    pub max_evals_per_start: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        OptimizeOptions {
            grid_resolution: 41,
            refine_tol: 1e-6,
            multistart: 5,
            max_lattice_points: 3_000_000,
            max_evals_per_start: 200_000,
        }
    }
}

/// Per-start record of the refinement stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartReport {
    #[serde(serialize_with = "ser_vec_f64")]
    pub start: Vec<f64>,
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub start_value: f64,
    #[serde(serialize_with = "ser_vec_f64")]
    pub end: Vec<f64>,
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub end_value: f64,
    pub evals: usize,
    /// Final step length relative to the lattice spacing.
    #[serde(serialize_with = "crate::format::ser_f64")]
    pub final_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub lattice_points: usize,
    pub lattice_resolution: usize,
    pub starts: Vec<StartReport>,
}

const FEASIBILITY_TOL: f64 = 1e-12;

fn free_dims(space: &ParamSpace) -> Vec<usize> {
    (0..space.dim())
        .filter(|&i| space.upper[i] > space.lower[i])
        .collect()
}

/// Effective points per free dimension after applying the lattice cap.
pub fn lattice_resolution(space: &ParamSpace, opts: &OptimizeOptions) -> usize {
    let k = free_dims(space).len() as u32;
    let mut res = opts.grid_resolution.max(3);
    while k > 0 && (res as f64).powi(k as i32) > opts.max_lattice_points as f64 && res > 3 {
        res -= 1;
    }
    res
}

fn lattice_coord(space: &ParamSpace, i: usize, k: usize, res: usize) -> f64 {
    if space.upper[i] <= space.lower[i] {
        return space.lower[i];
    }
    if k + 1 == res {
        return space.upper[i];
    }
    space.lower[i] + (space.upper[i] - space.lower[i]) * k as f64 / (res - 1) as f64
}

/// Maximizes `problem.objective` over `space`.
///
/// Returns `None` when no lattice point is admissible.
pub fn maximize_min<P: PieceFn>(
    problem: &P,
    space: &ParamSpace,
    opts: &OptimizeOptions,
) -> Option<Outcome> {
    let dim = space.dim();
    let free = free_dims(space);
    let res = lattice_resolution(space, opts);
    let total = res.pow(free.len() as u32);

    let decode = |mut idx: usize| -> (Vec<usize>, Vec<f64>) {
        let mut ks = vec![0; dim];
        for &i in &free {
            ks[i] = idx % res;
            idx /= res;
        }
        let x = (0..dim)
            .map(|i| lattice_coord(space, i, ks[i], res))
            .collect();
        (ks, x)
    };

    let scored: Vec<(usize, f64)> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let (_, x) = decode(idx);
            if !space.is_feasible(&x, FEASIBILITY_TOL) {
                return None;
            }
            let v = problem.objective(&x);
            v.is_finite().then_some((idx, v))
        })
        .collect();
    let lattice_points = scored.len();
    if scored.is_empty() {
        return None;
    }

    let mut ranked = scored;
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    // Starts are the best points that are not lattice neighbors of a better start.
    let mut starts: Vec<(Vec<usize>, Vec<f64>, f64)> = Vec::new();
    for &(idx, v) in &ranked {
        if starts.len() >= opts.multistart.max(1) {
            break;
        }
        let (ks, x) = decode(idx);
        let near = starts
            .iter()
            .any(|(other, _, _)| free.iter().all(|&i| ks[i].abs_diff(other[i]) <= 1));
        if !near {
            starts.push((ks, x, v));
        }
    }

    let spacing: Vec<f64> = (0..dim)
        .map(|i| {
            if free.contains(&i) {
                (space.upper[i] - space.lower[i]) / (res - 1) as f64
            } else {
                0.0
            }
        })
        .collect();

    let reports: Vec<StartReport> = starts
        .par_iter()
        .map(|(_, x, v)| pattern_search(problem, space, &free, &spacing, x.clone(), *v, opts))
        .collect();

    let evals = lattice_points + reports.iter().map(|r| r.evals).sum::<usize>();
    let best = reports
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.end_value.total_cmp(&b.1.end_value).then(b.0.cmp(&a.0)))
        .map(|(_, r)| r)
        .expect("at least one start");
    Some(Outcome {
        x: best.end.clone(),
        value: best.end_value,
        evals,
        lattice_points,
        lattice_resolution: res,
        starts: reports,
    })
}

fn pattern_directions(free: &[usize], dim: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for &i in free {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; dim];
            d[i] = sign;
            dirs.push(d);
        }
    }
    let diag = std::f64::consts::FRAC_1_SQRT_2;
    for (a, &i) in free.iter().enumerate() {
        for &j in &free[a + 1..] {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; dim];
                d[i] = si * diag;
                d[j] = sj * diag;
                dirs.push(d);
            }
        }
    }
    dirs
}

/// Minimum-norm point of the convex hull of `gs` (Frank-Wolfe with exact line search).
fn min_norm_hull(gs: &[Vec<f64>]) -> Vec<f64> {
    let k = gs.len();
    let dim = gs[0].len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut w = vec![1.0 / k as f64; k];
    let combo = |w: &[f64]| -> Vec<f64> {
        (0..dim)
            .map(|c| gs.iter().zip(w).map(|(g, wi)| g[c] * wi).sum())
            .collect()
    };
    for _ in 0..200 {
        let v = combo(&w);
        let (s, _) = gs
            .iter()
            .enumerate()
            .map(|(i, g)| (i, dot(g, &v)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let diff: Vec<f64> = gs[s].iter().zip(&v).map(|(a, b)| a - b).collect();
        let denom = dot(&diff, &diff);
        if denom <= 1e-300 {
            break;
        }
        let gamma = (-dot(&v, &diff) / denom).clamp(0.0, 1.0);
        if gamma <= 1e-12 {
            break;
        }
        for (i, wi) in w.iter_mut().enumerate() {
            *wi *= 1.0 - gamma;
            if i == s {
                *wi += gamma;
            }
        }
    }
    combo(&w)
}

/// Ascent direction for the min of the active pieces, scaled to the lattice spacing.
fn active_direction<P: PieceFn>(
    problem: &P,
    x: &[f64],
    base: &[f64],
    free: &[usize],
    spacing: &[f64],
    margin: f64,
    evals: &mut usize,
) -> Option<Vec<f64>> {
    let lo = base.iter().copied().fold(f64::INFINITY, f64::min);
    let active: Vec<usize> = (0..base.len())
        .filter(|&k| base[k] <= lo + margin)
        .collect();
    let mut grads = vec![vec![0.0; x.len()]; active.len()];
    for &i in free {
        // differences in lattice-scaled coordinates
        let h = 1e-7 * spacing[i].max(1e-12);
        let mut xp = x.to_vec();
        xp[i] += h;
        let mut sign = 1.0;
        let pieces = problem.pieces(&xp).filter(|p| p.len() == base.len());
        let pieces = match pieces {
            Some(p) => p,
            None => {
                xp[i] = x[i] - h;
                sign = -1.0;
                problem.pieces(&xp).filter(|p| p.len() == base.len())?
            }
        };
        *evals += 1;
        for (g, &k) in grads.iter_mut().zip(&active) {
            g[i] = sign * (pieces[k] - base[k]) / h * spacing[i];
        }
    }
    let v = min_norm_hull(&grads);
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    (norm > 1e-14).then(|| v.iter().map(|c| c / norm).collect())
}

fn pattern_search<P: PieceFn>(
    problem: &P,
    space: &ParamSpace,
    free: &[usize],
    spacing: &[f64],
    start: Vec<f64>,
    start_value: f64,
    opts: &OptimizeOptions,
) -> StartReport {
    let dim = start.len();
    let fixed_dirs = pattern_directions(free, dim);
    let max_spacing = spacing.iter().copied().fold(0.0, f64::max);
    let mut x = start.clone();
    let mut fx = start_value;
    let mut scale = 0.5;
    let mut evals = 0usize;
    let mut last_good: Option<Vec<f64>> = None;

    while scale * max_spacing >= opts.refine_tol && evals < opts.max_evals_per_start {
        let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(fixed_dirs.len() + 2);
        if let Some(d) = &last_good {
            dirs.push(d.clone());
        }
        if let Some(base) = problem.pieces(&x) {
            evals += 1;
            let margin = (scale * max_spacing).max(1e-9);
            if let Some(d) = active_direction(problem, &x, &base, free, spacing, margin, &mut evals)
            {
                dirs.push(d);
            }
        }
        dirs.extend(fixed_dirs.iter().cloned());

        let mut moved = false;
        for d in dirs {
            let trial: Vec<f64> = (0..dim).map(|i| x[i] + scale * d[i] * spacing[i]).collect();
            let trial = if space.is_feasible(&trial, FEASIBILITY_TOL) {
                trial
            } else {
                space.project(&trial)
            };
            if trial == x {
                continue;
            }
            let ft = problem.objective(&trial);
            evals += 1;
            if ft > fx {
                x = trial;
                fx = ft;
                last_good = Some(d);
                moved = true;
                break;
            }
        }
        if moved {
            scale = (scale * 2.0).min(1.0);
        } else {
            last_good = None;
            scale *= 0.5;
        }
    }
    StartReport {
        start,
        start_value,
        end: x,
        end_value: fx,
        evals,
        final_step: scale,
    }
}
