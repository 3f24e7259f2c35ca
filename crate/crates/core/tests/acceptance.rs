//! Acceptance criteria, one pass/fail line each.
//!
//! Runs as a plain binary (`harness = false`) so every criterion reports even
//! when an earlier one fails; the process exits nonzero if any did.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use patrol_core::dynamics::{DEFAULT_STATIONARY_MAX_ITER, DEFAULT_STATIONARY_TOL};
use patrol_core::extensions::{memory_u2, memory_u3, vision_adjacent_d2, vision_center_d2};
use patrol_core::stackelberg::{star_asymptote_m4, verify_conjecture_reflection};
use patrol_core::tables::TableRows;
use patrol_core::verify::{
    montecarlo_scenarios, run_scenario, scenario_config, ScenarioKind, VerifyOptions,
};
use patrol_core::{
    build_matrix, build_network, intercept_prob, interception_curve, memory_solve, reproduce_table,
    solve, stationary_away, vision_solve, AttackPlan, DefaultSolver, Extension, ExtensionConfig,
    Family, LeaveEdge, MemoryStarChain, Network, PatrolParams, ReferenceData, Result, SolveConfig,
    SolveResult, TableReport, TableSolver, TransitionMatrix, VisionChain,
};

const EXACT: f64 = 1e-12;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict {
            passed,
            detail: detail.into(),
        }
    }
}

/// Remembers every optimum so the curve guard can revisit the table solves.
#[derive(Default)]
struct CachingSolver {
    inner: DefaultSolver,
    cache: Mutex<HashMap<(Family, usize, usize), SolveResult>>,
}

impl TableSolver for CachingSolver {
    fn solve(&self, network: &Network, m: usize) -> Result<SolveResult> {
        let key = (network.family(), network.n(), m);
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let res = self.inner.solve(network, m)?;
        self.cache.lock().unwrap().insert(key, res.clone());
        Ok(res)
    }
}

struct Ctx {
    data: ReferenceData,
    solver: CachingSolver,
}

impl Ctx {
    fn table(&self, id: u32) -> TableReport {
        reproduce_table(id, &self.solver, &self.data).expect("table reproduces without error")
    }
}

fn matrix(family: Family, n: usize, x: &[f64]) -> TransitionMatrix {
    let net = build_network(family, n).unwrap();
    build_matrix(&net, &PatrolParams::from_vec(&net, x).unwrap()).unwrap()
}

fn pi(t: &TransitionMatrix, node: usize, d: usize, m: usize) -> f64 {
    intercept_prob(t, &AttackPlan::new(node, d, m).unwrap()).unwrap()
}

fn table_summary(report: &TableReport) -> String {
    let failures = report.failures();
    let mut s = format!(
        "table {}: max value dev {:.2e}, max param dev {:.2e}",
        report.id, report.max_value_dev, report.max_param_dev
    );
    for (key, why) in failures {
        s.push_str(&format!("; {key}: {why}"));
    }
    s
}

// Eq. 4, 8, 11, 34 and 32 written out here rather than taken from the library.
fn closed_forms(_: &Ctx) -> Verdict {
    let mut dev: f64 = 0.0;
    for n in 2..=8 {
        let nf = n as f64;
        for k in 0..=12 {
            let p = k as f64 / 12.0 / nf;
            let t = matrix(Family::Star, n, &[p, 1.0]);
            dev = dev.max((pi(&t, 0, 2, 2) - (1.0 - nf * p) * p / (1.0 - p)).abs());
            let r = 1.0 - nf * p;
            let m4 = p / (1.0 - p) * (1.0 + 2.0 * r - p - 2.0 * p * r - r * r + r * r * r);
            dev = dev.max((pi(&t, 0, 2, 4) - m4).abs());
        }
        let walk = matrix(Family::Star, n, &[1.0 / nf, 1.0]);
        for m in [3, 5, 7] {
            let expect = 1.0 - ((nf - 1.0) / nf).powi((m as i32 - 1) / 2);
            for d in 1..=6 {
                dev = dev.max((pi(&walk, 0, d, m) - expect).abs());
            }
        }
    }
    for (n, m, expect) in [
        (3, 3, 0.75),
        (4, 2, 1.0 / 3.0),
        (4, 3, 5.0 / 9.0),
        (4, 4, 19.0 / 27.0),
    ] {
        let t = matrix(Family::Complete, n, &[1.0 / (n as f64 - 1.0)]);
        for d in 1..=6 {
            dev = dev.max((pi(&t, 0, d, m) - expect).abs());
        }
    }
    for n in 3..=6 {
        for (p, q, rf) in [(0.1, 0.3, 0.5), (0.25, 0.4, 0.8), (0.3, 0.1, 1.0)] {
            let t = matrix(Family::StarInCircle, n, &[p, q, rf / n as f64]);
            for m in 2..=5 {
                for d in 1..=5 {
                    dev = dev.max((pi(&t, n, d, m) - (1.0 - (1.0 - q).powi(m as i32 - 1))).abs());
                }
            }
        }
    }
    Verdict::new(
        dev <= EXACT,
        format!("max deviation {dev:.2e} over star, complete and center closed forms"),
    )
}

fn star_m2(_: &Ctx) -> Verdict {
    let mut ok = true;
    let mut rs = Vec::new();
    let mut worst_v: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for n in 2..=8 {
        let nf = n as f64;
        let root = (nf * (nf - 1.0)).sqrt();
        let (p_hat, v_hat) = (1.0 - root / nf, 2.0 * nf - 1.0 - 2.0 * root);
        let res = solve(
            &build_network(Family::Star, n).unwrap(),
            2,
            &SolveConfig::default(),
        )
        .unwrap();
        let PatrolParams::Star { p, .. } = res.params else {
            unreachable!()
        };
        worst_v = worst_v.max((res.value - v_hat).abs());
        worst_p = worst_p.max((p - p_hat).abs());
        rs.push(1.0 - nf * p);
        if n == 2 {
            ok &= (res.value - (3.0 - 2.0 * 2f64.sqrt())).abs() < 1e-6;
        }
    }
    ok &= worst_v < 1e-6 && worst_p < 1e-4;
    ok &= rs.windows(2).all(|w| w[1] > w[0]) && rs.iter().all(|&r| r < 0.5) && rs[6] > 0.48;
    let shown: Vec<String> = rs.iter().map(|r| format!("{r:.4}")).collect();
    Verdict::new(
        ok,
        format!(
            "value dev {worst_v:.1e}, p dev {worst_p:.1e}, stay r over n=2..8: {}",
            shown.join(" ")
        ),
    )
}

fn table2(ctx: &Ctx) -> Verdict {
    let r = ctx.table(2);
    let rows = match &r.rows {
        TableRows::Optimum(rows) => rows.len(),
        TableRows::Dominance(_) => 0,
    };
    Verdict::new(r.passed && rows == 8, table_summary(&r))
}

fn table3(ctx: &Ctx) -> Verdict {
    let r = ctx.table(3);
    let TableRows::Optimum(rows) = &r.rows else {
        unreachable!()
    };
    let kappa_ok = rows.iter().all(|row| (row.params[2] - 1.0).abs() <= 5e-3);
    let limits_checked = rows.iter().all(|row| row.limit_dev.is_some());
    Verdict::new(
        r.passed && kappa_ok && limits_checked && rows.len() == 5,
        format!("{}; kappa=1 on every row: {kappa_ok}", table_summary(&r)),
    )
}

fn dominance(ctx: &Ctx) -> Verdict {
    let four = ctx.table(4);
    let six = ctx.table(6);
    Verdict::new(
        four.passed && six.passed,
        format!("{} | {}", table_summary(&four), table_summary(&six)),
    )
}

fn table5(ctx: &Ctx) -> Verdict {
    let r = ctx.table(5);
    let TableRows::Optimum(rows) = &r.rows else {
        unreachable!()
    };
    let delays: Vec<usize> = rows.iter().map(|row| row.delay).collect();
    Verdict::new(
        r.passed,
        format!("{}; delays {delays:?}", table_summary(&r)),
    )
}

fn circles(ctx: &Ctx) -> Verdict {
    let seven = ctx.table(7);
    let eight = ctx.table(8);
    let (s2, s5) = (2f64.sqrt(), 5f64.sqrt());
    let mut dev: f64 = 0.0;
    for (n, expect) in [
        (4, vec![0.0, (2.0 - s2) / 2.0, s2 - 1.0, (2.0 - s2) / 2.0]),
        (
            5,
            vec![
                0.0,
                (3.0 - s5) / 4.0,
                (s5 - 1.0) / 4.0,
                (s5 - 1.0) / 4.0,
                (3.0 - s5) / 4.0,
            ],
        ),
    ] {
        for k in 1..=24 {
            // below 1/2 only: at p = 1/2 the C4 walk is periodic
            let p = k as f64 / 49.0;
            let t = matrix(Family::Circle, n, &[p]);
            let st = stationary_away(&t, 0, DEFAULT_STATIONARY_TOL, DEFAULT_STATIONARY_MAX_ITER)
                .unwrap();
            for x in st.states() {
                for (a, b) in x.probs.iter().zip(&expect) {
                    dev = dev.max((a - b).abs());
                }
            }
        }
    }
    Verdict::new(
        seven.passed && eight.passed && dev <= 1e-10,
        format!(
            "{} | {} | stationary dev {dev:.1e}",
            table_summary(&seven),
            table_summary(&eight)
        ),
    )
}

fn table9(ctx: &Ctx) -> Verdict {
    let r = ctx.table(9);
    let net = build_network(Family::StarInCircle, 4).unwrap();
    let mut worst: f64 = 0.0;
    for m in 2..=4 {
        let res = ctx.solver.solve(&net, m).unwrap();
        let PatrolParams::StarInCircle { q, .. } = res.params else {
            unreachable!()
        };
        let t = build_matrix(&net, &res.params).unwrap();
        let end = interception_curve(&t, 0, m, res.d_max)
            .unwrap()
            .min()
            .unwrap()
            .1;
        let center_attack = 1.0 - (1.0 - q).powi(m as i32 - 1);
        worst = worst.max((end - center_attack).abs());
        if m == 2 {
            worst = worst.max((end - q).abs());
        }
    }
    Verdict::new(
        r.passed && worst < 1e-3,
        format!("{}; worst indifference gap {worst:.1e}", table_summary(&r)),
    )
}

fn asymptotics(_: &Ctx) -> Verdict {
    let (r_inf, a) = star_asymptote_m4();
    let cubic = 4.0 * r_inf.powi(3) - 6.0 * r_inf * r_inf + 6.0 * r_inf - 1.0;
    let res = solve(
        &build_network(Family::Star, 50).unwrap(),
        4,
        &SolveConfig::default(),
    )
    .unwrap();
    let PatrolParams::Star { p, .. } = res.params else {
        unreachable!()
    };
    let n_v = 50.0 * res.value;
    let r50 = 1.0 - 50.0 * p;
    Verdict::new(
        (r_inf - 0.20196).abs() < 1e-4 && cubic.abs() < 1e-12 && (n_v - 1.0944).abs() < 0.05 && (a - 1.0944).abs() < 1e-4,
        format!("r_inf {r_inf:.6} (cubic residual {cubic:.0e}), limit scale {a:.5}; Star(50): nV {n_v:.5}, r {r50:.4}"),
    )
}

fn memory(_: &Ctx) -> Verdict {
    let sol = memory_solve(3, &ExtensionConfig::default()).unwrap();
    let alg = sol.algebraic.expect("n = 3 has the algebraic optimum");
    let mut ok = (sol.p - 0.305).abs() <= 3e-3
        && (sol.s - 0.217).abs() <= 3e-3
        && (sol.value - 0.136).abs() <= 3e-3;
    ok &= (alg.value - sol.value).abs() < 1e-6;
    let printed = [
        (
            (0.30, 0.21),
            [
                0.21, 0.141, 0.132, 0.162, 0.139, 0.149, 0.148, 0.145, 0.148, 0.147,
            ],
        ),
        (
            (0.30, 0.22),
            [
                0.22, 0.131, 0.143, 0.159, 0.142, 0.152, 0.148, 0.148, 0.149, 0.148,
            ],
        ),
    ];
    for ((p, s), seq) in printed {
        let got = MemoryStarChain::new(3, p, s).unwrap().curve(10);
        ok &= got
            .iter()
            .zip(seq)
            .all(|(a, b)| ((a * 1000.0).round() - b * 1000.0).abs() < 1e-9);
    }
    let mut dev: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            let (p, s) = (i as f64 / 30.0, j as f64 / 30.0);
            let curve = MemoryStarChain::new(3, p, s).unwrap().curve(3);
            dev = dev
                .max((curve[1] - memory_u2(p, s)).abs())
                .max((curve[2] - memory_u3(p, s)).abs());
        }
    }
    ok &= dev <= EXACT;
    Verdict::new(
        ok,
        format!(
            "optimum ({:.4}, {:.4}) value {:.5}, algebraic {:.5}; sequences match; u2/u3 dev {dev:.1e}",
            sol.p, sol.s, sol.value, alg.value
        ),
    )
}

fn vision(_: &Ctx) -> Verdict {
    let mut dev: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            for k in 0..=5 {
                let p = i as f64 / 20.0;
                let q = j as f64 / 10.0 * (1.0 - 2.0 * p);
                let r = k as f64 / 20.0;
                let c = VisionChain::new(p, q, r).unwrap();
                let center = c.curve(LeaveEdge::Center, 2)[1];
                let adjacent = c.curve(LeaveEdge::Adjacent, 2)[1];
                dev = dev.max((center - vision_center_d2(p, r)).abs());
                dev = dev.max((adjacent - vision_adjacent_d2(p, q, r)).abs());
            }
        }
    }
    let sol = vision_solve(&ExtensionConfig::default()).unwrap();
    let objective = |c: &VisionChain| {
        let mut v = c.curve(LeaveEdge::Adjacent, sol.d_max);
        v.extend(c.curve(LeaveEdge::Center, sol.d_max));
        v.push(c.q);
        v.into_iter().fold(f64::INFINITY, f64::min)
    };
    let at_opt = objective(&VisionChain::new(sol.p, sol.q, sol.r).unwrap());
    let mut best_lattice = f64::NEG_INFINITY;
    for i in 0..=20 {
        for j in 0..=20 {
            for k in 0..=10 {
                let p = i as f64 / 40.0;
                let q = j as f64 / 20.0 * (1.0 - 2.0 * p);
                let r = k as f64 / 40.0;
                best_lattice = best_lattice.max(objective(&VisionChain::new(p, q, r).unwrap()));
            }
        }
    }
    let ok = dev <= EXACT
        && (at_opt - sol.value).abs() <= EXACT
        && best_lattice <= sol.value + 1e-9
        && !sol.report.notes.is_empty()
        && sol.no_vision_value >= sol.value - 1e-9;
    Verdict::new(
        ok,
        format!(
            "d=2 closed-form dev {dev:.1e}; optimum ({:.4}, {:.4}, {:.4}) V {:.6} vs printed (0.25, 0.1667, 0.25) V 0.1667; \
             re-evaluated {at_opt:.6}, best lattice {best_lattice:.6}; no-vision {:.4}; {} discrepancy notes",
            sol.p,
            sol.q,
            sol.r,
            sol.value,
            sol.no_vision_value,
            sol.report.notes.len()
        ),
    )
}

fn montecarlo(_: &Ctx) -> Verdict {
    let opts = VerifyOptions::default();
    let scenarios = montecarlo_scenarios();
    let mut families = Vec::new();
    let (mut memory, mut vision) = (false, false);
    let mut failed = Vec::new();
    let mut worst_z: f64 = 0.0;
    for (i, s) in scenarios.iter().enumerate() {
        match &s.kind {
            ScenarioKind::Markov { family, .. } => {
                if !families.contains(family) {
                    families.push(*family);
                }
            }
            ScenarioKind::Extension {
                ext: Extension::MemoryStar(_),
                ..
            } => memory = true,
            ScenarioKind::Extension {
                ext: Extension::VisionE4(_),
                ..
            } => vision = true,
        }
        let config = scenario_config(&opts, i);
        assert_eq!(config.trials, 1_000_000);
        let r = run_scenario(s, &config).unwrap();
        worst_z = worst_z.max(r.z);
        if !r.passed {
            failed.push(format!("{} (z {:.2})", s.name, r.z));
        }
    }
    let ok = scenarios.len() >= 12
        && families.len() == Family::ALL.len()
        && memory
        && vision
        && failed.is_empty();
    Verdict::new(
        ok,
        format!(
            "{} scenarios at 1e6 trials, {} families, both extensions; worst z {worst_z:.2}{}",
            scenarios.len(),
            families.len(),
            if failed.is_empty() {
                String::new()
            } else {
                format!("; failed: {}", failed.join(", "))
            }
        ),
    )
}

fn conjecture(_: &Ctx) -> Verdict {
    let mut worst = f64::INFINITY;
    let mut low = Vec::new();
    for (family, n) in [
        (Family::Star, 2),
        (Family::Star, 3),
        (Family::Star, 4),
        (Family::Line, 4),
        (Family::Line, 5),
    ] {
        let net = build_network(family, n).unwrap();
        for m in [2, 3, 4] {
            let rep = verify_conjecture_reflection(&net, m, &SolveConfig::default()).unwrap();
            worst = worst.min(rep.reflection);
            if rep.reflection <= 1.0 - 1e-3 {
                low.push(format!("{family} n={n} m={m}: {:.4}", rep.reflection));
            }
        }
    }
    Verdict::new(
        low.is_empty(),
        format!(
            "15 free solves, smallest reflection {worst:.6} {}",
            low.join(", ")
        ),
    )
}

fn curve_guard(ctx: &Ctx) -> Verdict {
    let results: Vec<SolveResult> = ctx.solver.cache.lock().unwrap().values().cloned().collect();
    let mut worst = f64::INFINITY;
    let mut broken = Vec::new();
    for res in &results {
        let net = build_network(res.family, res.n).unwrap();
        let t = build_matrix(&net, &res.params).unwrap();
        for node in net.representatives() {
            let curve = interception_curve(&t, node, res.m, 200).unwrap();
            let floor = match curve.limit {
                Some(limit) => res.value.min(limit),
                None => res.value,
            };
            for p in curve.points.iter().filter(|p| p.reachable) {
                let margin = p.pi - floor;
                worst = worst.min(margin);
                if margin < -1e-9 {
                    broken.push(format!(
                        "{} n={} m={} node {} d={}",
                        res.family,
                        res.n,
                        res.m,
                        net.label(node),
                        p.d
                    ));
                    break;
                }
            }
        }
    }
    Verdict::new(
        !results.is_empty() && broken.is_empty(),
        format!(
            "{} table optima, every node, d<=200; smallest margin {worst:.2e}{}",
            results.len(),
            if broken.is_empty() {
                String::new()
            } else {
                format!("; below: {}", broken.join(", "))
            }
        ),
    )
}

type Criterion = (&'static str, fn(&Ctx) -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 14] = [
        ("closed-form interception probabilities", closed_forms),
        ("star m=2 optimum", star_m2),
        ("star m=4 table", table2),
        ("line L4 table", table3),
        ("line dominance tables", dominance),
        ("line L5 table", table5),
        ("circle tables and stationary vectors", circles),
        ("star-in-circle table and indifference", table9),
        ("large star asymptotics", asymptotics),
        ("memory patroller", memory),
        ("edge-vision attacker", vision),
        ("Monte Carlo agreement", montecarlo),
        ("leaf reflection is optimal", conjecture),
        ("delay-curve guard", curve_guard),
    ];
    let ctx = Ctx {
        data: ReferenceData::builtin(),
        solver: CachingSolver::default(),
    };
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(|| check(&ctx))).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Verdict::new(false, format!("panicked: {msg}"))
        });
        if !v.passed {
            failed += 1;
        }
        println!(
            "{} {:02} {name}: {} [{:.1}s]",
            if v.passed { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
