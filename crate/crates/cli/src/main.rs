//! `patrol`: solves, evaluations, sweeps, table reproduction and simulation
//! for the uniformed-patroller game.

mod grid;

use std::io::{self, Write};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use patrol_core::format::sig17;
use patrol_core::montecarlo::extension_exact;
use patrol_core::networks::MatrixDocument;
use patrol_core::verify::{run_suite, Suite, VerifyOptions};
use patrol_core::{
    away_sequence, best_response, build_matrix, build_network, intercept_prob, interception_curve,
    memory_solve, param_space, reproduce_table, simulate, simulate_extension, solve,
    solve_star_in_circle, AttackPlan, Conditioning, DefaultSolver, Extension, ExtensionConfig,
    ExtensionResponse, Family, LeaveEdge, MemoryStarChain, Network, PatrolParams, ReferenceData,
    SimConfig, SolveConfig, SolveResult, TableReport, TableSolver, VisionChain,
};

use grid::{cartesian, parse_number, parse_params, parse_sizes, GridAxis};

#[derive(Parser, Debug)]
#[command(name = "patrol", version, about = "Uniformed-patroller game solver")]
struct Cli {
    /// Worker threads for solves and simulations (0 = all cores).
    #[arg(long, global = true, env = "PATROL_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal patrol and the attacker's best response.
    Solve(SolveArgs),
    /// Interception probability of one attack against a fixed patrol.
    Eval(EvalArgs),
    /// CSV sweeps over parameters, delays or away distributions.
    Sweep(SweepArgs),
    /// Recompute a published table and compare row by row.
    Table(TableArgs),
    /// Monte Carlo estimate of an interception probability.
    Simulate(SimulateArgs),
    /// Run an invariant suite.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone, Copy, Default)]
struct Format {
    /// Machine-readable JSON.
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// Machine-readable CSV.
    #[arg(long)]
    csv: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ExtensionKind {
    Memory,
    Vision,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("model").required(true).args(["family", "extension"])))]
struct SolveArgs {
    #[arg(long)]
    family: Option<Family>,
    /// Memory-star or edge-vision variant instead of a family.
    #[arg(long, value_enum, conflicts_with = "family")]
    extension: Option<ExtensionKind>,
    #[arg(long)]
    n: Option<usize>,
    /// Attack duration; extensions only support 2.
    #[arg(long)]
    m: Option<usize>,
    /// Largest attacker delay (default 15, or 10 for extensions).
    #[arg(long)]
    dmax: Option<usize>,
    /// Lattice points per coordinate in the coarse search.
    #[arg(long, default_value_t = 41)]
    grid: usize,
    /// Pin the leaf reflection probability to 1.
    #[arg(long)]
    fix_reflect: bool,
    /// Extension chain conditioning.
    #[arg(long, default_value = "per-state")]
    conditioning: Conditioning,
    #[command(flatten)]
    format: Format,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    n: usize,
    /// `p,q,...` in parameter order, or `name=value,...`.
    #[arg(long, allow_hyphen_values = true)]
    params: String,
    /// Node label (`1..n`, or `c` for a center).
    #[arg(long, default_value = "1")]
    node: String,
    #[arg(long)]
    delay: usize,
    #[arg(long)]
    m: usize,
    /// Also print the transition matrix (JSON only).
    #[arg(long, requires = "json")]
    matrix: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("mode").required(true).args(["param_grid", "delay_curve", "away_sequence"])))]
struct SweepArgs {
    #[arg(long)]
    family: Family,
    /// A size or a range such as `2..=8`.
    #[arg(long)]
    n: String,
    #[arg(long)]
    m: Option<usize>,
    /// Swept parameter, `name=lo:hi:step` or `name=v1,v2`; repeat for a product grid.
    #[arg(long)]
    param_grid: Vec<GridAxis>,
    /// Interception against delay at `--params`, or at the optimum if omitted.
    #[arg(long)]
    delay_curve: bool,
    /// Away distributions `x^(t)` at `--params`, or at the optimum if omitted.
    #[arg(long)]
    away_sequence: bool,
    /// Base patrol; unswept parameters keep these values (default: random walk).
    #[arg(long, allow_hyphen_values = true)]
    params: Option<String>,
    #[arg(long)]
    node: Option<String>,
    #[arg(long, default_value_t = 15)]
    dmax: usize,
    /// Lattice resolution when an optimum has to be solved first.
    #[arg(long, default_value_t = 41)]
    grid: usize,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    id: u32,
    /// Add this to every solved value before comparing (exercises the failure path).
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    perturb: f64,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("model").required(true).args(["family", "extension"])))]
struct SimulateArgs {
    #[arg(long)]
    family: Option<Family>,
    #[arg(long, value_enum, conflicts_with = "family")]
    extension: Option<ExtensionKind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    params: String,
    #[arg(long, default_value = "1", conflicts_with = "extension")]
    node: String,
    #[arg(long, conflicts_with = "extension")]
    delay: Option<usize>,
    #[arg(long, conflicts_with = "extension")]
    m: Option<usize>,
    /// Extension response: `delay:D`, `center:D`, `adjacent:D` or `center-attack`.
    #[arg(long, requires = "extension")]
    response: Option<ResponseArg>,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 100_000)]
    max_periods: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite to run; all suites when omitted.
    #[arg(long)]
    suite: Option<Suite>,
    /// Trials per Monte Carlo scenario.
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 20_240_601)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy)]
struct ResponseArg(ExtensionResponse);

impl FromStr for ResponseArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "center-attack" {
            return Ok(ResponseArg(ExtensionResponse::CenterAttack));
        }
        let (kind, d) = s.split_once(':').ok_or_else(|| {
            anyhow!("response `{s}` must be delay:D, center:D, adjacent:D or center-attack")
        })?;
        let delay: usize = d.parse().with_context(|| format!("bad delay in `{s}`"))?;
        let response = match kind {
            "delay" => ExtensionResponse::Delay(delay),
            edge => ExtensionResponse::Leave {
                edge: edge.parse::<LeaveEdge>().map_err(|e| anyhow!("{e}"))?,
                delay,
            },
        };
        Ok(ResponseArg(response))
    }
}

/// How a command ended, when it did not fail outright.
enum Outcome {
    Ok,
    /// A check ran and did not pass.
    Failed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
    {
        eprintln!("error: could not start worker pool: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Table(a) => cmd_table(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
            {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn json_line<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn emit(text: &str) -> Result<()> {
    io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

fn network(family: Family, n: Option<usize>) -> Result<Network> {
    let n = n.ok_or_else(|| anyhow!("--n is required with --family"))?;
    Ok(build_network(family, n)?)
}

fn solve_config(dmax: usize, grid: usize, fix_reflect: bool) -> SolveConfig {
    SolveConfig {
        d_max: dmax,
        grid_resolution: grid,
        fix_reflection: fix_reflect,
        ..SolveConfig::default()
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<Outcome> {
    if let Some(kind) = a.extension {
        return solve_extension(kind, a);
    }
    let family = a.family.expect("clap enforces family or extension");
    let net = network(family, a.n)?;
    let m =
        a.m.ok_or_else(|| anyhow!("--m is required with --family"))?;
    let config = solve_config(a.dmax.unwrap_or(15), a.grid, a.fix_reflect);
    config.validate()?;

    if family == Family::StarInCircle {
        let res = solve_star_in_circle(&net, m, &config)?;
        if a.format.json {
            return json_line(&res).map(|_| Outcome::Ok);
        }
        if a.format.csv {
            return emit(&solve_csv(&res.result)).map(|_| Outcome::Ok);
        }
        let mut text = solve_text(&res.result);
        text.push_str(&format!(
            "end attack     {}\ncenter attack  {}\nindifference   {}\n",
            sig17(res.end_value),
            sig17(res.center_value),
            sig17(res.indifference_gap)
        ));
        return emit(&text).map(|_| Outcome::Ok);
    }

    let res = solve(&net, m, &config)?;
    if a.format.json {
        json_line(&res)?;
    } else if a.format.csv {
        emit(&solve_csv(&res))?;
    } else {
        emit(&solve_text(&res))?;
    }
    Ok(Outcome::Ok)
}

fn solve_text(res: &SolveResult) -> String {
    let params: Vec<String> = res
        .params
        .named()
        .iter()
        .map(|(k, v)| format!("{k}={}", sig17(*v)))
        .collect();
    let mut s = format!(
        "{} n={} m={} D={}\nparams         {}\nattack         node {}, delay {}\nvalue          {}\n",
        res.family,
        res.n,
        res.m,
        res.d_max,
        params.join(" "),
        res.attacker_label,
        res.attacker_delay,
        sig17(res.value),
    );
    match res.limit_value {
        Some(l) => s.push_str(&format!("limit          {}\n", sig17(l))),
        None => s.push_str("limit          none\n"),
    }
    for nm in &res.node_minima {
        s.push_str(&format!(
            "node {:<9} delay {:<3} {}\n",
            nm.label,
            nm.delay,
            sig17(nm.value)
        ));
    }
    s.push_str(&format!(
        "evaluations    {} ({} lattice points)\n",
        res.diagnostics.evals, res.diagnostics.lattice_points
    ));
    s
}

fn solve_csv(res: &SolveResult) -> String {
    let named = res.params.named();
    let mut header = vec!["family", "n", "m", "D"];
    header.extend(named.iter().map(|(k, _)| k.as_str()));
    header.extend(["node", "delay", "value", "limit_value"]);
    let mut row = vec![
        res.family.to_string(),
        res.n.to_string(),
        res.m.to_string(),
        res.d_max.to_string(),
    ];
    row.extend(named.iter().map(|(_, v)| sig17(*v)));
    row.push(res.attacker_label.clone());
    row.push(res.attacker_delay.to_string());
    row.push(sig17(res.value));
    row.push(res.limit_value.map(sig17).unwrap_or_default());
    format!("{}\n{}\n", header.join(","), row.join(","))
}

fn solve_extension(kind: ExtensionKind, a: &SolveArgs) -> Result<Outcome> {
    if a.m.is_some_and(|m| m != 2) {
        bail!("extensions are solved for m = 2 only");
    }
    if a.format.csv {
        bail!("extension solves support human or --json output");
    }
    let config = ExtensionConfig {
        d_max: a
            .dmax
            .unwrap_or(patrol_core::extensions::DEFAULT_EXTENSION_D),
        conditioning: a.conditioning,
        grid_resolution: a.grid,
        ..ExtensionConfig::default()
    };
    match kind {
        ExtensionKind::Memory => {
            let sol = memory_solve(a.n.unwrap_or(3), &config)?;
            if a.format.json {
                return json_line(&sol).map(|_| Outcome::Ok);
            }
            let mut s = format!(
                "memory star n={} m=2 D={}\nparams         p={} s={}\nvalue          {}\ndelays         {:?}\nmemoryless     {}\ngain           {}\n",
                sol.n,
                sol.d_max,
                sig17(sol.p),
                sig17(sol.s),
                sig17(sol.value),
                sol.delays,
                sig17(sol.memoryless_value),
                sig17(sol.gain),
            );
            if let Some(alg) = sol.algebraic {
                s.push_str(&format!(
                    "u2 = u3 optimum p={} s={} value {}\n",
                    sig17(alg.p),
                    sig17(alg.s),
                    sig17(alg.value)
                ));
            }
            emit(&s)?;
        }
        ExtensionKind::Vision => {
            if a.n.is_some_and(|n| n != 4) {
                bail!("the vision extension is defined on the star-in-circle with n = 4");
            }
            let sol = patrol_core::vision_solve(&config)?;
            if a.format.json {
                return json_line(&sol).map(|_| Outcome::Ok);
            }
            let mut s = format!(
                "vision star-in-circle n=4 m=2 D={}\nparams         p={} q={} r={}\nvalue          {}\nq interval     [{}, {}]\ndelays         adjacent {}, center {}\ncenter attack  {}\nno vision      {}\n",
                sol.d_max,
                sig17(sol.p),
                sig17(sol.q),
                sig17(sol.r),
                sig17(sol.value),
                sig17(sol.q_interval[0]),
                sig17(sol.q_interval[1]),
                sol.d_adjacent,
                sol.d_center,
                sig17(sol.center_attack),
                sig17(sol.no_vision_value),
            );
            for note in &sol.report.notes {
                s.push_str(&format!("note: {note}\n"));
            }
            emit(&s)?;
        }
    }
    Ok(Outcome::Ok)
}

fn cmd_eval(a: &EvalArgs) -> Result<Outcome> {
    let net = build_network(a.family, a.n)?;
    let params = parse_params(&net, &a.params)?;
    let node = net.node_by_label(&a.node)?;
    let t = build_matrix(&net, &params)?;
    let plan = AttackPlan::new(node, a.delay, a.m)?;
    let pi = intercept_prob(&t, &plan)?;
    if a.json {
        let mut doc = serde_json::json!({
            "family": a.family,
            "n": a.n,
            "params": patrol_core::networks::NamedParams(params.named()),
            "node": net.label(node),
            "delay": a.delay,
            "m": a.m,
            "pi": patrol_core::format::Sig17(pi),
        });
        if a.matrix {
            doc["matrix"] = serde_json::to_value(MatrixDocument::new(&net, &t))?;
        }
        json_line(&doc)?;
    } else {
        emit(&format!("{}\n", sig17(pi)))?;
    }
    Ok(Outcome::Ok)
}

/// Patrol for a curve or away sequence: `--params` if given, otherwise the optimum.
fn sweep_patrol(a: &SweepArgs, net: &Network) -> Result<(PatrolParams, Option<SolveResult>)> {
    match &a.params {
        Some(spec) => Ok((parse_params(net, spec)?, None)),
        None => {
            let m =
                a.m.ok_or_else(|| anyhow!("--m is required to solve for the optimal patrol"))?;
            let config = solve_config(a.dmax, a.grid, false);
            config.validate()?;
            let res = solve(net, m, &config)?;
            Ok((res.params.clone(), Some(res)))
        }
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome> {
    let sizes = parse_sizes(&a.n)?;
    if a.dmax < 1 {
        bail!("--dmax must be at least 1");
    }
    if !a.param_grid.is_empty() {
        return sweep_grid(a, &sizes);
    }
    let [n] = sizes[..] else {
        bail!("--delay-curve and --away-sequence take a single --n");
    };
    let net = build_network(a.family, n)?;
    let (params, solved) = sweep_patrol(a, &net)?;
    let t = build_matrix(&net, &params)?;
    let node = match (&a.node, &solved) {
        (Some(label), _) => net.node_by_label(label)?,
        (None, Some(res)) => res.attacker_node,
        (None, None) => 0,
    };
    if a.delay_curve {
        let m = a.m.ok_or_else(|| anyhow!("--delay-curve needs --m"))?;
        emit(&interception_curve(&t, node, m, a.dmax)?.to_csv())?;
    } else {
        let seq = away_sequence(&t, node, a.dmax);
        let mut out = String::from("t");
        for label in net.labels() {
            out.push_str(&format!(",x_{label}"));
        }
        out.push('\n');
        for step in &seq.steps {
            out.push_str(&step.t.to_string());
            for p in &step.probs {
                out.push(',');
                out.push_str(&sig17(*p));
            }
            out.push('\n');
        }
        emit(&out)?;
        if let Some(t) = seq.absorbed_at {
            eprintln!("note: the away chain absorbs at t={t}; later rows are unreachable");
        }
    }
    Ok(Outcome::Ok)
}

fn sweep_grid(a: &SweepArgs, sizes: &[usize]) -> Result<Outcome> {
    let m = a.m.ok_or_else(|| anyhow!("--param-grid needs --m"))?;
    let names: Vec<&str> = a.param_grid.iter().map(|g| g.name.as_str()).collect();
    let points = cartesian(&a.param_grid);
    let mut out = format!("n,{},node,delay,value\n", names.join(","));
    for &n in sizes {
        let net = build_network(a.family, n)?;
        let space = param_space(&net);
        let idx = names
            .iter()
            .map(|name| {
                space.index_of(name).ok_or_else(|| {
                    anyhow!(
                        "{} n={n} has no parameter `{name}` (expected one of {})",
                        a.family,
                        space.names.join(", ")
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let base = match &a.params {
            Some(spec) => parse_params(&net, spec)?,
            None => PatrolParams::random_walk(&net),
        }
        .to_vec();
        for point in &points {
            let mut x = base.clone();
            for (&i, &v) in idx.iter().zip(point) {
                x[i] = v;
            }
            let cells: Vec<String> = point.iter().map(|v| sig17(*v)).collect();
            // Points outside the parameter space or with no reachable attack stay in the grid as NaN.
            let response = PatrolParams::from_vec(&net, &x)
                .and_then(|p| build_matrix(&net, &p))
                .and_then(|t| best_response(&net, &t, m, a.dmax, None));
            let tail = match response {
                Ok(br) => format!("{},{},{}", net.label(br.node), br.delay, sig17(br.value)),
                Err(_) => ",,nan".to_owned(),
            };
            out.push_str(&format!("{n},{},{tail}\n", cells.join(",")));
        }
    }
    emit(&out)?;
    Ok(Outcome::Ok)
}

/// Wraps the default solver and shifts every value, so the failure path can be exercised.
struct Perturbed {
    inner: DefaultSolver,
    delta: f64,
}

impl TableSolver for Perturbed {
    fn solve(&self, network: &Network, m: usize) -> patrol_core::Result<SolveResult> {
        let mut res = self.inner.solve(network, m)?;
        res.value += self.delta;
        Ok(res)
    }
}

fn cmd_table(a: &TableArgs) -> Result<Outcome> {
    let data = ReferenceData::builtin();
    if !data.ids().contains(&a.id) {
        bail!("no table {} (available: {:?})", a.id, data.ids());
    }
    let solver = Perturbed {
        inner: DefaultSolver::default(),
        delta: a.perturb,
    };
    let report = reproduce_table(a.id, &solver, &data)?;
    if a.json {
        json_line(&report)?;
    } else {
        emit(&table_text(&report))?;
    }
    let failures = report.failures();
    if failures.is_empty() {
        return Ok(Outcome::Ok);
    }
    for (key, reason) in &failures {
        eprintln!("FAILED {key}: {reason}");
    }
    Ok(Outcome::Failed)
}

fn table_text(report: &TableReport) -> String {
    use patrol_core::tables::TableRows;
    let mut s = format!("table {}: {}\n", report.id, report.title);
    match &report.rows {
        TableRows::Optimum(rows) => {
            for r in rows {
                let params: Vec<String> = r.params.iter().map(|v| format!("{v:.4}")).collect();
                s.push_str(&format!(
                    "{:<5} params ({})  d={}{}  value {:.6} (printed {:.4}, dev {:.1e}){}  {}\n",
                    r.key,
                    params.join(", "),
                    r.delay,
                    r.printed_delay
                        .map(|d| format!(" (printed {d})"))
                        .unwrap_or_default(),
                    r.value,
                    r.printed_value,
                    r.value_dev,
                    r.limit
                        .map(|l| format!("  limit {l:.6}"))
                        .unwrap_or_default(),
                    if r.passed() { "ok" } else { "FAIL" },
                ));
            }
        }
        TableRows::Dominance(rows) => {
            for r in rows {
                let nodes: Vec<String> = r
                    .nodes
                    .iter()
                    .map(|n| {
                        format!(
                            "node {} d={} {:.6} (printed {:.4})",
                            n.label, n.delay, n.value, n.printed_value
                        )
                    })
                    .collect();
                s.push_str(&format!(
                    "{:<5} {}  {}\n",
                    r.key,
                    nodes.join("; "),
                    if r.failures.is_empty() { "ok" } else { "FAIL" }
                ));
            }
        }
    }
    s.push_str(&format!(
        "max value deviation {:.3e}, max parameter deviation {:.3e}: {}\n",
        report.max_value_dev,
        report.max_param_dev,
        if report.passed { "PASS" } else { "FAIL" }
    ));
    s
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome> {
    let config = SimConfig {
        trials: a.trials,
        seed: a.seed,
        burn_in: a.burn_in,
        max_periods: a.max_periods,
    };
    let (estimate, analytic) = if let Some(kind) = a.extension {
        let response = a
            .response
            .ok_or_else(|| anyhow!("--response is required with --extension"))?
            .0;
        let x: Vec<f64> = a
            .params
            .split(',')
            .map(parse_number)
            .collect::<Result<_>>()?;
        let ext = match (kind, &x[..]) {
            (ExtensionKind::Memory, &[p, s]) => {
                Extension::MemoryStar(MemoryStarChain::new(a.n.unwrap_or(3), p, s)?)
            }
            (ExtensionKind::Vision, &[p, q, r]) => Extension::VisionE4(VisionChain::new(p, q, r)?),
            (ExtensionKind::Memory, _) => bail!("memory extension takes --params p,s"),
            (ExtensionKind::Vision, _) => bail!("vision extension takes --params p,q,r"),
        };
        let est = simulate_extension(&ext, &response, &config)?;
        (est, extension_exact(&ext, &response)?)
    } else {
        let family = a.family.expect("clap enforces family or extension");
        let net = network(family, a.n)?;
        let params = parse_params(&net, &a.params)?;
        let t = build_matrix(&net, &params)?;
        let delay = a
            .delay
            .ok_or_else(|| anyhow!("--delay is required with --family"))?;
        let m =
            a.m.ok_or_else(|| anyhow!("--m is required with --family"))?;
        let plan = AttackPlan::new(net.node_by_label(&a.node)?, delay, m)?;
        let est = simulate(&t, &plan, &config)?;
        (est, intercept_prob(&t, &plan)?)
    };
    let z = estimate.z_score(analytic);
    if a.json {
        let mut doc = serde_json::to_value(&estimate)?;
        doc["analytic"] = serde_json::to_value(patrol_core::format::Sig17(analytic))?;
        doc["z"] = serde_json::to_value(patrol_core::format::Sig17(z))?;
        json_line(&doc)?;
    } else {
        emit(&format!(
            "p_hat          {}\nstderr         {}\nanalytic       {}\nz              {:.3}\ntrials         {} ({} truncated)\nseed           {} ({})\n",
            sig17(estimate.p_hat),
            sig17(estimate.stderr),
            sig17(analytic),
            z,
            estimate.trials,
            estimate.truncated,
            estimate.seed,
            estimate.rng,
        ))?;
    }
    Ok(Outcome::Ok)
}

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome> {
    let opts = VerifyOptions {
        mc_trials: a.trials,
        seed: a.seed,
        ..VerifyOptions::default()
    };
    if a.trials == 0 {
        bail!("--trials must be positive");
    }
    let suites: Vec<Suite> = match a.suite {
        Some(s) => vec![s],
        None => Suite::ALL.to_vec(),
    };
    let mut reports = Vec::new();
    for suite in suites {
        reports.push(run_suite(suite, &opts)?);
    }
    if a.json {
        json_line(&reports)?;
    } else {
        let mut s = String::new();
        for r in &reports {
            s.push_str(&format!("suite {}\n", r.suite));
            for c in &r.checks {
                s.push_str(&format!(
                    "  {} {}: {}\n",
                    if c.passed { "ok  " } else { "FAIL" },
                    c.name,
                    c.detail
                ));
            }
        }
        emit(&s)?;
    }
    let failed: Vec<String> = reports
        .iter()
        .flat_map(|r| {
            r.checks
                .iter()
                .filter(|c| !c.passed)
                .map(move |c| format!("{}: {}", r.suite, c.name))
        })
        .collect();
    if failed.is_empty() {
        return Ok(Outcome::Ok);
    }
    for f in &failed {
        eprintln!("FAILED {f}");
    }
    Ok(Outcome::Failed)
}
