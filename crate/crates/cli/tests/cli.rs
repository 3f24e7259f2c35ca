use std::process::{Command, Output};

use serde_json::Value;

fn patrol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_patrol"))
        .args(args)
        .env_remove("PATROL_THREADS")
        .output()
        .expect("run patrol")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = patrol(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

#[test]
fn solve_line_four() {
    let doc = json(&[
        "solve", "--family", "line", "--n", "4", "--m", "4", "--json",
    ]);
    assert!((num(&doc["value"]) - 0.2960).abs() < 1e-3);
    assert_eq!(doc["D"], 15);
    assert_eq!(doc["attacker"]["node"], "1");
    assert_eq!(doc["attacker"]["delay"], 4);
    assert!((num(&doc["params"]["kappa"]) - 1.0).abs() < 1e-9);
    assert_eq!(doc["delay_curve"].as_array().unwrap().len(), 15);
    assert!(doc["diagnostics"]["evals"].as_u64().unwrap() > 0);
}

#[test]
fn solve_star_three_matches_closed_form() {
    let doc = json(&[
        "solve", "--family", "star", "--n", "3", "--m", "2", "--json",
    ]);
    let exact = 5.0 - 2.0 * 6f64.sqrt();
    assert!((num(&doc["value"]) - exact).abs() < 1e-9);
}

#[test]
fn solve_circle_five_m5() {
    let doc = json(&[
        "solve", "--family", "circle", "--n", "5", "--m", "5", "--json",
    ]);
    assert!((num(&doc["params"]["p"]) - 0.5).abs() < 1e-6);
    assert!((num(&doc["value"]) - 0.5).abs() < 1e-9);
}

#[test]
fn solve_csv_has_summary_header() {
    let out = patrol(&[
        "solve", "--family", "circle", "--n", "4", "--m", "3", "--csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,n,m,D,p,node,delay,value,limit_value");
    assert!(lines[1].starts_with("circle,4,3,15,0.5"));
    assert_eq!(lines.len(), 2);
}

#[test]
fn solve_star_in_circle_reports_indifference() {
    let doc = json(&[
        "solve",
        "--family",
        "star-in-circle",
        "--n",
        "4",
        "--m",
        "2",
        "--json",
    ]);
    assert!(num(&doc["indifference_gap"]) < 1e-3);
    assert!((num(&doc["value"]) - 0.1695).abs() < 1e-3);
}

#[test]
fn eval_examples() {
    let cases: [(&[&str], f64); 3] = [
        (
            &[
                "--family",
                "line",
                "--n",
                "4",
                "--params",
                "0.4974,0.4267,1",
                "--node",
                "2",
                "--delay",
                "2",
                "--m",
                "6",
            ],
            0.7207,
        ),
        (
            &[
                "--family", "circle", "--n", "4", "--params", "0.5", "--node", "1", "--delay", "1",
                "--m", "3",
            ],
            0.5,
        ),
        (
            &[
                "--family", "star", "--n", "3", "--params", "0,1", "--delay", "2", "--m", "2",
            ],
            0.0,
        ),
    ];
    for (args, expect) in cases {
        let mut full = vec!["eval"];
        full.extend_from_slice(args);
        let out = patrol(&full);
        assert!(out.status.success(), "{args:?}");
        let pi: f64 = stdout(&out).trim().parse().unwrap();
        assert!((pi - expect).abs() < 1e-4, "{args:?}: {pi}");
    }
}

#[test]
fn eval_json_with_matrix() {
    let doc = json(&[
        "eval", "--family", "star", "--n", "2", "--params", "p=0.25", "--node", "c", "--delay",
        "1", "--m", "2", "--json", "--matrix",
    ]);
    assert_eq!(doc["node"], "c");
    assert_eq!(doc["matrix"]["nodes"], serde_json::json!(["1", "2", "c"]));
    // s = 1, so a patroller who left the center is back one period later
    assert!((num(&doc["pi"]) - 1.0).abs() < 1e-15);
}

#[test]
fn sweep_star_peaks_near_one_fifth() {
    let out = patrol(&[
        "sweep",
        "--family",
        "star",
        "--n",
        "3",
        "--m",
        "2",
        "--param-grid",
        "p=0:0.333:0.01",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,p,node,delay,value"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            (cells[1].parse().unwrap(), cells[4].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 34);
    let best = rows
        .iter()
        .copied()
        .fold((0.0, f64::MIN), |a, b| if b.1 > a.1 { b } else { a });
    assert!((best.0 - 0.18).abs() < 0.025, "peak at p={}", best.0);
}

#[test]
fn sweep_over_sizes() {
    let out = patrol(&[
        "sweep",
        "--family",
        "star",
        "--n",
        "2..=8",
        "--m",
        "2",
        "--param-grid",
        "p=0:0.1:0.05",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 7 * 3);
}

#[test]
fn sweep_delay_curve() {
    let out = patrol(&[
        "sweep",
        "--family",
        "line",
        "--n",
        "4",
        "--m",
        "6",
        "--delay-curve",
        "--params",
        "0.4974,0.4267,1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,pi,reachable");
    assert_eq!(lines.len(), 17);
    assert!(lines[16].starts_with("inf,"));
    let values: Vec<f64> = lines[1..16]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let (argmin, _) =
        values
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    assert_eq!(argmin + 1, 4);
}

#[test]
fn sweep_away_sequence() {
    let out = patrol(&[
        "sweep",
        "--family",
        "circle",
        "--n",
        "4",
        "--away-sequence",
        "--params",
        "0.3",
        "--dmax",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x_1,x_2,x_3,x_4");
    assert_eq!(lines.len(), 6);
    for l in &lines[1..] {
        let total: f64 = l
            .split(',')
            .skip(1)
            .map(|c| c.parse::<f64>().unwrap())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn table_seven_passes() {
    let doc = json(&["table", "--id", "7", "--json"]);
    assert_eq!(doc["passed"], true);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn table_two_has_eight_rows() {
    let doc = json(&["table", "--id", "2", "--json"]);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 8);
    assert_eq!(doc["passed"], true);
}

#[test]
fn table_nine_checks_indifference() {
    let doc = json(&["table", "--id", "9", "--json"]);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    for row in rows {
        assert!(num(&row["indifference_gap"]) < 1e-3);
    }
}

#[test]
fn perturbed_table_exits_one_and_lists_rows() {
    let out = patrol(&["table", "--id", "7", "--perturb", "0.002"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(
        err.lines().filter(|l| l.starts_with("FAILED m=")).count(),
        4
    );
    let small = patrol(&["table", "--id", "7", "--perturb", "0.0005"]);
    assert_eq!(small.status.code(), Some(0));
}

#[test]
fn simulate_is_seeded() {
    let args = [
        "simulate", "--family", "circle", "--n", "4", "--params", "0.2929", "--delay", "2", "--m",
        "2", "--trials", "50000", "--seed", "11", "--json",
    ];
    let a = json(&args);
    let b = json(&args);
    assert_eq!(a, b);
    for key in ["p_hat", "stderr", "trials", "truncated", "seed"] {
        assert!(a.get(key).is_some(), "missing {key}");
    }
    assert_eq!(a["seed"], 11);
    assert!(num(&a["z"]) < 5.0);
}

#[test]
fn simulate_extensions() {
    let doc = json(&[
        "simulate",
        "--extension",
        "vision",
        "--params",
        "0.25,1/6,0.25",
        "--response",
        "center-attack",
        "--trials",
        "20000",
        "--json",
    ]);
    assert!((num(&doc["analytic"]) - 1.0 / 6.0).abs() < 1e-12);
    let doc = json(&[
        "simulate",
        "--extension",
        "memory",
        "--params",
        "0.3,0.22",
        "--response",
        "delay:2",
        "--trials",
        "20000",
        "--json",
    ]);
    assert!((num(&doc["analytic"]) - 0.131).abs() < 5e-4);
    assert!(num(&doc["z"]) < 5.0);
}

#[test]
fn verify_closed_forms_passes() {
    let out = patrol(&["verify", "--suite", "closed-forms"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn threads_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_patrol"))
        .args([
            "eval", "--family", "complete", "--n", "4", "--params", "1/3", "--delay", "1", "--m",
            "4",
        ])
        .env("PATROL_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let pi: f64 = stdout(&out).trim().parse().unwrap();
    assert!((pi - 19.0 / 27.0).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_two() {
    let cases: [&[&str]; 9] = [
        &[
            "solve", "--family", "line", "--n", "4", "--m", "4", "--bogus",
        ],
        &["solve", "--family", "hexagon", "--n", "4", "--m", "2"],
        &["solve", "--n", "4", "--m", "2"],
        &["solve", "--family", "line", "--n", "2", "--m", "2"],
        &[
            "eval", "--family", "star", "--n", "3", "--params", "0.9,1", "--delay", "2", "--m", "2",
        ],
        &[
            "eval", "--family", "star", "--n", "3", "--params", "0.1", "--delay", "2", "--m", "2",
        ],
        &[
            "sweep",
            "--family",
            "star",
            "--n",
            "3",
            "--m",
            "2",
            "--param-grid",
            "p=0:1",
        ],
        &["table", "--id", "1"],
        &[
            "simulate",
            "--extension",
            "memory",
            "--params",
            "0.3,0.2",
            "--response",
            "sideways:2",
        ],
    ];
    for args in cases {
        let out = patrol(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}
