use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn gfcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gfcalc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("stderr is JSON")
}

#[test]
fn derivative_of_x_equals_one() {
    let o = gfcalc(&["dist", "eq", "((1),x)", "((0),1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "true");
}

#[test]
fn unequal_distributions_still_exit_zero() {
    let o = gfcalc(&["dist", "eq", "((1),ramp)", "((0),1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "false");
}

#[test]
fn delta_pairing_is_exact() {
    // <D^2 ramp, phi> = phi(0) = 1
    let o = gfcalc(&["dist", "pair", "((2),ramp)", "(1-x^2)^2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1");
    let o = gfcalc(&["--json", "dist", "pair", "((1),ramp)", "(1-x^2)^2"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // <H, phi> = int_0^1 (1-x^2)^2 = 8/15
    assert_eq!(v["pairing"], "8/15");
    let o = gfcalc(&["--float", "dist", "pair", "((1),ramp)", "(1-x^2)^2"]);
    let f: f64 = stdout(&o).trim().parse().unwrap();
    assert!((f - 8.0 / 15.0).abs() < 1e-15);
}

#[test]
fn ring_suite_passes() {
    let o = gfcalc(&["--json", "verify", "ring", "--cases", "200"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], true);
    assert!(v["note"].as_str().unwrap().contains("falsification"));
}

#[test]
fn verification_failure_exits_one() {
    let o = gfcalc(&["verify", "q-laws", "--violation"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("C -> A is not an inclusion"));
    assert_eq!(gfcalc(&["verify", "q-laws"]).status.code(), Some(0));
    assert_eq!(gfcalc(&["verify", "tau"]).status.code(), Some(0));
    assert_eq!(gfcalc(&["verify", "tau", "--instance", "killing"]).status.code(), Some(1));
}

#[test]
fn psi_into_the_identity_target() {
    let o = gfcalc(&["--json", "verify", "psi", "--alpha-cap", "2", "--d-cap", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["report"]["pass"], true);
    assert!(v["sections"].as_u64().unwrap() > 0);
}

#[test]
fn usage_errors_exit_two_with_json() {
    let o = gfcalc(&["dist", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "usage");

    let o = gfcalc(&["dist", "new", "((1),x+"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"]["kind"], "parse");

    let o = gfcalc(&["--domain=1,0", "dist", "new", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_one_with_json() {
    let o = gfcalc(&["sheaf", "glue", r#"{"cover":["-1,1/2","0,1"],"sections":["((1),ramp)","((0),2)"]}"#]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "incompatible");
}

#[test]
fn gluing_heaviside_pieces() {
    let o = gfcalc(&["--json", "sheaf", "glue", r#"{"cover":["-1,1/2","0,1"],"sections":["((1),ramp)","((0),1)"]}"#]);
    assert_eq!(o.status.code(), Some(0));
    let glued = stdout(&o);
    let o = gfcalc(&["dist", "eq", glued.trim(), "((1),ramp)"]);
    assert_eq!(stdout(&o).trim(), "true");
}

#[test]
fn json_output_round_trips() {
    for src in ["((1),abs)", "((2),ramp(x - 1/3))", "x^2/2 - 3"] {
        let first = stdout(&gfcalc(&["--json", "dist", "new", src]));
        let second = stdout(&gfcalc(&["--json", "dist", "new", first.trim()]));
        assert_eq!(first, second, "{src}");
    }
    let first = stdout(&gfcalc(&["--json", "gn", "eval", "3*rho^-2 + rho^2/2 + O(rho^3)"]));
    let second = stdout(&gfcalc(&["--json", "gn", "eval", first.trim()]));
    assert_eq!(first, second);
}

#[test]
fn embedded_delta_at_the_origin() {
    let o = gfcalc(&["gsf", "eval", "((2),ramp)", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "[109395/65536*rho^-1]");
    let o = gfcalc(&["gsf", "eval", "((2),ramp)", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_json(&o)["error"]["kind"], "outside_domain");
}

#[test]
fn class_equality_of_regularizations() {
    let o = gfcalc(&["gsf", "class-eq", "((2),x^2/2)", "((0),1)"]);
    assert_eq!(stdout(&o).trim(), "equal");
    let o = gfcalc(&["gsf", "class-eq", "((1),ramp)", "((0),ramp)"]);
    assert_eq!(stdout(&o).trim(), "different");
}

#[test]
fn regularization_csv_shape() {
    let o = gfcalc(&["plot", "reg", "((1),ramp)", "--eps", "1e-2,1e-3", "--grid", "201"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "eps,x,value");
    assert_eq!(lines.len(), 1 + 2 * 201);
    // the midpoint of the grid is x = 0, where the regularized step is 1/2
    assert_eq!(lines[101], "0.01,0,0.5");
}

#[test]
fn seeded_runs_are_deterministic() {
    let args = ["--json", "--seed", "7", "--level", "5", "sheaf", "laws", "--cases", "40"];
    let (a, b) = (gfcalc(&args), gfcalc(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn workspace_bindings() {
    let path: PathBuf = [env!("CARGO_TARGET_TMPDIR"), "gfcalc-ws-test.json"].iter().collect();
    let _ = std::fs::remove_file(&path);
    let ws = path.to_str().unwrap();
    let o = gfcalc(&["--workspace", ws, "--bind", "h", "dist", "derive", "ramp"]);
    assert_eq!(o.status.code(), Some(0));
    let o = gfcalc(&["--workspace", ws, "dist", "eq", "@h", "((1),ramp)"]);
    assert_eq!(stdout(&o).trim(), "true");
    let o = gfcalc(&["--workspace", ws, "dist", "pair", "@h", "(1-x^2)^2"]);
    assert_eq!(stdout(&o).trim(), "8/15");
    let o = gfcalc(&["--workspace", ws, "dist", "new", "@missing"]);
    assert_eq!(o.status.code(), Some(2));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved["config"]["level"], 4);
    assert!(saved["bindings"]["h"].is_object());
}
