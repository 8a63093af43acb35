use std::process::{Command, Output};

use serde_json::Value;

fn wsaw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsaw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn sl_upper_example_holds() {
    let out = wsaw(&[
        "verify", "sl-upper", "--d", "2", "--lambda", "1", "--beta", "0.05", "--S", "box:0:1", "--Lambda",
        "box:0:3", "--x", "3,0", "--N", "14",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["verdict"], "Holds");
    assert_eq!(r["result"]["orientation"], "lhs <= rhs");
    assert_eq!(r["instance"]["N"], 14);
    assert_eq!(r["schema_version"], 1);
}

#[test]
fn usage_errors_exit_one() {
    let out = wsaw(&["green", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    let out = wsaw(&["phi", "--beta", "0.1", "--S", "ball:2", "--N", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ball:2"));
    let out = wsaw(&["chi", "--lambda", "1.5", "--beta", "0.1", "--N", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let out = wsaw(&["green", "--beta", "0.1", "--domain", "box:1", "--from", "5,5", "--N", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failing_verdict_exits_two() {
    // C = 1 is too small for (ℓ∞) at n = 0, where G(0,0) > 1
    let out = wsaw(&["verify", "bootstrap", "--beta", "0.1", "--C", "1", "--nmax", "1", "--N", "10"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["rows"][0]["linf_verdict"], "Fails");
}

#[test]
fn unbounded_upper_is_null() {
    let out = wsaw(&["chi", "--beta", "0.3", "--N", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(r["result"]["chi"]["upper"].is_null());
    assert_eq!(r["result"]["chi"]["rigorous"], false);
}

#[test]
fn scan_csv_has_one_row_per_beta() {
    let out = wsaw(&[
        "scan", "--d", "2", "--lambda", "1", "--beta-grid", "0.02:0.22:0.02", "--N", "10", "--emit", "chi,L",
        "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0], "beta,chi_lower,chi_upper,chi_rigorous,L,L_status,xi,xi_slope");
    let cols: Vec<&str> = lines[11].split(',').collect();
    assert_eq!(cols.len(), 8);
    assert_eq!(cols[0], "0.22");
}

#[test]
fn output_file_and_seed_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mc.json");
    let args = [
        "mc", "--lambda", "0.5", "--beta", "0.2", "--domain", "box:2", "--from", "0,0", "--to", "-1,1", "--nmax",
        "6", "--samples", "2000", "--seed", "11",
    ];
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let out = wsaw(&with_file);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let from_file: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let again = json(&wsaw(&args));
    assert_eq!(from_file["result"], again["result"]);
    assert_eq!(from_file["result"]["rng"], "chacha8");
}

#[test]
fn weights_report_counts() {
    let out = wsaw(&["verify", "weights", "--d", "3", "--lambda", "0.7", "--trials", "300", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["result"]["trials"], 300);
    assert_eq!(r["result"]["violations"], 0);
}

#[test]
fn srw_ruin_trace_ends_at_horizon() {
    let out = wsaw(&["srw", "ruin", "--d", "2", "--n", "0", "--steps", "500"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let trace = r["result"]["trace"].as_array().unwrap();
    assert_eq!(trace.last().unwrap()["steps"], 500);
    let v = r["result"]["value"].as_f64().unwrap();
    assert!(v > 0.9 && v < 1.0);
}
