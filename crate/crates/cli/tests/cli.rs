//! End-to-end tests of the `rsvd` binary.

use std::process::{Command, Output};

use serde_json::Value;

fn rsvd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsvd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check"] == name)
        .unwrap_or_else(|| panic!("no check {name}"))
}

#[test]
fn eval_reports_first_coefficient_anchor() {
    let out = rsvd(&["eval", "--n", "2", "--mu", "1", "--nu", "1", "--kappa", "0.5", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert!(num(&r["transform_residuals"]["k1_plus_2h"]) <= 1e-10);
    assert_eq!(r["config"]["command"], "eval");
    assert_eq!(r["config"]["seed"], 1);
    assert_eq!(r["K_family"].as_array().unwrap().len(), 5);
    assert_eq!(r["q_actions"].as_array().unwrap().len(), 2);
    let h = num(&r["H"]);
    assert!((num(&r["K_family"][1]) + 2.0 * h).abs() <= 1e-10 * (1.0 + 2.0 * h));
}

#[test]
fn eval_single_particle_hand_value() {
    let out = rsvd(&["eval", "--point", "1;0", "--mu", "1", "--nu", "1", "--kappa", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let h = num(&json(&out)["H"]);
    assert!((h - 2f64.sqrt()).abs() <= 1e-9, "H = {h}");
}

#[test]
fn eval_rejects_zero_coupling() {
    let out = rsvd(&["eval", "--mu", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "ZeroCoupling");
}

#[test]
fn eval_rejects_bad_points() {
    let out = rsvd(&["eval", "--point", "1,2;0,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "OrderingViolation");
    let out = rsvd(&["eval", "--nu", "1", "--kappa", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "SignViolation");
}

#[test]
fn eval_spectral_route_beyond_direct_cap() {
    let out = rsvd(&["eval", "--n", "12", "--seed", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rsvd(&["eval", "--n", "12", "--seed", "4", "--spectral-only"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["h_family_route"], "spectral");
    assert_eq!(r["H_family"].as_array().unwrap().len(), 13);
}

#[test]
fn verify_default_run_passes() {
    let out = rsvd(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    assert_eq!(r["points"], 200);
    assert_eq!(r["config"]["samples"], 50);
    assert!(num(&check(&r, "equivalence")["max_residual"]) <= 1e-9);
}

#[test]
fn verify_detects_injected_fault() {
    let out = rsvd(&["verify", "--perturb", "1e-3", "--samples", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json(&out);
    assert_eq!(r["passed"], false);
    assert!(num(&check(&r, "equivalence")["max_residual"]) >= 1e-4);
    assert!(r["failing_checks"].as_array().unwrap().contains(&Value::from("equivalence")));
}

#[test]
fn verify_with_brackets() {
    let out = rsvd(&["verify", "--include-brackets", "--samples", "5", "--n-max", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let b = check(&r, "brackets");
    assert_eq!(b["points_evaluated"], 15);
    assert!(num(&b["max_residual"]) <= 1e-8);
}

#[test]
fn verify_is_deterministic() {
    let a = rsvd(&["verify", "--samples", "7", "--seed", "9"]);
    let b = rsvd(&["verify", "--samples", "7", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_rejects_large_n() {
    assert_eq!(rsvd(&["verify", "--n-max", "7"]).status.code(), Some(2));
    assert_eq!(rsvd(&["verify", "--mu", "1"]).status.code(), Some(2));
}

#[test]
fn identities_up_to_thirty() {
    let out = rsvd(&["identities", "--n-max", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["passed"], true);
    for c in r["checks"].as_array().unwrap() {
        assert!(c["failures"].as_array().unwrap().is_empty(), "{}", c["identity"]);
        assert!(c["cells_checked"].as_u64().unwrap() > 0);
    }
}

#[test]
fn identities_prints_small_matrices() {
    let out = rsvd(&["identities", "--n-max", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let m = &json(&out)["matrices"][0];
    let expected: Value = serde_json::from_str("[[1,0],[2,1]]").unwrap();
    assert_eq!(m["forward"], expected);
    assert_eq!(m["inverse"], expected);
}

#[test]
fn identities_rejects_zero() {
    let out = rsvd(&["identities", "--n-max", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "InvalidArgument");
}

#[test]
fn flow_two_particles() {
    let out = rsvd(&["flow", "--n", "2", "--t-end", "50", "--tol", "1e-10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert!(num(&r["k_drift"]) <= 1e-8);
    assert!(num(&r["q_agreement"]) <= 1e-2);
    assert!(num(&r["q_agreement"]) < num(&r["q_agreement_at_checkpoint"]["value"]));
    assert_eq!(r["stabilized"], true);
}

#[test]
fn flow_rejects_negative_time() {
    let out = rsvd(&["flow", "--t-end", "-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flow_csv_layout() {
    let out = rsvd(&["flow", "--n", "1", "--t-end", "20", "--csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,lambda_1,theta_1,H,K_1"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 10);
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows.last().unwrap()[0], 20.0);
    let summary: Value = serde_json::from_slice(&out.stderr).expect("summary on stderr");
    assert_eq!(summary["config"]["command"], "flow");
}

#[test]
fn bench_residuals_within_tolerance() {
    let out = rsvd(&["bench", "--n-min", "2", "--n-max", "6", "--repeats", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,direct_seconds,spectral_seconds,residual"));
    let mut count = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(cells[3].parse::<f64>().unwrap() <= 1e-9);
        count += 1;
    }
    assert_eq!(count, 5);
}

#[test]
fn bench_single_route() {
    let out = rsvd(&["bench", "--n-min", "2", "--n-max", "4", "--routes", "spectral", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    for row in r["rows"].as_array().unwrap() {
        assert!(row["direct_seconds"].is_null());
        assert!(row["spectral_seconds"].as_f64().is_some());
        assert!(row["residual"].is_null());
    }
    assert_eq!(r["config"]["routes"], "spectral");
}
