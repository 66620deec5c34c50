//! Drives the installed binary end to end over the shipped fixtures.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sealbid"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("sealbid-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn run_reports_proof_acceptance_and_is_reproducible() {
    let run = || {
        let out = bin()
            .args(["run", "--zero-timings"])
            .arg(fixture("contested_solution.toml"))
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let first = run();
    assert!(first.contains("proof WrongPrice: accepted"), "{first}");
    assert!(first.contains("final score: 60"), "{first}");
    assert_eq!(first, run(), "report not byte-identical across runs");
}

#[test]
fn run_writes_csv_and_event_log() {
    let csv = tmp("run.csv");
    let events = tmp("run.ndjson");
    let _ = std::fs::remove_file(&csv);
    let out = bin()
        .arg("run")
        .arg(fixture("storage_market.toml"))
        .arg("--csv")
        .arg(&csv)
        .arg("--events")
        .arg(&events)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with(
        "scenario_id,B,I,avg_price,avg_net_valuation,solve_ms,audit_ms,gas_total\n"
    ));
    assert!(csv_text.lines().nth(1).unwrap().starts_with("storage-market,5,3,"));
    let log = std::fs::read_to_string(&events).unwrap();
    assert!(log.starts_with("{\"event_log_version\":1}\n"));
    for line in log.lines().skip(1) {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("height").is_some());
    }
    assert!(log.contains("\"event\":\"bid_revealed\""));
}

#[test]
fn generate_then_run_round_trips() {
    let path = tmp("generated.toml");
    let out = bin()
        .args(["generate", "--seed", "9", "--items", "4", "--bidders", "10", "-o"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin().arg("run").arg(&path).arg("--zero-timings").output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("revealed bidders: 10"));
}

#[test]
fn audit_flags_bad_solutions_and_passes_good_ones() {
    // The contested fixture's bad solution, as a standalone file.
    let bad = tmp("bad_solution.json");
    std::fs::write(
        &bad,
        r#"{"assignment": [1, 2, 3], "prices": [30, 40, 65], "score": 50}"#,
    )
    .unwrap();
    let out = bin()
        .args(["audit", "--scenario"])
        .arg(fixture("contested_solution.toml"))
        .arg("--solution")
        .arg(&bad)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("wrong_price"), "{stdout}");

    let good = tmp("good_solution.json");
    std::fs::write(
        &good,
        r#"{"assignment": [1, 2, 3], "prices": [20, 30, 70], "score": 60}"#,
    )
    .unwrap();
    let out = bin()
        .args(["audit", "--scenario"])
        .arg(fixture("contested_solution.toml"))
        .arg("--solution")
        .arg(&good)
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("no misbehaviour found"), "{stdout}");
    assert!(stdout.contains("buyer-optimal"), "{stdout}");
}

#[test]
fn gas_report_lists_operation_rows() {
    let out = bin()
        .arg("gas-report")
        .arg(fixture("storage_market.toml"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for op in ["Commit", "Reveal", "SubmitItem", "RevealMinPrice", "SubmitSolution", "total"] {
        assert!(stdout.contains(op), "missing {op} in:\n{stdout}");
    }
}

#[test]
fn keygen_writes_threshold_key_file() {
    let path = tmp("keys.json");
    let out = bin()
        .args(["keygen", "-t", "7", "-n", "10", "--seed", "1", "--denominations", "5,10", "-o"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entries = value.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["threshold"], 7);
    assert_eq!(entries[0]["shares"].as_array().unwrap().len(), 10);
}

#[test]
fn bench_emits_rows_for_each_size() {
    let out = bin()
        .args(["bench", "--bidders", "20,40", "--items", "5", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2, "{stdout}");
    assert!(stdout.lines().all(|l| l.split(',').count() == 8));
}

#[test]
fn malformed_scenario_fails_with_line_number() {
    let path = tmp("broken.toml");
    std::fs::write(&path, "version = 1\nscenario_id = \"x\"\nseed = }種\n").unwrap();
    let out = bin().arg("run").arg(&path).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");
}
