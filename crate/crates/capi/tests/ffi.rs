//! Exercises the C ABI from Rust: status codes, handle lifecycles, raw
//! solver arrays and the generated header.

use std::ffi::{CStr, CString};
use std::ptr;

use sealbid_capi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(sb_last_error()).to_string_lossy().into_owned() }
}

fn take_string(ptr: *mut std::ffi::c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr).to_string_lossy().into_owned() };
    unsafe { sb_string_free(ptr) };
    s
}

const TINY: &str = r#"
version = 1
scenario_id = "ffi-tiny"
seed = 3

[auction]
threshold = 1
authorities = 1
denominations = [10, 20]

[[items]]
characteristics = [5]
reservation_price = 2

[[bidders]]
kind = "general"
constraints = [5]
budget = 10

[[bidders]]
kind = "specific"
valuations = [[1, 15]]
deposit = 20
"#;

#[test]
fn scenario_parse_run_report_roundtrip() {
    let text = CString::new(TINY).unwrap();
    let mut scenario: *mut SbScenario = ptr::null_mut();
    assert_eq!(
        unsafe { sb_scenario_parse(text.as_ptr(), &mut scenario) },
        SbStatus::SbOk
    );

    let mut toml_out: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { sb_scenario_to_toml(scenario, &mut toml_out) },
        SbStatus::SbOk
    );
    assert!(take_string(toml_out).contains("ffi-tiny"));

    let mut report: *mut SbReport = ptr::null_mut();
    assert_eq!(
        unsafe { sb_scenario_run(scenario, &mut report) },
        SbStatus::SbOk
    );

    let mut json_out: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { sb_report_to_json(report, &mut json_out) },
        SbStatus::SbOk
    );
    let json = take_string(json_out);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["scenario_id"], "ffi-tiny");
    assert_eq!(value["bidders_revealed"], 2);

    let mut text_out: *mut std::ffi::c_char = ptr::null_mut();
    assert_eq!(
        unsafe { sb_report_render(report, false, &mut text_out) },
        SbStatus::SbOk
    );
    assert!(take_string(text_out).contains("final score"));

    unsafe {
        sb_report_free(report);
        sb_scenario_free(scenario);
    }
}

#[test]
fn parse_errors_set_status_and_message() {
    let bad = CString::new("version = [").unwrap();
    let mut scenario: *mut SbScenario = ptr::null_mut();
    assert_eq!(
        unsafe { sb_scenario_parse(bad.as_ptr(), &mut scenario) },
        SbStatus::SbErrParse
    );
    assert!(!last_error().is_empty());
    assert_eq!(
        unsafe { sb_scenario_parse(ptr::null(), &mut scenario) },
        SbStatus::SbErrNullPointer
    );
}

#[test]
fn generate_and_run() {
    let mut scenario: *mut SbScenario = ptr::null_mut();
    assert_eq!(
        unsafe { sb_scenario_generate(5, 3, 8, &mut scenario) },
        SbStatus::SbOk
    );
    let mut report: *mut SbReport = ptr::null_mut();
    assert_eq!(
        unsafe { sb_scenario_run(scenario, &mut report) },
        SbStatus::SbOk
    );
    unsafe {
        sb_report_free(report);
        sb_scenario_free(scenario);
    }
}

#[test]
fn raw_solver_and_audit() {
    // Two bidders, one item, second-price outcome.
    let valuations: [u64; 4] = [0, 10, 0, 7];
    let reservations: [u64; 1] = [0];
    let mut assignment = [0u32; 2];
    let mut prices = [0u64; 2];
    let mut score = 0i64;
    assert_eq!(
        unsafe {
            sb_solve(
                valuations.as_ptr(),
                2,
                reservations.as_ptr(),
                1,
                assignment.as_mut_ptr(),
                prices.as_mut_ptr(),
                &mut score,
            )
        },
        SbStatus::SbOk
    );
    assert_eq!(assignment, [1, 0]);
    assert_eq!(prices, [0, 7]);
    assert_eq!(score, 3);

    // The solver's own output audits clean and is buyer-optimal.
    let mut proof: *mut std::ffi::c_char = ptr::null_mut();
    let mut optimal = false;
    assert_eq!(
        unsafe {
            sb_audit(
                valuations.as_ptr(),
                2,
                reservations.as_ptr(),
                1,
                assignment.as_ptr(),
                prices.as_ptr(),
                score,
                &mut proof,
                &mut optimal,
            )
        },
        SbStatus::SbOk
    );
    assert!(proof.is_null());
    assert!(optimal);

    // A skewed score produces a JSON proof.
    assert_eq!(
        unsafe {
            sb_audit(
                valuations.as_ptr(),
                2,
                reservations.as_ptr(),
                1,
                assignment.as_ptr(),
                prices.as_ptr(),
                score + 1,
                &mut proof,
                &mut optimal,
            )
        },
        SbStatus::SbOk
    );
    let json = take_string(proof);
    assert!(json.contains("wrong_score"), "{json}");
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/sealbid.h"
    ))
    .expect("header generated by build script");
    for symbol in [
        "typedef struct SbScenario SbScenario;",
        "typedef struct SbReport SbReport;",
        "sb_scenario_parse",
        "sb_scenario_generate",
        "sb_scenario_run",
        "sb_report_to_json",
        "sb_solve",
        "sb_audit",
        "sb_string_free",
        "sb_last_error",
    ] {
        assert!(header.contains(symbol), "missing {symbol}");
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    // Compile a small C client against the generated header and the cdylib.
    let manifest = env!("CARGO_MANIFEST_DIR");
    let target_dir = std::path::Path::new(manifest).join("../../target");
    let out_dir = std::env::temp_dir().join("sealbid-capi-ctest");
    std::fs::create_dir_all(&out_dir).unwrap();
    let c_path = out_dir.join("smoke.c");
    std::fs::write(
        &c_path,
        r#"
#include "sealbid.h"
#include <assert.h>
#include <stdio.h>

int main(void) {
    uint64_t v[4] = {0, 10, 0, 7};
    uint64_t r[1] = {0};
    uint32_t x[2];
    uint64_t p[2];
    int64_t s;
    SbStatus status = sb_solve(v, 2, r, 1, x, p, &s);
    assert(status == SbOk);
    assert(x[0] == 1 && x[1] == 0);
    assert(p[1] == 7);
    assert(s == 3);
    printf("ok\n");
    return 0;
}
"#,
    )
    .unwrap();

    // Find the built library next to the test binary.
    let profile_dir = {
        let exe = std::env::current_exe().unwrap();
        exe.parent().unwrap().parent().unwrap().to_path_buf()
    };
    let lib = profile_dir.join("libsealbid_capi.so");
    if !lib.exists() {
        // Static fallback keeps the test meaningful on other layouts.
        assert!(
            profile_dir.join("libsealbid_capi.a").exists(),
            "no built C library found in {profile_dir:?}"
        );
    }
    let bin = out_dir.join("smoke");
    let status = std::process::Command::new("cc")
        .arg(&c_path)
        .arg("-I")
        .arg(std::path::Path::new(manifest).join("include"))
        .arg("-L")
        .arg(&profile_dir)
        .arg("-lsealbid_capi")
        .arg("-o")
        .arg(&bin)
        .status()
        .expect("cc available");
    assert!(status.success(), "C client failed to compile/link");
    let run = std::process::Command::new(&bin)
        .env("LD_LIBRARY_PATH", &profile_dir)
        .output()
        .expect("smoke binary runs");
    assert!(run.status.success());
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
    let _ = target_dir;
}
