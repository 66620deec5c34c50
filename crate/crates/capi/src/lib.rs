//! C ABI for the auction simulator.
//!
//! Scenarios and reports travel as opaque handles; strings cross the
//! boundary as NUL-terminated UTF-8 owned by this library and released with
//! [`sb_string_free`]. Every fallible call returns an [`SbStatus`]; on
//! failure [`sb_last_error`] describes what went wrong (thread-local, valid
//! until the next failing call on that thread).
//!
//! Raw solver access works on plain arrays: a row-major valuation matrix of
//! `bidders x (items + 1)` with column 0 the null item, and a reservation
//! price per real item.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sealbid::market::{Item, ValuationMatrix};
use sealbid::scenario::{
    generate_storage_workload, parse_scenario, run_scenario_full, PriceModel, RunReport,
    ScenarioFile,
};
use sealbid::solver::{run_vda, Assignment, PriceVector, Solution, VdaConfig};
use sealbid::verifier;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SbStatus {
    SbOk = 0,
    SbErrNullPointer = 1,
    SbErrUtf8 = 2,
    SbErrParse = 3,
    SbErrRun = 4,
    SbErrTooLarge = 5,
    SbErrPanic = 6,
}

/// Opaque scenario handle.
pub struct SbScenario {
    inner: ScenarioFile,
}

/// Opaque report handle.
pub struct SbReport {
    inner: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<Vec<u8>>) {
    let owned = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = owned);
}

/// Message of the last failing call on this thread. Never null; empty when
/// no error occurred. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn sb_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded(f: impl FnOnce() -> SbStatus) -> SbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            SbStatus::SbErrPanic
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, SbStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(SbStatus::SbErrNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        SbStatus::SbErrUtf8
    })
}

fn string_out(out: *mut *mut c_char, value: String) -> SbStatus {
    let owned = match CString::new(value) {
        Ok(s) => s,
        Err(_) => {
            set_error("output contained an interior NUL");
            return SbStatus::SbErrRun;
        }
    };
    unsafe { *out = owned.into_raw() };
    SbStatus::SbOk
}

/// Parses a scenario document (TOML). On success the handle must be
/// released with [`sb_scenario_free`].
///
/// # Safety
/// `toml_text` must point to a NUL-terminated string and `out` to writable
/// pointer storage.
#[no_mangle]
pub unsafe extern "C" fn sb_scenario_parse(
    toml_text: *const c_char,
    out: *mut *mut SbScenario,
) -> SbStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output argument");
            return SbStatus::SbErrNullPointer;
        }
        let text = match str_arg(toml_text) {
            Ok(t) => t,
            Err(status) => return status,
        };
        match parse_scenario(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SbScenario { inner }));
                SbStatus::SbOk
            }
            Err(e) => {
                set_error(e.to_string());
                SbStatus::SbErrParse
            }
        }
    })
}

/// Generates a storage-market scenario with default price parameters.
///
/// # Safety
/// `out` must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn sb_scenario_generate(
    seed: u64,
    items: u32,
    bidders: u32,
    out: *mut *mut SbScenario,
) -> SbStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output argument");
            return SbStatus::SbErrNullPointer;
        }
        let inner = generate_storage_workload(
            seed,
            items as usize,
            bidders as usize,
            &PriceModel::default(),
        );
        *out = Box::into_raw(Box::new(SbScenario { inner }));
        SbStatus::SbOk
    })
}

/// Serializes a scenario back to TOML.
///
/// # Safety
/// `scenario` must be a live handle from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_scenario_to_toml(
    scenario: *const SbScenario,
    out: *mut *mut c_char,
) -> SbStatus {
    guarded(|| {
        if scenario.is_null() || out.is_null() {
            set_error("null argument");
            return SbStatus::SbErrNullPointer;
        }
        match toml::to_string_pretty(&(*scenario).inner) {
            Ok(text) => string_out(out, text),
            Err(e) => {
                set_error(e.to_string());
                SbStatus::SbErrRun
            }
        }
    })
}

/// Runs a scenario end to end. On success the report handle must be
/// released with [`sb_report_free`].
///
/// # Safety
/// `scenario` must be a live handle from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_scenario_run(
    scenario: *const SbScenario,
    out: *mut *mut SbReport,
) -> SbStatus {
    guarded(|| {
        if scenario.is_null() || out.is_null() {
            set_error("null argument");
            return SbStatus::SbErrNullPointer;
        }
        match run_scenario_full(&(*scenario).inner) {
            Ok((report, _ledger)) => {
                *out = Box::into_raw(Box::new(SbReport { inner: report }));
                SbStatus::SbOk
            }
            Err(e) => {
                set_error(e.to_string());
                SbStatus::SbErrRun
            }
        }
    })
}

/// Serializes a report to JSON.
///
/// # Safety
/// `report` must be a live handle from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_report_to_json(
    report: *const SbReport,
    out: *mut *mut c_char,
) -> SbStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return SbStatus::SbErrNullPointer;
        }
        match serde_json::to_string(&(*report).inner) {
            Ok(json) => string_out(out, json),
            Err(e) => {
                set_error(e.to_string());
                SbStatus::SbErrRun
            }
        }
    })
}

/// Renders the human-readable report; timings included when
/// `include_timings` is nonzero.
///
/// # Safety
/// `report` must be a live handle from this library; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sb_report_render(
    report: *const SbReport,
    include_timings: bool,
    out: *mut *mut c_char,
) -> SbStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            set_error("null argument");
            return SbStatus::SbErrNullPointer;
        }
        string_out(out, (*report).inner.render(include_timings))
    })
}

unsafe fn instance_from_raw(
    valuations: *const u64,
    bidders: u32,
    reservations: *const u64,
    items: u32,
) -> Result<(ValuationMatrix, Vec<Item>), SbStatus> {
    if (valuations.is_null() && bidders > 0) || (reservations.is_null() && items > 0) {
        set_error("null matrix argument");
        return Err(SbStatus::SbErrNullPointer);
    }
    let width = items as usize + 1;
    let mut matrix = ValuationMatrix::new(bidders as usize, items as usize);
    for b in 0..bidders as usize {
        for i in 0..width {
            let v = *valuations.add(b * width + i);
            if i == 0 && v != 0 {
                set_error("null-item valuation column must be zero");
                return Err(SbStatus::SbErrParse);
            }
            if i > 0 {
                matrix.set(b, i, v);
            }
        }
    }
    let items = (0..items as usize)
        .map(|i| Item::new(i as u32 + 1, Vec::new(), *reservations.add(i)))
        .collect();
    Ok((matrix, items))
}

/// Runs the descending-price solver on a raw instance. `assignment_out`
/// receives `bidders` entries (0 = unassigned), `prices_out` receives
/// `items + 1` entries (index 0 is the null item).
///
/// # Safety
/// `valuations` must hold `bidders * (items + 1)` values, `reservations`
/// `items` values; the output buffers must be writable at the sizes above.
#[no_mangle]
pub unsafe extern "C" fn sb_solve(
    valuations: *const u64,
    bidders: u32,
    reservations: *const u64,
    items: u32,
    assignment_out: *mut u32,
    prices_out: *mut u64,
    score_out: *mut i64,
) -> SbStatus {
    guarded(|| {
        if (assignment_out.is_null() && bidders > 0) || prices_out.is_null() || score_out.is_null()
        {
            set_error("null output argument");
            return SbStatus::SbErrNullPointer;
        }
        let (matrix, item_list) =
            match instance_from_raw(valuations, bidders, reservations, items) {
                Ok(x) => x,
                Err(status) => return status,
            };
        let solution = run_vda(&matrix, &item_list, &VdaConfig::default());
        for (b, x) in solution.assignment.iter().enumerate() {
            *assignment_out.add(b) = x;
        }
        for (i, p) in solution.prices.as_slice().iter().enumerate() {
            *prices_out.add(i) = *p;
        }
        *score_out = solution.score;
        SbStatus::SbOk
    })
}

/// Audits a solution against a raw instance. Writes a JSON misbehaviour
/// proof to `proof_json_out`, or null when the solution is sound;
/// `is_buyer_optimal_out` additionally reports whether it is the
/// buyer-optimal equilibrium.
///
/// # Safety
/// Array arguments as in [`sb_solve`]; `assignment` holds `bidders` values
/// and `prices` holds `items + 1` values; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn sb_audit(
    valuations: *const u64,
    bidders: u32,
    reservations: *const u64,
    items: u32,
    assignment: *const u32,
    prices: *const u64,
    score: i64,
    proof_json_out: *mut *mut c_char,
    is_buyer_optimal_out: *mut bool,
) -> SbStatus {
    guarded(|| {
        if proof_json_out.is_null()
            || is_buyer_optimal_out.is_null()
            || (assignment.is_null() && bidders > 0)
            || prices.is_null()
        {
            set_error("null argument");
            return SbStatus::SbErrNullPointer;
        }
        let (matrix, item_list) =
            match instance_from_raw(valuations, bidders, reservations, items) {
                Ok(x) => x,
                Err(status) => return status,
            };
        let solution = Solution {
            assignment: Assignment::new(
                (0..bidders as usize).map(|b| *assignment.add(b)).collect(),
            ),
            prices: PriceVector::new(
                (0..items as usize + 1).map(|i| *prices.add(i)).collect(),
            ),
            score,
        };
        match verifier::audit(&solution, &matrix, &item_list) {
            Some(proof) => {
                *is_buyer_optimal_out = false;
                match serde_json::to_string(&proof) {
                    Ok(json) => string_out(proof_json_out, json),
                    Err(e) => {
                        set_error(e.to_string());
                        SbStatus::SbErrRun
                    }
                }
            }
            None => {
                *proof_json_out = std::ptr::null_mut();
                *is_buyer_optimal_out = verifier::check_vcg(&solution, &matrix, &item_list);
                SbStatus::SbOk
            }
        }
    })
}

/// Releases a scenario handle.
///
/// # Safety
/// `scenario` must be null or a handle produced by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn sb_scenario_free(scenario: *mut SbScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Releases a report handle.
///
/// # Safety
/// `report` must be null or a handle produced by this library, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn sb_report_free(report: *mut SbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Releases a string produced by this library.
///
/// # Safety
/// `s` must be null or a string produced by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
