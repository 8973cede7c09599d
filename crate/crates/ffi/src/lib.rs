//! C ABI over `auction-core`.
//!
//! Scenarios live behind an opaque [`AuctionScenario`] handle. Results come
//! back as NUL-terminated JSON strings that the caller releases with
//! [`auction_string_free`]. Every entry point returns an [`AuctionCode`];
//! on failure [`auction_last_error`] describes what went wrong on the calling
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use auction_core::lab::{
    compare_mechanisms, deviation_sweep, generate_scenario, update_reputation,
    verify_strategyproof, GenParams, ReputationState, Verdict, DEFAULT_GRID,
};
use auction_core::ledger::{self, clock_from_env, LedgerError};
use auction_core::market::{AuctionOutcome, Quality};
use auction_core::{run_auction, Mechanism, ProviderId, Scenario, StatusCode};

/// Result codes. Values 0 to 6 match the exit codes of the `auction` tool.
#[repr(i32)]
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum AuctionCode {
    Success = 0,
    Infeasible = 1,
    BudgetExceeded = 2,
    ValidationError = 3,
    IoError = 4,
    MonopolyProvider = 5,
    VerificationFailed = 6,
    /// A bug inside the library; the message names the panic.
    InternalError = 7,
}

impl From<StatusCode> for AuctionCode {
    fn from(code: StatusCode) -> Self {
        match code {
            StatusCode::Success => AuctionCode::Success,
            StatusCode::Infeasible => AuctionCode::Infeasible,
            StatusCode::BudgetExceeded => AuctionCode::BudgetExceeded,
            StatusCode::ValidationError => AuctionCode::ValidationError,
            StatusCode::IoError => AuctionCode::IoError,
            StatusCode::MonopolyProvider => AuctionCode::MonopolyProvider,
            StatusCode::VerificationFailed => AuctionCode::VerificationFailed,
        }
    }
}

/// Opaque validated scenario.
pub struct AuctionScenario(Scenario);

struct Fail {
    code: AuctionCode,
    message: String,
}

impl Fail {
    fn invalid(message: impl ToString) -> Fail {
        Fail {
            code: AuctionCode::ValidationError,
            message: message.to_string(),
        }
    }
}

impl From<LedgerError> for Fail {
    fn from(e: LedgerError) -> Fail {
        let code = match e {
            LedgerError::Corrupt { .. } | LedgerError::Io(_) => AuctionCode::IoError,
            _ => AuctionCode::ValidationError,
        };
        Fail {
            code,
            message: e.to_string(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn guard(f: impl FnOnce() -> Result<AuctionCode, Fail>) -> AuctionCode {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(code)) => code,
        Ok(Err(fail)) => {
            set_last_error(fail.message);
            fail.code
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal error: {what}"));
            AuctionCode::InternalError
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::invalid(format!("{name} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::invalid(format!("{name} is not UTF-8")))
}

unsafe fn scenario_arg<'a>(p: *const AuctionScenario) -> Result<&'a Scenario, Fail> {
    p.as_ref()
        .map(|h| &h.0)
        .ok_or_else(|| Fail::invalid("scenario handle is NULL"))
}

unsafe fn mechanism_arg(p: *const c_char) -> Result<Mechanism, Fail> {
    str_arg(p, "mechanism")?.parse().map_err(Fail::invalid)
}

unsafe fn grid_arg(p: *const u32, len: usize) -> Result<Vec<u32>, Fail> {
    match (p.is_null(), len) {
        (true, 0) => Ok(DEFAULT_GRID.to_vec()),
        (true, _) => Err(Fail::invalid("grid is NULL but grid_len is not 0")),
        (false, _) => Ok(std::slice::from_raw_parts(p, len).to_vec()),
    }
}

unsafe fn params_arg(p: *const c_char) -> Result<GenParams, Fail> {
    if p.is_null() {
        return Ok(GenParams::default());
    }
    serde_json::from_str(str_arg(p, "params_json")?)
        .map_err(|e| Fail::invalid(format!("params_json: {e}")))
}

/// Clears `*out` so a failed call never leaves a stale pointer behind.
unsafe fn reset<T>(out: *mut *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::invalid("output pointer is NULL"));
    }
    *out = ptr::null_mut();
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, text: String) {
    *out = CString::new(text)
        .expect("JSON has no interior NUL")
        .into_raw();
}

unsafe fn put_json<T: serde::Serialize>(out: *mut *mut c_char, value: &T) {
    put_string(out, serde_json::to_string(value).expect("value serializes"));
}

/// Parses and validates a scenario document.
///
/// # Safety
/// `json` must be NULL or a NUL-terminated string. `out` must be NULL or
/// point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn auction_scenario_from_json(
    json: *const c_char,
    out: *mut *mut AuctionScenario,
) -> AuctionCode {
    guard(|| {
        reset(out)?;
        let text = str_arg(json, "json")?;
        let scenario =
            Scenario::from_json(text).map_err(|e| Fail::invalid(format!("{e} ({})", e.code())))?;
        *out = Box::into_raw(Box::new(AuctionScenario(scenario)));
        Ok(AuctionCode::Success)
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `scenario` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn auction_scenario_free(scenario: *mut AuctionScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Writes the 64-character hex digest of the canonical scenario.
///
/// # Safety
/// `scenario` must be a live handle; `out` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn auction_scenario_digest(
    scenario: *const AuctionScenario,
    out: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out)?;
        let s = scenario_arg(scenario)?;
        put_string(out, s.digest().0);
        Ok(AuctionCode::Success)
    })
}

/// Writes the scenario as pretty JSON.
///
/// # Safety
/// As for [`auction_scenario_digest`].
#[no_mangle]
pub unsafe extern "C" fn auction_scenario_to_json(
    scenario: *const AuctionScenario,
    out: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out)?;
        put_string(out, scenario_arg(scenario)?.to_json_pretty());
        Ok(AuctionCode::Success)
    })
}

/// Runs one auction. `mechanism` is `vcg`, `first-price` or `posted:<bp>`.
/// The outcome JSON is written for every auction status, and the return
/// value is that status's code.
///
/// # Safety
/// `scenario` must be a live handle, `mechanism` a NUL-terminated string and
/// `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn auction_run(
    scenario: *const AuctionScenario,
    mechanism: *const c_char,
    out_json: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out_json)?;
        let s = scenario_arg(scenario)?;
        let m = mechanism_arg(mechanism)?;
        let outcome = run_auction(s, m);
        put_json(out_json, &outcome);
        Ok(StatusCode::from(&outcome.status).into())
    })
}

/// Sweeps `provider`'s cost report over `grid` (basis points). A NULL grid
/// with `grid_len == 0` selects the default 12-point grid. Returns
/// `VerificationFailed` when some deviation beats truthful reporting; the
/// report is written either way.
///
/// # Safety
/// `grid` must be NULL or point to `grid_len` readable values; other
/// pointers as for [`auction_run`].
#[no_mangle]
pub unsafe extern "C" fn auction_sweep(
    scenario: *const AuctionScenario,
    provider: *const c_char,
    mechanism: *const c_char,
    grid: *const u32,
    grid_len: usize,
    out_json: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out_json)?;
        let s = scenario_arg(scenario)?;
        let p = ProviderId::from(str_arg(provider, "provider")?);
        let m = mechanism_arg(mechanism)?;
        let grid = grid_arg(grid, grid_len)?;
        let report = deviation_sweep(s, &p, m, &grid).map_err(Fail::invalid)?;
        put_json(out_json, &report);
        Ok(if report.max_gain > 0 {
            AuctionCode::VerificationFailed
        } else {
            AuctionCode::Success
        })
    })
}

/// Runs all three payment rules on the truthful scenario and writes the
/// comparison rows.
///
/// # Safety
/// As for [`auction_run`].
#[no_mangle]
pub unsafe extern "C" fn auction_compare(
    scenario: *const AuctionScenario,
    markup_bp: u32,
    out_json: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out_json)?;
        let s = scenario_arg(scenario)?;
        if markup_bp > auction_core::market::MAX_MARKUP_BP {
            return Err(Fail::invalid(format!("markup {markup_bp} bp is too large")));
        }
        put_json(out_json, &compare_mechanisms(s, markup_bp));
        Ok(AuctionCode::Success)
    })
}

/// Generates `count` scenarios from seeds `first_seed..first_seed + count`
/// and sweeps every provider. `params_json` may be NULL for the defaults.
///
/// # Safety
/// `params_json` must be NULL or NUL-terminated; other pointers as for
/// [`auction_sweep`].
#[no_mangle]
pub unsafe extern "C" fn auction_verify(
    params_json: *const c_char,
    first_seed: u64,
    count: u64,
    mechanism: *const c_char,
    grid: *const u32,
    grid_len: usize,
    out_json: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out_json)?;
        let params = params_arg(params_json)?;
        let m = mechanism_arg(mechanism)?;
        let grid = grid_arg(grid, grid_len)?;
        let last = first_seed
            .checked_add(count)
            .ok_or_else(|| Fail::invalid("seed range overflows"))?;
        let seeds: Vec<u64> = (first_seed..last).collect();
        let report = verify_strategyproof(&seeds, &params, &grid, m).map_err(Fail::invalid)?;
        put_json(out_json, &report);
        Ok(match report.verdict {
            Verdict::Pass => AuctionCode::Success,
            Verdict::Fail => AuctionCode::VerificationFailed,
        })
    })
}

/// Generates a scenario. `params_json` may be NULL for the defaults.
///
/// # Safety
/// `params_json` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn auction_generate(
    params_json: *const c_char,
    seed: u64,
    out: *mut *mut AuctionScenario,
) -> AuctionCode {
    guard(|| {
        reset(out)?;
        let params = params_arg(params_json)?;
        let s = generate_scenario(&params, seed).map_err(Fail::invalid)?;
        *out = Box::into_raw(Box::new(AuctionScenario(s)));
        Ok(AuctionCode::Success)
    })
}

/// One smoothing step: `round_half_up(((10000 - alpha) * score + alpha * observed) / 10000)`.
///
/// # Safety
/// `out_score` must point to writable storage.
#[no_mangle]
pub unsafe extern "C" fn auction_reputation_update(
    score: u64,
    alpha_bp: u32,
    observed: u64,
    out_score: *mut u64,
) -> AuctionCode {
    guard(|| {
        if out_score.is_null() {
            return Err(Fail::invalid("output pointer is NULL"));
        }
        let state = ReputationState::new(ProviderId::from(""), Quality(score), alpha_bp)
            .map_err(Fail::invalid)?;
        *out_score = update_reputation(&state, Quality(observed)).score.0;
        Ok(AuctionCode::Success)
    })
}

/// Appends an outcome (as produced by [`auction_run`]) to the ledger at
/// `path` and writes the new record. Timestamps follow `FIXED_CLOCK` when
/// set.
///
/// # Safety
/// `path` and `outcome_json` must be NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn auction_ledger_append(
    path: *const c_char,
    outcome_json: *const c_char,
    out_json: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out_json)?;
        let path = Path::new(str_arg(path, "path")?);
        let outcome: AuctionOutcome = serde_json::from_str(str_arg(outcome_json, "outcome_json")?)
            .map_err(|e| Fail::invalid(format!("outcome_json: {e}")))?;
        outcome.check_shape().map_err(Fail::invalid)?;
        let clock = clock_from_env()?;
        let record = ledger::append_record(path, &outcome, clock.as_ref())?;
        put_json(out_json, &record);
        Ok(AuctionCode::Success)
    })
}

/// Records settlement of a successful pending record.
///
/// # Safety
/// As for [`auction_ledger_append`].
#[no_mangle]
pub unsafe extern "C" fn auction_ledger_settle(
    path: *const c_char,
    record_id: u64,
    reference: *const c_char,
    out_json: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out_json)?;
        let path = Path::new(str_arg(path, "path")?);
        let reference = str_arg(reference, "reference")?;
        if !path.exists() {
            return Err(Fail {
                code: AuctionCode::IoError,
                message: format!("ledger {} does not exist", path.display()),
            });
        }
        let clock = clock_from_env()?;
        let record = ledger::settle(path, record_id, reference, clock.as_ref())?;
        put_json(out_json, &record);
        Ok(AuctionCode::Success)
    })
}

/// Summarizes the ledger at `path`.
///
/// # Safety
/// As for [`auction_ledger_append`].
#[no_mangle]
pub unsafe extern "C" fn auction_ledger_report(
    path: *const c_char,
    out_json: *mut *mut c_char,
) -> AuctionCode {
    guard(|| {
        reset(out_json)?;
        let path = Path::new(str_arg(path, "path")?);
        let report = ledger::build_report(path).map_err(|e| Fail {
            code: AuctionCode::IoError,
            message: e.to_string(),
        })?;
        put_json(out_json, &report);
        Ok(AuctionCode::Success)
    })
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn auction_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn auction_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Static name of a code, e.g. `"BudgetExceeded"`.
#[no_mangle]
pub extern "C" fn auction_code_name(code: i32) -> *const c_char {
    let name: &'static CStr = match code {
        0 => c"Success",
        1 => c"Infeasible",
        2 => c"BudgetExceeded",
        3 => c"ValidationError",
        4 => c"IoError",
        5 => c"MonopolyProvider",
        6 => c"VerificationFailed",
        7 => c"InternalError",
        _ => c"Unknown",
    };
    name.as_ptr()
}
