use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use serde_json::Value;

use auction_ffi::*;

const EX1: &str = include_str!("../../core/tests/fixtures/ex1.json");

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a returned string.
unsafe fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = CStr::from_ptr(p).to_str().unwrap().to_owned();
    auction_string_free(p);
    s
}

unsafe fn take_json(p: *mut c_char) -> Value {
    serde_json::from_str(&take(p)).unwrap()
}

unsafe fn last_error() -> String {
    let p = auction_last_error();
    assert!(!p.is_null(), "expected an error message");
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn load(json: &str) -> *mut AuctionScenario {
    let mut s = ptr::null_mut();
    let json = cstr(json);
    assert_eq!(
        auction_scenario_from_json(json.as_ptr(), &mut s),
        AuctionCode::Success
    );
    s
}

fn ex1_without_oa1() -> String {
    let mut doc: Value = serde_json::from_str(EX1).unwrap();
    doc["offers"]
        .as_array_mut()
        .unwrap()
        .retain(|o| o["id"] != "oA1");
    doc.to_string()
}

#[test]
fn run_ex1_under_every_mechanism() {
    unsafe {
        let s = load(EX1);
        let mut out = ptr::null_mut();

        let vcg = cstr("vcg");
        assert_eq!(auction_run(s, vcg.as_ptr(), &mut out), AuctionCode::Success);
        let v = take_json(out);
        assert_eq!(v["payments"]["payments"]["P2"], 1300);
        assert_eq!(v["payments"]["consumer_total_cents"], 1900);

        let posted = cstr("posted:2500");
        assert_eq!(
            auction_run(s, posted.as_ptr(), &mut out),
            AuctionCode::BudgetExceeded
        );
        assert_eq!(take_json(out)["status"]["required_cents"], 2125);

        let mut digest = ptr::null_mut();
        assert_eq!(
            auction_scenario_digest(s, &mut digest),
            AuctionCode::Success
        );
        assert_eq!(take(digest).len(), 64);
        auction_scenario_free(s);
    }
}

#[test]
fn monopoly_is_reported() {
    unsafe {
        let s = load(&ex1_without_oa1());
        let mut out = ptr::null_mut();
        let vcg = cstr("vcg");
        assert_eq!(
            auction_run(s, vcg.as_ptr(), &mut out),
            AuctionCode::MonopolyProvider
        );
        assert_eq!(take_json(out)["status"]["provider"], "P2");
        auction_scenario_free(s);
    }
}

#[test]
fn invalid_input_sets_last_error() {
    unsafe {
        let mut s = ptr::null_mut();
        let bad = cstr("{\"version\": 2}");
        assert_eq!(
            auction_scenario_from_json(bad.as_ptr(), &mut s),
            AuctionCode::ValidationError
        );
        assert!(s.is_null());
        assert!(!last_error().is_empty());

        assert_eq!(
            auction_scenario_from_json(ptr::null(), &mut s),
            AuctionCode::ValidationError
        );
        assert!(last_error().contains("NULL"));

        let good = cstr(EX1);
        assert_eq!(
            auction_scenario_from_json(good.as_ptr(), ptr::null_mut()),
            AuctionCode::ValidationError
        );

        let s = load(EX1);
        assert!(auction_last_error().is_null(), "success clears the error");
        let mut out = ptr::null_mut();
        let m = cstr("dutch");
        assert_eq!(
            auction_run(s, m.as_ptr(), &mut out),
            AuctionCode::ValidationError
        );
        assert!(out.is_null());
        assert_eq!(
            auction_run(ptr::null(), cstr("vcg").as_ptr(), &mut out),
            AuctionCode::ValidationError
        );
        auction_scenario_free(s);
        auction_scenario_free(ptr::null_mut());
        auction_string_free(ptr::null_mut());
    }
}

#[test]
fn sweep_and_compare() {
    unsafe {
        let s = load(EX1);
        let mut out = ptr::null_mut();
        let p2 = cstr("P2");
        let fp = cstr("first-price");
        assert_eq!(
            auction_sweep(s, p2.as_ptr(), fp.as_ptr(), ptr::null(), 0, &mut out),
            AuctionCode::VerificationFailed
        );
        assert!(take_json(out)["max_gain_cents"].as_i64().unwrap() > 0);

        let grid = [5000u32, 10_000, 15_000, 20_000];
        let vcg = cstr("vcg");
        assert_eq!(
            auction_sweep(
                s,
                p2.as_ptr(),
                vcg.as_ptr(),
                grid.as_ptr(),
                grid.len(),
                &mut out
            ),
            AuctionCode::Success
        );
        let utilities: Vec<i64> = take_json(out)["points"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["utility_cents"].as_i64().unwrap())
            .collect();
        assert_eq!(utilities, [100, 100, 0, 0]);

        assert_eq!(
            auction_sweep(s, p2.as_ptr(), vcg.as_ptr(), ptr::null(), 3, &mut out),
            AuctionCode::ValidationError
        );

        assert_eq!(auction_compare(s, 0, &mut out), AuctionCode::Success);
        let rows = take_json(out);
        assert_eq!(rows[1]["consumer_total_cents"], 1700);
        auction_scenario_free(s);
    }
}

#[test]
fn verify_and_generate() {
    unsafe {
        let mut out = ptr::null_mut();
        let vcg = cstr("vcg");
        assert_eq!(
            auction_verify(ptr::null(), 1, 10, vcg.as_ptr(), ptr::null(), 0, &mut out),
            AuctionCode::Success
        );
        let report = take_json(out);
        assert_eq!(report["verdict"], "PASS");
        assert_eq!(report["scenarios_examined"], 10);

        let params = cstr(
            r#"{"tasks":2,"offers_per_task":3,"cost_range_cents":[1,100],
                "quality_range":[0,5],"threshold_fraction_bp":6000}"#,
        );
        let mut a = ptr::null_mut();
        let mut b = ptr::null_mut();
        assert_eq!(
            auction_generate(params.as_ptr(), 9, &mut a),
            AuctionCode::Success
        );
        assert_eq!(
            auction_generate(params.as_ptr(), 9, &mut b),
            AuctionCode::Success
        );
        let (mut da, mut db) = (ptr::null_mut(), ptr::null_mut());
        auction_scenario_digest(a, &mut da);
        auction_scenario_digest(b, &mut db);
        assert_eq!(take(da), take(db));
        let mut json = ptr::null_mut();
        auction_scenario_to_json(a, &mut json);
        assert_eq!(take_json(json)["offers"].as_array().unwrap().len(), 6);
        auction_scenario_free(a);
        auction_scenario_free(b);

        let bad = cstr(r#"{"tasks":0}"#);
        assert_eq!(
            auction_generate(bad.as_ptr(), 1, &mut a),
            AuctionCode::ValidationError
        );
    }
}

#[test]
fn reputation_update_rounds_half_up() {
    unsafe {
        let mut score = 0;
        assert_eq!(
            auction_reputation_update(3, 5000, 4, &mut score),
            AuctionCode::Success
        );
        assert_eq!(score, 4);
        assert_eq!(
            auction_reputation_update(7, 0, 1, &mut score),
            AuctionCode::Success
        );
        assert_eq!(score, 7);
        assert_eq!(
            auction_reputation_update(1, 10_001, 1, &mut score),
            AuctionCode::ValidationError
        );
        assert_eq!(
            auction_reputation_update(1, 1, 1, ptr::null_mut()),
            AuctionCode::ValidationError
        );
    }
}

#[test]
fn ledger_round_trip() {
    unsafe {
        let dir = tempfile::tempdir().unwrap();
        let path = cstr(dir.path().join("l.jsonl").to_str().unwrap());
        let s = load(EX1);
        let mut out = ptr::null_mut();
        let vcg = cstr("vcg");
        auction_run(s, vcg.as_ptr(), &mut out);
        let outcome = CString::new(take(out)).unwrap();

        assert_eq!(
            auction_ledger_append(path.as_ptr(), outcome.as_ptr(), &mut out),
            AuctionCode::Success
        );
        assert_eq!(take_json(out)["record_id"], 1);
        let reference = cstr("PAY-7");
        assert_eq!(
            auction_ledger_settle(path.as_ptr(), 1, reference.as_ptr(), &mut out),
            AuctionCode::Success
        );
        assert_eq!(take_json(out)["supersedes"], 1);
        assert_eq!(
            auction_ledger_settle(path.as_ptr(), 1, reference.as_ptr(), &mut out),
            AuctionCode::ValidationError
        );
        assert_eq!(
            auction_ledger_report(path.as_ptr(), &mut out),
            AuctionCode::Success
        );
        let report = take_json(out);
        assert_eq!(report["total_spend_cents"], 1900);
        assert_eq!(report["settled"], 1);

        let missing = cstr(dir.path().join("none.jsonl").to_str().unwrap());
        assert_eq!(
            auction_ledger_report(missing.as_ptr(), &mut out),
            AuctionCode::IoError
        );
        let junk = cstr("{}");
        assert_eq!(
            auction_ledger_append(path.as_ptr(), junk.as_ptr(), &mut out),
            AuctionCode::ValidationError
        );
        auction_scenario_free(s);
    }
}

#[test]
fn code_names() {
    let name = |c| unsafe { CStr::from_ptr(auction_code_name(c)).to_str().unwrap() };
    assert_eq!(name(0), "Success");
    assert_eq!(name(6), "VerificationFailed");
    assert_eq!(name(7), "InternalError");
    assert_eq!(name(-1), "Unknown");
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/abi-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libauction_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("cc runs");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        String::from_utf8_lossy(&out.stdout).trim(),
        "MonopolyProvider"
    );
}
