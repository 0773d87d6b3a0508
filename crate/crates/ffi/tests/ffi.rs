use std::ffi::{CStr, CString};
use std::ptr;

use padyn_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    pd_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let e = pd_last_error();
    assert!(!e.is_null());
    CStr::from_ptr(e).to_str().unwrap().to_string()
}

#[test]
fn parse_evaluate_iterate() {
    unsafe {
        let mut map = ptr::null_mut();
        assert_eq!(pd_map_parse(c("[2,0,1]/[0,2]").as_ptr(), &mut map), PdStatus::Ok);
        assert_eq!(pd_map_degree(map), 2);

        let mut y = ptr::null_mut();
        assert_eq!(pd_map_evaluate(map, c("1").as_ptr(), &mut y), PdStatus::Ok);
        assert_eq!(take(y), "3/2");

        let mut h2 = ptr::null_mut();
        assert_eq!(pd_map_iterate(map, 2, &mut h2), PdStatus::Ok);
        assert_eq!(pd_map_degree(h2), 4);
        let mut y = ptr::null_mut();
        assert_eq!(pd_map_evaluate(h2, c("1").as_ptr(), &mut y), PdStatus::Ok);
        assert_eq!(take(y), "17/12");

        let mut s = ptr::null_mut();
        assert_eq!(pd_map_to_string(map, &mut s), PdStatus::Ok);
        assert_eq!(take(s), "[2,0,1]/[0,2]");

        pd_map_free(h2);
        pd_map_free(map);
    }
}

#[test]
fn parse_error_sets_last_error() {
    unsafe {
        let mut map = ptr::null_mut();
        assert_eq!(pd_map_parse(c("[2,0,1/[0,2]").as_ptr(), &mut map), PdStatus::Usage);
        assert!(map.is_null());
        assert!(last_error().starts_with("ParseError"));
        assert_eq!(pd_map_parse(ptr::null(), &mut map), PdStatus::NullPointer);
        assert_eq!(pd_map_degree(ptr::null()), 0);
        pd_map_free(ptr::null_mut());
        pd_string_free(ptr::null_mut());
    }
}

#[test]
fn good_prime_certificate() {
    unsafe {
        let mut map = ptr::null_mut();
        assert_eq!(pd_map_parse(c("x^2").as_ptr(), &mut map), PdStatus::Ok);
        let (mut p, mut m, mut a) = (0u64, 0usize, 0u64);
        assert_eq!(pd_find_good_prime(map, c("2").as_ptr(), 7, 50, &mut p, &mut m, &mut a), PdStatus::Ok);
        assert_eq!((p, m, a), (7, 0, 6));
        assert_eq!(pd_find_good_prime(map, c("2").as_ptr(), 41, 41, &mut p, &mut m, &mut a), PdStatus::Ok);
        assert_eq!(p, 41);
        pd_map_free(map);
    }
}

#[test]
fn job_json_round_trip() {
    unsafe {
        let mut out = ptr::null_mut();
        let job = c(r#"{"command":"counterexample","p":7,"n":49}"#);
        assert_eq!(pd_run_job_json(job.as_ptr(), &mut out), PdStatus::Ok);
        let report: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(report["rows"][49]["valuation"], 8);

        let mut out = ptr::null_mut();
        let bad = c(r#"{"command":"find-prime","map":"x^2","start":"2","p_min":2}"#);
        assert_eq!(pd_run_job_json(bad.as_ptr(), &mut out), PdStatus::Usage);
        assert!(out.is_null());
        assert!(last_error().starts_with("UsageError"));
    }
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/padyn.h")).unwrap();
    for name in [
        "typedef struct PdMap PdMap",
        "PD_STATUS_OK",
        "PD_STATUS_INCONCLUSIVE",
        "pd_map_parse",
        "pd_map_free",
        "pd_map_evaluate",
        "pd_map_iterate",
        "pd_find_good_prime",
        "pd_run_job_json",
        "pd_string_free",
        "pd_last_error",
        "pd_version",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(pd_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
