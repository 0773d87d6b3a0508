//! C ABI for `padyn`.
//!
//! Maps are opaque [`PdMap`] handles. Strings cross the boundary as
//! NUL-terminated UTF-8; strings returned by the library are owned by the
//! caller and released with [`pd_string_free`]. Every fallible call returns a
//! [`PdStatus`] and records a message retrievable with [`pd_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use padyn::cli::run_job_json;
use padyn::parse::{parse_map, parse_point};
use padyn::ratmap::RationalMap;
use padyn::uniformize::{find_good_prime, SearchCaps};
use padyn::Error;

/// Status codes; the nonnegative ones match the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdStatus {
    Ok = 0,
    Inconclusive = 2,
    Usage = 64,
    Internal = 70,
    NullPointer = -1,
    InvalidUtf8 = -2,
    Panic = -3,
}

/// Opaque handle to a rational map.
pub struct PdMap {
    inner: RationalMap,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn from_error(err: &Error) -> PdStatus {
    set_error(format!("{}: {err}", err.name()));
    status_for(err.exit_code())
}

fn status_for(code: i32) -> PdStatus {
    match code {
        0 => PdStatus::Ok,
        2 => PdStatus::Inconclusive,
        70 => PdStatus::Internal,
        _ => PdStatus::Usage,
    }
}

fn guard(f: impl FnOnce() -> PdStatus) -> PdStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("panic inside padyn".into());
            PdStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, PdStatus> {
    if s.is_null() {
        set_error("null string argument".into());
        return Err(PdStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8".into());
        PdStatus::InvalidUtf8
    })
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Parse a map such as `"[2,0,1]/[0,2]"` or `"x^2 + 1"`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pd_map_parse(text: *const c_char, out: *mut *mut PdMap) -> PdStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return PdStatus::NullPointer;
        }
        let text = try_status!(read_str(text));
        match parse_map(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PdMap { inner }));
                PdStatus::Ok
            }
            Err(e) => from_error(&e.into()),
        }
    })
}

/// Release a map. Null is ignored.
///
/// # Safety
/// `map` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pd_map_free(map: *mut PdMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// Degree of the map, or 0 for a null handle.
///
/// # Safety
/// `map` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pd_map_degree(map: *const PdMap) -> usize {
    map.as_ref().map_or(0, |m| m.inner.degree())
}

/// The map in array form; free with [`pd_string_free`].
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pd_map_to_string(map: *const PdMap, out: *mut *mut c_char) -> PdStatus {
    guard(|| {
        let (Some(m), false) = (map.as_ref(), out.is_null()) else {
            set_error("null argument".into());
            return PdStatus::NullPointer;
        };
        *out = into_c(m.inner.to_array_string());
        PdStatus::Ok
    })
}

/// Evaluate at a point such as `"3/2"` or `"inf"`; the image is written as a
/// string to `out`.
///
/// # Safety
/// `map` must be a live handle, `point` a valid string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pd_map_evaluate(map: *const PdMap, point: *const c_char, out: *mut *mut c_char) -> PdStatus {
    guard(|| {
        let (Some(m), false) = (map.as_ref(), out.is_null()) else {
            set_error("null argument".into());
            return PdStatus::NullPointer;
        };
        let point = try_status!(read_str(point));
        let x = match parse_point(point) {
            Ok(x) => x,
            Err(e) => return from_error(&e.into()),
        };
        match m.inner.evaluate(&x) {
            Ok(y) => {
                *out = into_c(y.to_string());
                PdStatus::Ok
            }
            Err(e) => from_error(&e.into()),
        }
    })
}

/// The `k`-th iterate as a new handle.
///
/// # Safety
/// `map` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pd_map_iterate(map: *const PdMap, k: u32, out: *mut *mut PdMap) -> PdStatus {
    guard(|| {
        let (Some(m), false) = (map.as_ref(), out.is_null()) else {
            set_error("null argument".into());
            return PdStatus::NullPointer;
        };
        match m.inner.iterate(k) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(PdMap { inner }));
                PdStatus::Ok
            }
            Err(e) => from_error(&e.into()),
        }
    })
}

/// Smallest good prime in `[p_min, p_max]` for the orbit of `start`, with its
/// offset and period.
///
/// # Safety
/// `map` must be a live handle, `start` a valid string, and the output
/// pointers valid.
#[no_mangle]
pub unsafe extern "C" fn pd_find_good_prime(
    map: *const PdMap,
    start: *const c_char,
    p_min: u64,
    p_max: u64,
    out_p: *mut u64,
    out_m: *mut usize,
    out_a: *mut u64,
) -> PdStatus {
    guard(|| {
        let Some(m) = map.as_ref() else {
            set_error("null map".into());
            return PdStatus::NullPointer;
        };
        if out_p.is_null() || out_m.is_null() || out_a.is_null() {
            set_error("null output pointer".into());
            return PdStatus::NullPointer;
        }
        let start = try_status!(read_str(start));
        let c = match parse_point(start) {
            Ok(c) => c,
            Err(e) => return from_error(&e.into()),
        };
        match find_good_prime(&m.inner, &c, p_min, p_max, SearchCaps::default()) {
            Ok(cert) => {
                *out_p = cert.p;
                *out_m = cert.m;
                *out_a = cert.a;
                PdStatus::Ok
            }
            Err(e) => from_error(&e.into()),
        }
    })
}

/// Run a JSON job and write the JSON report to `out`. The status mirrors the
/// command-line exit code: a report with undecided branches yields
/// `PD_STATUS_INCONCLUSIVE` and still sets `out`.
///
/// # Safety
/// `job` must be a valid string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pd_run_job_json(job: *const c_char, out: *mut *mut c_char) -> PdStatus {
    guard(|| {
        if out.is_null() {
            set_error("null output pointer".into());
            return PdStatus::NullPointer;
        }
        let job = try_status!(read_str(job));
        match run_job_json(job) {
            Ok((report, code)) => {
                *out = into_c(report);
                status_for(code)
            }
            Err(e) => from_error(&e),
        }
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer is
/// valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn pd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
