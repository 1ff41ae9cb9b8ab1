//! C ABI over `isoperim`.
//!
//! Conventions: every fallible call returns an [`IsoStatus`]; on failure
//! the message is available from [`iso_last_error`] on the same thread.
//! Exact rationals come back as NUL-terminated `"p/q"` strings owned by the
//! caller and released with [`iso_string_free`]. Codes are opaque handles
//! released with [`iso_code_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_bigint::BigInt;

use isoperim::exactmath::{fmt_ratio, parse_ratio, to_f64, Rational};
use isoperim::hypercube::{hamming_ball, subcube, Code};
use isoperim::lpbound::{lp_upper_bound, psi, BoundMode, BoundQuery};
use isoperim::oracle::{gamma_exact_with_budget, OracleModel};
use isoperim::stability::{stab, NoiseModel};
use isoperim::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoStatus {
    Ok = 0,
    NullPointer = 1,
    /// Domain error or invalid query.
    InvalidArgument = 2,
    BudgetExceeded = 3,
    /// Two exact computations disagreed; a library bug.
    Inconsistent = 4,
    /// A string argument was not valid UTF-8 or not a number.
    BadString = 5,
    Panic = 6,
}

/// Noise models for [`iso_stab`] and [`iso_gamma_exact`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoModel {
    Sphere = 0,
    Ball = 1,
    Iid = 2,
    /// Oracle only: `sum_{i<=r} P(i)`.
    Cdf = 3,
}

/// A subset of the hypercube.
pub struct IsoCode {
    inner: Code,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> IsoStatus {
    match e {
        Error::BudgetExceeded { .. } => IsoStatus::BudgetExceeded,
        Error::Inconsistent(_) => IsoStatus::Inconsistent,
        _ => IsoStatus::InvalidArgument,
    }
}

struct Fail(IsoStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IsoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            IsoStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("panic inside isoperim");
            IsoStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail(IsoStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail(IsoStatus::BadString, "string is not UTF-8".into()))
}

unsafe fn read_ratio(s: *const c_char) -> Result<Rational, Fail> {
    let text = read_str(s)?;
    parse_ratio(text).map_err(|e| Fail(IsoStatus::BadString, e.to_string()))
}

unsafe fn read_int(s: *const c_char) -> Result<BigInt, Fail> {
    let text = read_str(s)?;
    text.trim().parse().map_err(|_| Fail(IsoStatus::BadString, format!("not an integer: {text:?}")))
}

/// Writes `"p/q"` and its double value to the optional out-pointers.
unsafe fn write_ratio(q: &Rational, out_text: *mut *mut c_char, out_value: *mut f64) {
    if !out_text.is_null() {
        *out_text = CString::new(fmt_ratio(q)).expect("ratio text has no NUL").into_raw();
    }
    if !out_value.is_null() {
        *out_value = to_f64(q);
    }
}

fn query(n: u32, r: u32, m: BigInt) -> Result<BoundQuery, Fail> {
    Ok(BoundQuery::new(n, r, m)?)
}

/// Message for the last failed call on this thread; empty after success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn iso_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn iso_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn iso_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a code from `len` point indices in `[0, 2^n)`.
///
/// # Safety
/// `indices` must point to `len` readable values (or be null when `len` is
/// 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_code_from_indices(
    n: u32,
    indices: *const u32,
    len: usize,
    out: *mut *mut IsoCode,
) -> IsoStatus {
    guard(|| {
        if out.is_null() || (indices.is_null() && len > 0) {
            return Err(null());
        }
        let idx = if len == 0 { &[][..] } else { std::slice::from_raw_parts(indices, len) };
        let inner = Code::from_indices(n, idx.iter().copied())?;
        *out = Box::into_raw(Box::new(IsoCode { inner }));
        Ok(())
    })
}

/// `{1}^k x {-1,1}^(n-k)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_code_subcube(n: u32, k: u32, out: *mut *mut IsoCode) -> IsoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = Box::into_raw(Box::new(IsoCode { inner: subcube(n, k)? }));
        Ok(())
    })
}

/// Points within distance `radius` of the all-ones point.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_code_hamming_ball(n: u32, radius: u32, out: *mut *mut IsoCode) -> IsoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = Box::into_raw(Box::new(IsoCode { inner: hamming_ball(n, radius)? }));
        Ok(())
    })
}

/// Releases a code. Null is ignored.
///
/// # Safety
/// `code` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn iso_code_free(code: *mut IsoCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Dimension and size of a code.
///
/// # Safety
/// `code` must be a live handle; out-pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn iso_code_info(code: *const IsoCode, out_n: *mut u32, out_size: *mut u64) -> IsoStatus {
    guard(|| {
        let c = code.as_ref().ok_or_else(null)?;
        if !out_n.is_null() {
            *out_n = c.inner.n();
        }
        if !out_size.is_null() {
            *out_size = c.inner.size();
        }
        Ok(())
    })
}

/// Copies up to `cap` point indices (ascending) into `buf` and stores the
/// full count in `out_len`. Call with `cap = 0` to size the buffer.
///
/// # Safety
/// `code` must be a live handle; `buf` must have room for `cap` values;
/// `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_code_indices(
    code: *const IsoCode,
    buf: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> IsoStatus {
    guard(|| {
        let c = code.as_ref().ok_or_else(null)?;
        if out_len.is_null() || (buf.is_null() && cap > 0) {
            return Err(null());
        }
        let idx = c.inner.indices();
        for (k, &v) in idx.iter().take(cap).enumerate() {
            *buf.add(k) = v;
        }
        *out_len = idx.len();
        Ok(())
    })
}

/// Noise stability of a code. `r` is the radius for sphere and ball noise;
/// `beta` (`"p/q"` or decimal) is the flip probability for iid noise and
/// ignored otherwise.
///
/// # Safety
/// `code` must be a live handle; `beta` must be a C string when `model` is
/// iid; out-pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn iso_stab(
    code: *const IsoCode,
    model: IsoModel,
    r: u32,
    beta: *const c_char,
    out_text: *mut *mut c_char,
    out_value: *mut f64,
) -> IsoStatus {
    guard(|| {
        let c = code.as_ref().ok_or_else(null)?;
        let m = match model {
            IsoModel::Sphere => NoiseModel::Sphere { r },
            IsoModel::Ball => NoiseModel::Ball { r },
            IsoModel::Iid => NoiseModel::Iid { beta: read_ratio(beta)? },
            IsoModel::Cdf => return Err(Fail(IsoStatus::InvalidArgument, "cdf is not a noise model".into())),
        };
        write_ratio(&stab(&c.inner, &m)?.value, out_text, out_value);
        Ok(())
    })
}

/// Upper bound on ball-noise stability for sets of size `m` (decimal
/// string); `exact` nonzero solves the LP instead of using the closed form.
///
/// # Safety
/// `m` must be a C string; out-pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn iso_lp_upper_bound(
    n: u32,
    r: u32,
    m: *const c_char,
    exact: c_int,
    out_text: *mut *mut c_char,
    out_value: *mut f64,
) -> IsoStatus {
    guard(|| {
        let q = query(n, r, read_int(m)?)?;
        let mode = if exact != 0 { BoundMode::ExactLp } else { BoundMode::ClosedForm };
        write_ratio(&lp_upper_bound(&q, mode)?.bstab_bound, out_text, out_value);
        Ok(())
    })
}

/// `max(psi, 0)` and the maximizing index (0 when the candidate set is empty).
///
/// # Safety
/// `m` must be a C string; out-pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn iso_psi_plus(
    n: u32,
    r: u32,
    m: *const c_char,
    out_text: *mut *mut c_char,
    out_value: *mut f64,
    out_argmax: *mut u32,
) -> IsoStatus {
    guard(|| {
        let p = psi(&query(n, r, read_int(m)?)?)?;
        write_ratio(&p.plus(), out_text, out_value);
        if !out_argmax.is_null() {
            *out_argmax = p.argmax.unwrap_or(0);
        }
        Ok(())
    })
}

/// Exhaustive optimum over all size-`m` subsets with its witness. `budget`
/// caps the number of subsets (0 means the library default).
///
/// # Safety
/// `m` must be a C string, `beta` a C string when `model` is iid;
/// out-pointers may be null. A returned witness must be freed.
#[no_mangle]
pub unsafe extern "C" fn iso_gamma_exact(
    n: u32,
    r: u32,
    m: *const c_char,
    model: IsoModel,
    beta: *const c_char,
    budget: u64,
    out_text: *mut *mut c_char,
    out_value: *mut f64,
    out_witness: *mut *mut IsoCode,
) -> IsoStatus {
    guard(|| {
        let q = query(n, r, read_int(m)?)?;
        let model = match model {
            IsoModel::Sphere => OracleModel::Sphere,
            IsoModel::Ball => OracleModel::Ball,
            IsoModel::Cdf => OracleModel::Cdf,
            IsoModel::Iid => OracleModel::Iid { beta: read_ratio(beta)? },
        };
        let budget = if budget == 0 { isoperim::oracle::default_budget() } else { budget };
        let res = gamma_exact_with_budget(&q, &model, budget)?;
        write_ratio(&res.optimum, out_text, out_value);
        if !out_witness.is_null() {
            *out_witness = Box::into_raw(Box::new(IsoCode { inner: res.witness }));
        }
        Ok(())
    })
}

/// `K_k^(n)(x)` as a decimal string.
///
/// # Safety
/// `out_text` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_krawtchouk(n: u32, k: u32, x: i64, out_text: *mut *mut c_char) -> IsoStatus {
    guard(|| {
        if out_text.is_null() {
            return Err(null());
        }
        let v = isoperim::krawtchouk::krawtchouk(n, k, x)?;
        *out_text = CString::new(v.to_string()).expect("digits only").into_raw();
        Ok(())
    })
}

/// Gaussian quadrant probability `P[Z1 > t, Z2 > t]` with `P[Z1 > t] = alpha`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_gaussian_quadrant(alpha: f64, rho: f64, out: *mut f64) -> IsoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        *out = isoperim::asymptotics::gaussian_quadrant(alpha, rho)?;
        Ok(())
    })
}
