//! C ABI over `momentvar`.
//!
//! Every fallible function returns an [`MvStatus`]; on failure a message is
//! kept per thread and can be read with [`mv_last_error_message`]. Strings
//! handed out by the library must be released with [`mv_string_free`],
//! moment vectors with [`mv_moments_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use momentvar::determinantal::{gd_witness, willink_membership};
use momentvar::moments::{mixture_moments, moments_to_cumulants, MixtureParams, MomentVector};
use momentvar::polyring::{parse_rational, DEFAULT_PRIME};
use momentvar::recovery::{recover, RecoveryInput};
use momentvar::secant::{self, RankConfig, SecantProblem};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Parse = 4,
    Domain = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MvMethod {
    Gd = 0,
    Willink = 1,
    Cumulant = 2,
}

/// One census row plus the certified rank.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MvDefectRow {
    pub n: u64,
    pub k: u64,
    pub d: u32,
    pub par: u64,
    pub ambient: u64,
    pub expected: u64,
    pub dim: u64,
    pub delta: u64,
    pub par_minus_dim: u64,
}

/// Opaque moment vector.
pub struct MvMomentVector {
    inner: MomentVector,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

type FfiResult<T> = Result<T, (MvStatus, String)>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> MvStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MvStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MvStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err((MvStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (MvStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn out_ptr<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    // SAFETY: caller promises a valid, writable pointer or null.
    unsafe { p.as_mut() }.ok_or_else(|| (MvStatus::NullPointer, format!("{name} is null")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn domain(e: impl std::fmt::Display) -> (MvStatus, String) {
    (MvStatus::Domain, e.to_string())
}

fn parse_json(s: &str) -> FfiResult<serde_json::Value> {
    serde_json::from_str(s).map_err(|e| (MvStatus::Parse, e.to_string()))
}

/// Message for the last failure on this thread, or null. Owned by the
/// library; valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn mv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn mv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn mv_default_prime() -> u64 {
    DEFAULT_PRIME
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn mv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Moments up to order `d` of the mixture described by `params_json`.
///
/// # Safety
/// `params_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_moments_from_params_json(
    params_json: *const c_char,
    d: u32,
    out: *mut *mut MvMomentVector,
) -> MvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let v = parse_json(str_arg(params_json, "params_json")?)?;
        let p = MixtureParams::from_json(&v).map_err(|e| (MvStatus::Parse, e.to_string()))?;
        let inner = mixture_moments(&p, d);
        *out = Box::into_raw(Box::new(MvMomentVector { inner }));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_moments_from_json(json: *const c_char, out: *mut *mut MvMomentVector) -> MvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let v = parse_json(str_arg(json, "json")?)?;
        let inner = MomentVector::from_json(&v).map_err(|e| (MvStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(MvMomentVector { inner }));
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle; `out` must be writable. Free the result with
/// `mv_string_free`.
#[no_mangle]
pub unsafe extern "C" fn mv_moments_to_json(m: *const MvMomentVector, out: *mut *mut c_char) -> MvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = m.as_ref().ok_or((MvStatus::NullPointer, "m is null".to_string()))?;
        *out = into_c_string(m.inner.to_json().to_string());
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mv_moments_n(m: *const MvMomentVector) -> u64 {
    m.as_ref().map_or(0, |m| m.inner.n() as u64)
}

/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mv_moments_d(m: *const MvMomentVector) -> u32 {
    m.as_ref().map_or(0, |m| m.inner.d())
}

/// Number of stored moments, including m_0.
///
/// # Safety
/// `m` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn mv_moments_len(m: *const MvMomentVector) -> u64 {
    m.as_ref().map_or(0, |m| m.inner.to_vec().len() as u64)
}

/// # Safety
/// `m` must be null or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn mv_moments_free(m: *mut MvMomentVector) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Whether `m` lies on the Gaussian moment variety of its `n` and `d`.
///
/// # Safety
/// `m` must be a live handle; `is_member` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_check_membership(
    m: *const MvMomentVector,
    method: MvMethod,
    is_member: *mut bool,
) -> MvStatus {
    guard(|| {
        let out = out_ptr(is_member, "is_member")?;
        let m = &m.as_ref().ok_or((MvStatus::NullPointer, "m is null".to_string()))?.inner;
        *out = match method {
            MvMethod::Gd => {
                if m.n() != 1 {
                    return Err((MvStatus::InvalidArgument, format!("method Gd needs n = 1, got {}", m.n())));
                }
                gd_witness(m).map_err(domain)?.is_none()
            }
            MvMethod::Willink => willink_membership(m.n(), m.d(), m, None).map_err(domain)?.is_member,
            MvMethod::Cumulant => moments_to_cumulants(m).map_err(domain)?.first_nonzero_higher().is_none(),
        };
        Ok(())
    })
}

/// Dimension of the k-th secant of the Gaussian moment variety. `prime == 0`
/// selects the default prime.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_secant_dimension(
    n: u64,
    d: u32,
    k: u64,
    prime: u64,
    seed: u64,
    trials: u32,
    out: *mut MvDefectRow,
) -> MvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let p = SecantProblem::new(n as usize, d, k as usize).map_err(|e| (MvStatus::InvalidArgument, e.to_string()))?;
        let prime = if prime == 0 { DEFAULT_PRIME } else { prime };
        if trials == 0 {
            return Err((MvStatus::InvalidArgument, "trials must be at least 1".into()));
        }
        secant::check_prime_for_order(prime, d).map_err(|e| (MvStatus::InvalidArgument, e.to_string()))?;
        let cfg = RankConfig { prime, seed, trials: trials as usize };
        let r = secant::secant_dimension(&p, &cfg).map_err(domain)?.row;
        *out = MvDefectRow {
            n: r.n as u64,
            k: r.k as u64,
            d: r.d,
            par: r.par as u64,
            ambient: r.ambient as u64,
            expected: r.exp as u64,
            dim: r.dim as u64,
            delta: r.delta as u64,
            par_minus_dim: r.par_minus_dim as u64,
        };
        Ok(())
    })
}

fn formula(out: *mut i64, f: impl FnOnce() -> Result<i64, secant::SecantError>) -> MvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = f().map_err(|e| (MvStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_dim_formula_d3(n: i64, k: i64, out: *mut i64) -> MvStatus {
    formula(out, || secant::dim_formula_d3(n, k))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_defect_identity_d3(n: i64, k: i64, out: *mut i64) -> MvStatus {
    formula(out, || secant::defect_identity_d3(n, k))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_conjecture_eleven_defect(n: i64, r: i64, out: *mut i64) -> MvStatus {
    formula(out, || secant::conjecture_eleven_defect(n, r))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_degree_sec2_g1(d: i64, out: *mut i64) -> MvStatus {
    formula(out, || secant::degree_formula_sec2_g1(d))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_degree_sec2_x(d: i64, out: *mut i64) -> MvStatus {
    formula(out, || secant::degree_formula_sec2_x(d))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mv_degree_sec3_x(d: i64, out: *mut i64) -> MvStatus {
    formula(out, || secant::degree_formula_sec3_x(d))
}

/// Recovers a two-component mixture from moments of order three, given the
/// first coordinates of both means as rational strings. The result is the
/// parameter JSON with an extra `residual` field.
///
/// # Safety
/// `m` must be a live handle, `mu11`/`mu21` NUL-terminated strings and `out`
/// writable. Free the result with `mv_string_free`.
#[no_mangle]
pub unsafe extern "C" fn mv_recover_json(
    m: *const MvMomentVector,
    mu11: *const c_char,
    mu21: *const c_char,
    out: *mut *mut c_char,
) -> MvStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = m.as_ref().ok_or((MvStatus::NullPointer, "m is null".to_string()))?;
        let rat = |p, name: &str| -> FfiResult<num_rational::BigRational> {
            let s = str_arg(p, name)?;
            parse_rational(s.trim()).ok_or((MvStatus::Parse, format!("{name}: bad rational {s:?}")))
        };
        let input = RecoveryInput { m: m.inner.clone(), mu11: rat(mu11, "mu11")?, mu21: rat(mu21, "mu21")? };
        let r = recover(&input).map_err(domain)?;
        let mut v = r.params.to_json();
        v["residual"] = serde_json::Value::String(r.residual.to_string());
        *out = into_c_string(v.to_string());
        Ok(())
    })
}
