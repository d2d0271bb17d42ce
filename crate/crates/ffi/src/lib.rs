//! C ABI over the `tdho` library.
//!
//! Objects are opaque handles created by `*_new`/`*_solve`/`*_from_json`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`TdhoStatus`]; on failure the message is retrievable with
//! [`tdho_last_error_message`] from the same thread. Panics never cross the
//! boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tdho::classical::{self, ClassicalError, FundamentalPair};
use tdho::freq_profile::FrequencyProfile;
use tdho::kernel::{self, CausticFlag, KernelError, KernelRequest};
use tdho::specfun::{self, ConicalDegree};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TdhoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Domain = 4,
    Caustic = 5,
    Numeric = 6,
    Panic = 7,
}

/// A frequency profile ω²(t).
pub struct TdhoProfile(FrequencyProfile);

/// The fundamental pair (u, v) on a time window.
pub struct TdhoPair(FundamentalPair);

/// Values of u, u̇, v, v̇ at one time.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TdhoPairState {
    pub u: f64,
    pub udot: f64,
    pub v: f64,
    pub vdot: f64,
}

/// One kernel amplitude. `caustic_flag` is 1 when a caustic lies inside the
/// window, so the sign of the prefactor is unverified.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TdhoKernelValue {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub phase: f64,
    pub caustic_flag: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn fail(status: TdhoStatus, message: impl Into<String>) -> TdhoStatus {
    set_error(message.into());
    status
}

fn guard(body: impl FnOnce() -> TdhoStatus) -> TdhoStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let text = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(TdhoStatus::Panic, format!("internal panic: {text}"))
        }
    }
}

fn classical_status(e: &ClassicalError) -> TdhoStatus {
    match e {
        ClassicalError::Domain(_) | ClassicalError::OutsideWindow { .. } => TdhoStatus::Domain,
        ClassicalError::InvalidWindow { .. } => TdhoStatus::InvalidArgument,
        _ => TdhoStatus::Numeric,
    }
}

fn kernel_status(e: &KernelError) -> TdhoStatus {
    match e {
        KernelError::InvalidRequest(_) => TdhoStatus::InvalidArgument,
        KernelError::CausticInWindow { .. } | KernelError::CausticAtEndpoint { .. } => {
            TdhoStatus::Caustic
        }
        KernelError::Classical(c) => classical_status(c),
        _ => TdhoStatus::Numeric,
    }
}

/// Message of the last failed call on this thread, or NULL if it succeeded.
/// The pointer stays valid until the next call into this library from the
/// same thread.
#[no_mangle]
pub extern "C" fn tdho_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tdho_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a profile from its JSON description, e.g.
/// `{"type":"exp_decay","omega0":1,"alpha":0.5}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdho_profile_from_json(
    json: *const c_char,
    out: *mut *mut TdhoProfile,
) -> TdhoStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(TdhoStatus::NullPointer, "json and out must be non-null");
        }
        *out = ptr::null_mut();
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(TdhoStatus::Parse, "profile JSON is not valid UTF-8");
        };
        match serde_json::from_str::<FrequencyProfile>(text) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(TdhoProfile(p)));
                TdhoStatus::Ok
            }
            Err(e) => fail(TdhoStatus::Parse, format!("invalid profile: {e}")),
        }
    })
}

/// Releases a profile. NULL is ignored.
///
/// # Safety
/// `profile` must come from [`tdho_profile_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tdho_profile_free(profile: *mut TdhoProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Smooth part of ω²(t), steps included (right-continuous).
///
/// # Safety
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdho_profile_omega_squared(
    profile: *const TdhoProfile,
    t: f64,
    out: *mut f64,
) -> TdhoStatus {
    guard(|| {
        if profile.is_null() || out.is_null() {
            return fail(TdhoStatus::NullPointer, "profile and out must be non-null");
        }
        match (*profile).0.omega_squared_at(t) {
            Ok(v) => {
                *out = v;
                TdhoStatus::Ok
            }
            Err(e) => fail(TdhoStatus::Domain, e.to_string()),
        }
    })
}

/// Solves for the fundamental pair on [t_a, t_b] with local tolerance `tol`.
///
/// # Safety
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdho_pair_solve(
    profile: *const TdhoProfile,
    t_a: f64,
    t_b: f64,
    tol: f64,
    out: *mut *mut TdhoPair,
) -> TdhoStatus {
    guard(|| {
        if profile.is_null() || out.is_null() {
            return fail(TdhoStatus::NullPointer, "profile and out must be non-null");
        }
        *out = ptr::null_mut();
        match classical::solve_fundamental(&(*profile).0, t_a, t_b, tol) {
            Ok(pair) => {
                *out = Box::into_raw(Box::new(TdhoPair(pair)));
                TdhoStatus::Ok
            }
            Err(e) => fail(classical_status(&e), e.to_string()),
        }
    })
}

/// Releases a pair. NULL is ignored.
///
/// # Safety
/// `pair` must come from [`tdho_pair_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tdho_pair_free(pair: *mut TdhoPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// u, u̇, v, v̇ at `t`. At a δ pulse time the post-kick derivatives are returned.
///
/// # Safety
/// `pair` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdho_pair_state(
    pair: *const TdhoPair,
    t: f64,
    out: *mut TdhoPairState,
) -> TdhoStatus {
    guard(|| {
        if pair.is_null() || out.is_null() {
            return fail(TdhoStatus::NullPointer, "pair and out must be non-null");
        }
        match (*pair).0.state(t) {
            Ok(s) => {
                *out = TdhoPairState {
                    u: s.u,
                    udot: s.udot,
                    v: s.v,
                    vdot: s.vdot,
                };
                TdhoStatus::Ok
            }
            Err(e) => fail(classical_status(&e), e.to_string()),
        }
    })
}

/// Largest |u v̇ − u̇ v − 1| over the audit samples; negative for a NULL handle.
///
/// # Safety
/// `pair` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn tdho_pair_wronskian_drift(pair: *const TdhoPair) -> f64 {
    if pair.is_null() {
        return -1.0;
    }
    (*pair).0.wronskian_drift()
}

/// K(q_a, t_a; q_b, t_b) by the caustic-robust formula. Solves the classical
/// problem internally.
///
/// # Safety
/// `profile` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdho_kernel_robust(
    profile: *const TdhoProfile,
    mass: f64,
    q_a: f64,
    t_a: f64,
    q_b: f64,
    t_b: f64,
    out: *mut TdhoKernelValue,
) -> TdhoStatus {
    guard(|| {
        if profile.is_null() || out.is_null() {
            return fail(TdhoStatus::NullPointer, "profile and out must be non-null");
        }
        let request = KernelRequest {
            mass,
            profile: &(*profile).0,
            q_a,
            t_a,
            q_b,
            t_b,
        };
        match kernel::kernel(&request) {
            Ok(k) => {
                *out = TdhoKernelValue {
                    re: k.value.re,
                    im: k.value.im,
                    modulus: k.modulus,
                    phase: k.phase,
                    caustic_flag: i32::from(k.caustic != CausticFlag::Clear),
                };
                TdhoStatus::Ok
            }
            Err(e) => fail(kernel_status(&e), e.to_string()),
        }
    })
}

/// J_ν(x) for ν ≥ 0, x ≥ 0.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdho_bessel_j(nu: f64, x: f64, out: *mut f64) -> TdhoStatus {
    guard(|| {
        if out.is_null() {
            return fail(TdhoStatus::NullPointer, "out must be non-null");
        }
        match specfun::bessel_j(nu, x) {
            Ok(v) => {
                *out = v;
                TdhoStatus::Ok
            }
            Err(e) => fail(TdhoStatus::Domain, e.to_string()),
        }
    })
}

/// Conical function P_{−1/2+iμ}(x) for x in (−1, 1].
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tdho_legendre_p_conical(mu: f64, x: f64, out: *mut f64) -> TdhoStatus {
    guard(|| {
        if out.is_null() {
            return fail(TdhoStatus::NullPointer, "out must be non-null");
        }
        match specfun::legendre_p(ConicalDegree::Conical { mu }, x) {
            Ok(v) => {
                *out = v;
                TdhoStatus::Ok
            }
            Err(e) => fail(TdhoStatus::Domain, e.to_string()),
        }
    })
}
