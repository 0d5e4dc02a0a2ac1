//! C ABI for the dinilab laboratory: opaque handles, integer status codes,
//! and caller-provided buffers. The committed header lives in
//! `include/dinilab.h` (generated with cbindgen; see `cbindgen.toml`).
//!
//! Conventions:
//! - Every fallible call returns `DinilabStatus`; `DinilabOk` is zero.
//! - On failure, `dinilab_last_error_message` returns a thread-local,
//!   NUL-terminated description valid until the next failing call on the
//!   same thread.
//! - Out-parameters are written only on success (except the ledger size
//!   query, which always reports the required byte count).
//! - Handles are freed exactly once with their matching `_free` function.

use dinilab::analysis::{constants_ledger, dyadic_iteration, fit_monotonicity};
use dinilab::catalog::{self, DomainSpec};
use dinilab::error::Error;
use dinilab::fields::CatalogEntry;
use dinilab::functionals::frequency_trace;
use dinilab::geometry::DiniDomain;
use dinilab::quadrature::QuadParams;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DinilabStatus {
    DinilabOk = 0,
    DinilabErrConfig = 2,
    DinilabErrNumeric = 3,
    DinilabErrNullArg = 4,
    DinilabErrUtf8 = 5,
    DinilabErrBuffer = 6,
    DinilabErrPanic = 7,
}

use DinilabStatus::*;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> DinilabStatus {
    match err {
        Error::Config(_) | Error::Json(_) | Error::Io(_) => DinilabErrConfig,
        _ => DinilabErrNumeric,
    }
}

fn guard(f: impl FnOnce() -> DinilabStatus) -> DinilabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            DinilabErrPanic
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, DinilabStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(DinilabErrNullArg);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        DinilabErrUtf8
    })
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dinilab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dinilab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Opaque handle to a catalog solution case.
pub struct DinilabCase {
    entry: CatalogEntry,
}

/// Opaque handle to a boundary domain.
pub struct DinilabDomain {
    domain: Arc<DiniDomain>,
}

/// Opens a named catalog case (`imz_kappa<k>` or `disk_eigen_k<k>_m<m>`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_open(
    name: *const c_char,
    out: *mut *mut DinilabCase,
) -> DinilabStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return DinilabErrNullArg;
        }
        let name = match cstr_arg(name) {
            Ok(s) => s,
            Err(st) => return st,
        };
        match catalog::entry(name) {
            Ok(entry) => {
                *out = Box::into_raw(Box::new(DinilabCase { entry }));
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Frees a case handle (accepts NULL).
///
/// # Safety
/// `case` must come from `dinilab_case_open` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_free(case: *mut DinilabCase) {
    if !case.is_null() {
        drop(Box::from_raw(case));
    }
}

/// M bound of the case (alpha defaults to sqrt(M)).
///
/// # Safety
/// `case` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_m_bound(case: *const DinilabCase) -> f64 {
    if case.is_null() {
        return f64::NAN;
    }
    (*case).entry.solution.m_bound
}

/// Known vanishing order of the case.
///
/// # Safety
/// `case` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_kappa(case: *const DinilabCase) -> u32 {
    if case.is_null() {
        return u32::MAX;
    }
    (*case).entry.kappa
}

/// Frequency trace at the case's anchor: fills h_out, i_out, n_out (each of
/// length `len`) for the given ascending radii. Pass `alpha` <= -1 to use
/// the default sqrt(M).
///
/// # Safety
/// All array pointers must reference `len` valid doubles.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_trace(
    case: *const DinilabCase,
    radii: *const f64,
    len: usize,
    alpha: f64,
    h_out: *mut f64,
    i_out: *mut f64,
    n_out: *mut f64,
) -> DinilabStatus {
    guard(|| {
        if case.is_null()
            || radii.is_null()
            || h_out.is_null()
            || i_out.is_null()
            || n_out.is_null()
        {
            set_error("null argument");
            return DinilabErrNullArg;
        }
        let entry = &(*case).entry;
        let radii = std::slice::from_raw_parts(radii, len);
        let alpha = if alpha > -1.0 {
            alpha
        } else {
            entry.solution.alpha_default()
        };
        match frequency_trace(
            &entry.solution,
            &entry.coeff,
            entry.anchor,
            radii,
            alpha,
            false,
            &entry.solution.quad_params(),
        ) {
            Ok(tr) => {
                for k in 0..len {
                    *h_out.add(k) = tr.h[k];
                    *i_out.add(k) = tr.i[k];
                    *n_out.add(k) = tr.n[k];
                }
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Fits the adjusted-frequency monotonicity constants over the given radii.
/// Writes (C1, C2, max_violation); fails with a numeric status when no
/// constants in [0, 1e3]^2 work.
///
/// # Safety
/// Pointer arguments must be valid; `radii` must reference `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_monotonicity(
    case: *const DinilabCase,
    radii: *const f64,
    len: usize,
    alpha: f64,
    c1_out: *mut f64,
    c2_out: *mut f64,
    violation_out: *mut f64,
) -> DinilabStatus {
    guard(|| {
        if case.is_null()
            || radii.is_null()
            || c1_out.is_null()
            || c2_out.is_null()
            || violation_out.is_null()
        {
            set_error("null argument");
            return DinilabErrNullArg;
        }
        let entry = &(*case).entry;
        let radii = std::slice::from_raw_parts(radii, len);
        let alpha = if alpha > -1.0 {
            alpha
        } else {
            entry.solution.alpha_default()
        };
        let run = || -> Result<(f64, f64, f64), Error> {
            let tr = frequency_trace(
                &entry.solution,
                &entry.coeff,
                entry.anchor,
                radii,
                alpha,
                false,
                &entry.solution.quad_params(),
            )?;
            let rep = fit_monotonicity(&tr, entry.solution.m_bound, 1e-8)?;
            if !rep.pass {
                return Err(Error::numerical(format!(
                    "no (C1, C2) in the box; best violation {}",
                    rep.max_violation
                )));
            }
            Ok((rep.c1, rep.c2, rep.max_violation))
        };
        match run() {
            Ok((c1, c2, v)) => {
                *c1_out = c1;
                *c2_out = c2;
                *violation_out = v;
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Vanishing order via the dyadic iteration from r0 over q_max halvings.
///
/// # Safety
/// `case` and `order_out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_order(
    case: *const DinilabCase,
    r0: f64,
    q_max: usize,
    order_out: *mut f64,
) -> DinilabStatus {
    guard(|| {
        if case.is_null() || order_out.is_null() {
            set_error("null argument");
            return DinilabErrNullArg;
        }
        let entry = &(*case).entry;
        let alpha = entry.solution.alpha_default();
        match dyadic_iteration(
            &entry.solution,
            entry.anchor,
            r0,
            q_max,
            alpha,
            entry.solution.m_bound,
            None,
            &entry.solution.quad_params(),
        ) {
            Ok(est) => {
                *order_out = est.fitted_order;
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Weighted height H(r) of the case at its anchor; `alpha` <= -1 selects
/// the default sqrt(M).
///
/// # Safety
/// `case` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dinilab_case_height(
    case: *const DinilabCase,
    r: f64,
    alpha: f64,
    out: *mut f64,
) -> DinilabStatus {
    guard(|| {
        if case.is_null() || out.is_null() {
            set_error("null argument");
            return DinilabErrNullArg;
        }
        let entry = &(*case).entry;
        let alpha = if alpha > -1.0 {
            alpha
        } else {
            entry.solution.alpha_default()
        };
        match dinilab::functionals::height(
            &entry.solution,
            &entry.coeff,
            entry.anchor,
            r,
            alpha,
            &QuadParams::default(),
        ) {
            Ok(v) => {
                *out = v;
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Opens a domain from its JSON catalog spec, e.g.
/// `{"kind": "power", "beta": 0.5, "R0": 0.4}`.
///
/// # Safety
/// `spec_json` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dinilab_domain_open_json(
    spec_json: *const c_char,
    out: *mut *mut DinilabDomain,
) -> DinilabStatus {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return DinilabErrNullArg;
        }
        let text = match cstr_arg(spec_json) {
            Ok(s) => s,
            Err(st) => return st,
        };
        let run = || -> Result<Arc<DiniDomain>, Error> {
            let spec: DomainSpec = serde_json::from_str(text)?;
            catalog::domain_from_spec(&spec)
        };
        match run() {
            Ok(domain) => {
                *out = Box::into_raw(Box::new(DinilabDomain { domain }));
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Frees a domain handle (accepts NULL).
///
/// # Safety
/// `domain` must come from `dinilab_domain_open_json`, freed once.
#[no_mangle]
pub unsafe extern "C" fn dinilab_domain_free(domain: *mut DinilabDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Largest dyadic radius with Lambda below 1/1000.
///
/// # Safety
/// `domain` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn dinilab_domain_r0_effective(domain: *const DinilabDomain) -> f64 {
    if domain.is_null() {
        return f64::NAN;
    }
    let handle = &*domain;
    handle.domain.r0_effective
}

/// Lambda(r): the normal-oscillation majorant floored by sqrt(r).
///
/// # Safety
/// `domain` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn dinilab_domain_lambda(
    domain: *const DinilabDomain,
    r: f64,
    out: *mut f64,
) -> DinilabStatus {
    guard(|| {
        if domain.is_null() || out.is_null() {
            set_error("null argument");
            return DinilabErrNullArg;
        }
        match (*domain).domain.lambda_of(r) {
            Ok(v) => {
                *out = v;
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Star-shapedness margin over `samples` boundary points: writes the
/// normalized (min, max) and whether both lie inside [1/2, 10].
///
/// # Safety
/// Pointer arguments must be valid.
#[no_mangle]
pub unsafe extern "C" fn dinilab_domain_star_margin(
    domain: *const DinilabDomain,
    r: f64,
    samples: usize,
    min_out: *mut f64,
    max_out: *mut f64,
    pass_out: *mut bool,
) -> DinilabStatus {
    guard(|| {
        if domain.is_null() || min_out.is_null() || max_out.is_null() || pass_out.is_null() {
            set_error("null argument");
            return DinilabErrNullArg;
        }
        match (*domain).domain.star_shape_margin(r, samples) {
            Ok(m) => {
                *min_out = m.min;
                *max_out = m.max;
                *pass_out = m.pass;
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Serializes the constants ledger for (lambda, K) over the domain into a
/// caller buffer as JSON. `written` receives the required byte count
/// (excluding the NUL); returns the buffer status when `buf_len` is too
/// small, leaving `written` set so the caller can retry.
///
/// # Safety
/// `buf` must reference `buf_len` writable bytes (may be NULL to query the
/// size); `written` must be valid.
#[no_mangle]
pub unsafe extern "C" fn dinilab_ledger_json(
    domain: *const DinilabDomain,
    lambda: f64,
    lipschitz_k: f64,
    buf: *mut c_char,
    buf_len: usize,
    written: *mut usize,
) -> DinilabStatus {
    guard(|| {
        if domain.is_null() || written.is_null() {
            set_error("null argument");
            return DinilabErrNullArg;
        }
        let run = || -> Result<String, Error> {
            let ledger = constants_ledger(lambda, lipschitz_k, &(*domain).domain)?;
            Ok(serde_json::to_string(&ledger)?)
        };
        match run() {
            Ok(json) => {
                *written = json.len();
                if buf.is_null() || buf_len < json.len() + 1 {
                    set_error("buffer too small for ledger JSON");
                    return DinilabErrBuffer;
                }
                std::ptr::copy_nonoverlapping(json.as_ptr(), buf as *mut u8, json.len());
                *buf.add(json.len()) = 0;
                DinilabOk
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}
