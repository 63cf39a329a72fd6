//! C ABI for the orediff differentiator.
//!
//! Every fallible entry point returns an [`OrediffStatus`]. On failure the
//! message is kept per thread and can be read with
//! [`orediff_last_error_message`]. Panics are caught at the boundary and
//! reported as [`OrediffStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use orediff::{BoundInputs, CoreParams, Differentiator, Error, FilterParams, WindowLimit};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrediffStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    /// Calls made in an unsupported order.
    Usage = 3,
    /// An unbounded window ran past its sample cap.
    HistoryCapExceeded = 4,
    /// A Rust panic was caught; the handle should be freed.
    Panic = 5,
}

/// Opaque differentiator handle.
pub struct OrediffDifferentiator {
    inner: Differentiator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(err: Error) -> OrediffStatus {
    let status = match err {
        Error::Parameter(_) | Error::BoundNotApplicable(_) | Error::Config(_) | Error::Io { .. } => {
            OrediffStatus::InvalidParameter
        }
        Error::Usage(_) => OrediffStatus::Usage,
        Error::HistoryCapExceeded { .. } => OrediffStatus::HistoryCapExceeded,
    };
    set_error(err.to_string());
    status
}

fn null(what: &str) -> OrediffStatus {
    set_error(format!("{what} is NULL"));
    OrediffStatus::NullPointer
}

fn guard(f: impl FnOnce() -> OrediffStatus) -> OrediffStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            OrediffStatus::Panic
        }
    }
}

fn window(kbar: usize) -> WindowLimit {
    if kbar == 0 {
        WindowLimit::Infinite
    } else {
        WindowLimit::Finite(kbar)
    }
}

/// Creates a differentiator. `kbar = 0` selects an unbounded window.
/// Requires `gamma > l`. On success `*out` owns the new handle, to be
/// released with [`orediff_differentiator_free`].
///
/// # Safety
/// `out` must be NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn orediff_differentiator_new(
    l: f64,
    delta: f64,
    kbar: usize,
    gamma: f64,
    k0: u64,
    out: *mut *mut OrediffDifferentiator,
) -> OrediffStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let built = CoreParams::new(l, delta, window(kbar))
            .and_then(|core| Ok((core, FilterParams::new(gamma, delta, k0)?)))
            .and_then(|(core, filter)| Differentiator::new(core, filter));
        match built {
            Ok(inner) => {
                // SAFETY: checked non-null; the caller guarantees it is writable.
                unsafe { *out = Box::into_raw(Box::new(OrediffDifferentiator { inner })) };
                OrediffStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Feeds the next sample `u` and writes the filtered estimate to `*out_y`.
///
/// `out_ys`, `out_nhat` and `out_ell` may be NULL. They receive the
/// unfiltered estimate, the noise estimate and the window length used; on the
/// first sample these are NaN, 0 and 0.
///
/// # Safety
/// `handle` must be NULL or a live handle from [`orediff_differentiator_new`]
/// not used concurrently. Each non-NULL output pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn orediff_differentiator_step(
    handle: *mut OrediffDifferentiator,
    u: f64,
    out_y: *mut f64,
    out_ys: *mut f64,
    out_nhat: *mut f64,
    out_ell: *mut usize,
) -> OrediffStatus {
    guard(|| {
        // SAFETY: the caller guarantees the handle is live and unaliased.
        let Some(h) = (unsafe { handle.as_mut() }) else {
            return null("handle");
        };
        if out_y.is_null() {
            return null("out_y");
        }
        match h.inner.step(u) {
            Ok(est) => {
                let (ys, nhat, ell) = est.core.map_or((f64::NAN, 0.0, 0), |c| (c.ys, c.nhat, c.ell));
                // SAFETY: out_y checked above; the others are checked for NULL
                // and otherwise writable per the contract.
                unsafe {
                    *out_y = est.y;
                    if !out_ys.is_null() {
                        *out_ys = ys;
                    }
                    if !out_nhat.is_null() {
                        *out_nhat = nhat;
                    }
                    if !out_ell.is_null() {
                        *out_ell = ell;
                    }
                }
                OrediffStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Returns the handle to its freshly created state.
///
/// # Safety
/// `handle` must be NULL or a live handle not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn orediff_differentiator_reset(handle: *mut OrediffDifferentiator) -> OrediffStatus {
    guard(|| {
        // SAFETY: see the function contract.
        match unsafe { handle.as_mut() } {
            Some(h) => {
                h.inner.reset();
                OrediffStatus::Ok
            }
            None => null("handle"),
        }
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `handle` must be NULL or a handle from [`orediff_differentiator_new`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn orediff_differentiator_free(handle: *mut OrediffDifferentiator) {
    if !handle.is_null() {
        // SAFETY: ownership returns to Rust exactly once per the contract.
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Worst-case error `2√(2NL) + LΔ/2`.
#[no_mangle]
pub extern "C" fn orediff_theorem2_bound(l: f64, n: f64, delta: f64) -> f64 {
    orediff::theorem2_bound(l, n, delta)
}

/// Time in seconds after which the worst-case error bound holds.
///
/// # Safety
/// `out` must be NULL or valid for writing one `double`.
#[no_mangle]
pub unsafe extern "C" fn orediff_convergence_time(
    l: f64,
    n: f64,
    delta: f64,
    gamma: f64,
    k0: u64,
    r1: f64,
    out: *mut f64,
) -> OrediffStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        let inputs = BoundInputs {
            l,
            n,
            delta,
            gamma,
            k0,
            r1,
            kbar: WindowLimit::Infinite,
        };
        match orediff::convergence_time(&inputs) {
            Ok(t) => {
                // SAFETY: checked non-null; writable per the contract.
                unsafe { *out = t };
                OrediffStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Message of the last failure on this thread, or NULL if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn orediff_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn orediff_version() -> *const c_char {
    const VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains a nul byte"),
    };
    VERSION.as_ptr()
}
