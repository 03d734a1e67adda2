//! C ABI for `fslsense`.
//!
//! Every fallible call returns an [`FslStatus`]. On failure a message is
//! available from [`fsl_last_error`] on the same thread until the next call.
//! Models are opaque handles created by [`fsl_model_new`] and released with
//! [`fsl_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fslsense::geometry::theta_critical;
use fslsense::metrology::qfi;
use fslsense::spectrum::gap_report;
use fslsense::zero_mode::solve_zero_mode;
use fslsense::{Error, ModelParams};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// `cos(theta) = 0`: the zero-mode recursion is undefined.
    PivotVanishes = 3,
    Numeric = 4,
    TooLarge = 5,
    Unsupported = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Opaque model handle.
pub struct FslModel {
    params: ModelParams,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(FslStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) | Error::DegenerateRatios => FslStatus::InvalidArgument,
            Error::PivotVanishes => FslStatus::PivotVanishes,
            Error::Numeric(_) => FslStatus::Numeric,
            Error::Size { .. } => FslStatus::TooLarge,
            Error::Unsupported(_) => FslStatus::Unsupported,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FslStatus::NullPointer, format!("{what} is NULL"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FslStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FslStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FslStatus::Panic
        }
    }
}

unsafe fn model_ref<'a>(m: *const FslModel) -> Result<&'a FslModel, Failure> {
    m.as_ref().ok_or_else(|| null("model"))
}

unsafe fn write<T>(out: *mut T, what: &str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fsl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next `fsl_*` call on the same thread.
#[no_mangle]
pub extern "C" fn fsl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Build a model with `n` excitations, angle `theta_over_pi` (units of pi),
/// nonlinear coupling `gamma` and energy scale `g`.
///
/// # Safety
/// `out` must be NULL or valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn fsl_model_new(
    n: usize,
    theta_over_pi: f64,
    gamma: f64,
    g: f64,
    out: *mut *mut FslModel,
) -> FslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let params = ModelParams::from_theta_over_pi(n, theta_over_pi, gamma)?.with_g(g)?;
        out.write(Box::into_raw(Box::new(FslModel { params })));
        Ok(())
    })
}

/// Release a handle. NULL is ignored.
///
/// # Safety
/// `model` must be NULL or a handle from [`fsl_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fsl_model_free(model: *mut FslModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of excitations, or 0 for a NULL handle.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fsl_model_n(model: *const FslModel) -> usize {
    model.as_ref().map_or(0, |m| m.params.n_excitations())
}

/// Quantum Fisher information of the zero mode with respect to theta.
///
/// # Safety
/// `model` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn fsl_qfi(model: *const FslModel, out: *mut f64) -> FslStatus {
    guard(|| {
        let m = model_ref(model)?;
        write(out, "out", qfi(&m.params)?.qfi)
    })
}

/// Spectral gap above the zero mode. `gap` underflows to 0 for extremely
/// small gaps; `ln_gap` (optional, may be NULL) stays finite.
///
/// # Safety
/// `model` must be a live handle, `gap` valid for writing, `ln_gap` NULL or
/// valid for writing.
#[no_mangle]
pub unsafe extern "C" fn fsl_gap(model: *const FslModel, gap: *mut f64, ln_gap: *mut f64) -> FslStatus {
    guard(|| {
        let m = model_ref(model)?;
        if gap.is_null() {
            return Err(null("gap"));
        }
        let r = gap_report(&m.params)?;
        gap.write(r.gap);
        if !ln_gap.is_null() {
            ln_gap.write(r.ln_gap);
        }
        Ok(())
    })
}

/// Copy the normalized zero-mode amplitudes `u_0 ..= u_N` into `buf`.
///
/// `written` always receives the required length `N + 1`. Pass `buf = NULL`
/// and `len = 0` to query it; a short buffer yields
/// [`FslStatus::BufferTooSmall`] and is left untouched.
///
/// # Safety
/// `model` must be a live handle, `written` valid for writing, and `buf`
/// valid for `len` doubles when `len > 0`.
#[no_mangle]
pub unsafe extern "C" fn fsl_zero_mode(
    model: *const FslModel,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> FslStatus {
    guard(|| {
        let m = model_ref(model)?;
        let need = m.params.n_excitations() + 1;
        write(written, "written", need)?;
        if len < need {
            return Err(Failure(
                FslStatus::BufferTooSmall,
                format!("buffer holds {len} values, {need} needed"),
            ));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let mode = solve_zero_mode(&m.params)?;
        ptr::copy_nonoverlapping(mode.amplitudes.as_ptr(), buf, need);
        Ok(())
    })
}

/// Critical angle in units of pi where the junction and tangency thresholds meet.
#[no_mangle]
pub extern "C" fn fsl_theta_critical_over_pi() -> f64 {
    theta_critical().theta_over_pi
}

/// Human-readable name of a status code, as a static string.
#[no_mangle]
pub extern "C" fn fsl_status_name(status: FslStatus) -> *const c_char {
    let s: &'static CStr = match status {
        FslStatus::Ok => c"ok",
        FslStatus::NullPointer => c"null pointer",
        FslStatus::InvalidArgument => c"invalid argument",
        FslStatus::PivotVanishes => c"recursion pivot vanishes",
        FslStatus::Numeric => c"numeric failure",
        FslStatus::TooLarge => c"size limit exceeded",
        FslStatus::Unsupported => c"unsupported",
        FslStatus::BufferTooSmall => c"buffer too small",
        FslStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
