//! C ABI over the `hwmiso` estimation and capacity routines.
//!
//! Every entry point returns an [`HwmisoStatus`]; results go through out
//! pointers. On failure, [`hwmiso_last_error`] returns a message for the
//! calling thread. Configurations are opaque handles created by
//! `*_new` functions and released with the matching `*_free`.
//!
//! Matrices cross the boundary as separate real and imaginary arrays of
//! `n·n` doubles in column-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hwmiso::capacity::{capacity_upper_bound, lower_bound_mc, DownlinkConfig};
use hwmiso::estimation::{error_covariance, mse_per_antenna, ImpairmentProfile, UplinkConfig};
use hwmiso::randmat::{exponential_correlation, CovarianceMatrix, Rng};
use hwmiso::specfun::{exp_integral_e1, one_minus_x_ex_e1};
use hwmiso::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HwmisoStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    InvalidMatrix = 3,
    DimensionMismatch = 4,
    Singular = 5,
    DegenerateChannel = 6,
    Config = 7,
    Io = 8,
    /// A Rust panic was caught at the boundary.
    Internal = 9,
}

/// Distortion levels (squared EVM) at each transceiver.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HwmisoImpairments {
    pub kappa_t_bs: f64,
    pub kappa_r_bs: f64,
    pub kappa_t_ut: f64,
    pub kappa_r_ut: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HwmisoEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

/// Uplink pilot configuration.
pub struct HwmisoUplink(UplinkConfig);

/// Downlink data configuration.
pub struct HwmisoDownlink(DownlinkConfig);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> HwmisoStatus {
    match e {
        Error::Domain(_) => HwmisoStatus::Domain,
        Error::InvalidMatrix(_) => HwmisoStatus::InvalidMatrix,
        Error::DimensionMismatch { .. } => HwmisoStatus::DimensionMismatch,
        Error::Singular(_) => HwmisoStatus::Singular,
        Error::DegenerateChannel(_) => HwmisoStatus::DegenerateChannel,
        Error::Config(_) => HwmisoStatus::Config,
        Error::Io(_) => HwmisoStatus::Io,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HwmisoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            HwmisoStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            HwmisoStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal error");
            HwmisoStatus::Internal
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn obj<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

fn profile(imp: &HwmisoImpairments) -> Result<ImpairmentProfile, Error> {
    ImpairmentProfile::new(imp.kappa_t_bs, imp.kappa_r_bs, imp.kappa_t_ut, imp.kappa_r_ut)
}

/// Reads an `n×n` column-major matrix; a null `im` means a real matrix.
unsafe fn read_matrix(
    n: usize,
    re: *const f64,
    im: *const f64,
    what: &'static str,
) -> Result<CovarianceMatrix, Failure> {
    if re.is_null() {
        return Err(Failure::Null(what));
    }
    let len = n.checked_mul(n).ok_or(Failure::Lib(Error::Domain("matrix dimension overflows".into())))?;
    let re = std::slice::from_raw_parts(re, len);
    let im = (!im.is_null()).then(|| std::slice::from_raw_parts(im, len));
    let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(re[i + j * n], im.map_or(0.0, |v| v[i + j * n])));
    Ok(CovarianceMatrix::new(m)?)
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hwmiso_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Exponential integral E₁(x), x > 0.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_exp_integral_e1(x: f64, result: *mut f64) -> HwmisoStatus {
    guard(|| {
        *out(result, "result")? = exp_integral_e1(x)?;
        Ok(())
    })
}

/// `1 − x·eˣ·E₁(x)`, x > 0.
///
/// # Safety
/// `result` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_one_minus_x_ex_e1(x: f64, result: *mut f64) -> HwmisoStatus {
    guard(|| {
        *out(result, "result")? = one_minus_x_ex_e1(x)?;
        Ok(())
    })
}

/// Uplink with channel covariance `R` and noise covariance `S`, each `n×n`
/// column-major; null imaginary parts mean real matrices.
///
/// # Safety
/// Non-null matrix pointers must reference `n·n` doubles; `imp` must be
/// null or valid; `handle` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_uplink_new(
    n: usize,
    r_re: *const f64,
    r_im: *const f64,
    s_re: *const f64,
    s_im: *const f64,
    p_ut: f64,
    imp: *const HwmisoImpairments,
    handle: *mut *mut HwmisoUplink,
) -> HwmisoStatus {
    guard(|| {
        let handle = out(handle, "handle")?;
        let imp = profile(obj(imp, "imp")?)?;
        let r = read_matrix(n, r_re, r_im, "r_re")?;
        let s = read_matrix(n, s_re, s_im, "s_re")?;
        *handle = Box::into_raw(Box::new(HwmisoUplink(UplinkConfig::new(r, s, p_ut, imp)?)));
        Ok(())
    })
}

/// Uplink with exponential correlation `R[i,j] = rho^|i−j|` and
/// `S = noise·I`.
///
/// # Safety
/// `imp` must be null or valid; `handle` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_uplink_new_exponential(
    n: usize,
    rho: f64,
    noise: f64,
    p_ut: f64,
    imp: *const HwmisoImpairments,
    handle: *mut *mut HwmisoUplink,
) -> HwmisoStatus {
    guard(|| {
        let handle = out(handle, "handle")?;
        let imp = profile(obj(imp, "imp")?)?;
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::Domain(format!("noise must be positive, got {noise}")).into());
        }
        let r = exponential_correlation(n, rho)?;
        let s = CovarianceMatrix::scaled_identity(n, noise);
        *handle = Box::into_raw(Box::new(HwmisoUplink(UplinkConfig::new(r, s, p_ut, imp)?)));
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or a pointer returned by an uplink constructor
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_uplink_free(handle: *mut HwmisoUplink) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `uplink` must be null or a live handle; `n` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_uplink_dim(uplink: *const HwmisoUplink, n: *mut usize) -> HwmisoStatus {
    guard(|| {
        *out(n, "n")? = obj(uplink, "uplink")?.0.dim();
        Ok(())
    })
}

/// Per-antenna estimation MSE `tr(C)/N`.
///
/// # Safety
/// `uplink` must be null or a live handle; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_mse_per_antenna(uplink: *const HwmisoUplink, result: *mut f64) -> HwmisoStatus {
    guard(|| {
        *out(result, "result")? = mse_per_antenna(&obj(uplink, "uplink")?.0)?;
        Ok(())
    })
}

/// Writes the estimation error covariance into `n·n` column-major buffers.
///
/// # Safety
/// `uplink` must be null or a live handle; non-null buffers must hold
/// `n·n` doubles for the handle's `n`. `im` may be null.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_error_covariance(
    uplink: *const HwmisoUplink,
    re: *mut f64,
    im: *mut f64,
) -> HwmisoStatus {
    guard(|| {
        let ul = &obj(uplink, "uplink")?.0;
        if re.is_null() {
            return Err(Failure::Null("re"));
        }
        let c = error_covariance(ul)?;
        let n = ul.dim();
        let re = std::slice::from_raw_parts_mut(re, n * n);
        let mut im = (!im.is_null()).then(|| std::slice::from_raw_parts_mut(im, n * n));
        for j in 0..n {
            for i in 0..n {
                let v = c.get(i, j);
                re[i + j * n] = v.re;
                if let Some(im) = im.as_deref_mut() {
                    im[i + j * n] = v.im;
                }
            }
        }
        Ok(())
    })
}

/// # Safety
/// `imp` must be null or valid; `handle` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_downlink_new(
    p_bs: f64,
    sigma2_ut: f64,
    imp: *const HwmisoImpairments,
    handle: *mut *mut HwmisoDownlink,
) -> HwmisoStatus {
    guard(|| {
        let handle = out(handle, "handle")?;
        let imp = profile(obj(imp, "imp")?)?;
        *handle = Box::into_raw(Box::new(HwmisoDownlink(DownlinkConfig::new(p_bs, sigma2_ut, imp)?)));
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or a pointer returned by [`hwmiso_downlink_new`]
/// that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_downlink_free(handle: *mut HwmisoDownlink) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Closed-form capacity upper bound in bits per channel use, for the
/// channel covariance of `uplink`.
///
/// # Safety
/// Handles must be null or live; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_capacity_upper_bound(
    uplink: *const HwmisoUplink,
    downlink: *const HwmisoDownlink,
    result: *mut f64,
) -> HwmisoStatus {
    guard(|| {
        let ul = &obj(uplink, "uplink")?.0;
        let dl = &obj(downlink, "downlink")?.0;
        *out(result, "result")? = capacity_upper_bound(ul.r(), dl)?;
        Ok(())
    })
}

/// Monte-Carlo lower bound with estimated-CSI MRT. Equal seeds give equal
/// results.
///
/// # Safety
/// Handles must be null or live; `result` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn hwmiso_lower_bound_mc(
    uplink: *const HwmisoUplink,
    downlink: *const HwmisoDownlink,
    n_samples: usize,
    seed: u64,
    result: *mut HwmisoEstimate,
) -> HwmisoStatus {
    guard(|| {
        let ul = &obj(uplink, "uplink")?.0;
        let dl = &obj(downlink, "downlink")?.0;
        let result = out(result, "result")?;
        let est = lower_bound_mc(ul, dl, n_samples, &mut Rng::seed_from_u64(seed))?;
        *result = HwmisoEstimate { value: est.value, std_error: est.std_error, n_samples: est.n_samples };
        Ok(())
    })
}
