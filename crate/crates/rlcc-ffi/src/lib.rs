//! C ABI for the distilled rate-control policies: opaque handles, status
//! codes, no panics across the boundary.
//!
//! Handles own their model; callers free them with the matching `_free`.
//! Every function returns `RlccStatus`; outputs go through pointers that are
//! written only on `Ok`.

use std::ffi::CStr;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rlcc_lab::gbt::TreeEnsemble;
use rlcc_lab::policy::{ActionMapper, PolicyCheckpoint};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlccStatus {
    Ok = 0,
    NullArgument = 1,
    Io = 2,
    Parse = 3,
    DimensionMismatch = 4,
    InvalidUtf8 = 5,
    NonFinite = 6,
    Panic = 7,
}

/// Opaque handle to a loaded tree ensemble.
pub struct RlccEnsemble {
    inner: TreeEnsemble,
}

/// Opaque handle to a loaded MLP policy checkpoint.
pub struct RlccPolicy {
    inner: PolicyCheckpoint,
}

fn map_err(e: &rlcc_lab::Error) -> RlccStatus {
    match e {
        rlcc_lab::Error::Io(_) => RlccStatus::Io,
        rlcc_lab::Error::NonFinite(_) => RlccStatus::NonFinite,
        _ => RlccStatus::Parse,
    }
}

unsafe fn path_from(ptr: *const c_char) -> Result<&'static str, RlccStatus> {
    if ptr.is_null() {
        return Err(RlccStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| RlccStatus::InvalidUtf8)
}

fn guarded(f: impl FnOnce() -> RlccStatus) -> RlccStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(RlccStatus::Panic)
}

/// Loads a tree ensemble from a description file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On `Ok` the caller owns the handle and must release it with
/// [`rlcc_ensemble_free`].
#[no_mangle]
pub unsafe extern "C" fn rlcc_ensemble_load(
    path: *const c_char,
    out: *mut *mut RlccEnsemble,
) -> RlccStatus {
    guarded(|| {
        if out.is_null() {
            return RlccStatus::NullArgument;
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(_) => return RlccStatus::Io,
        };
        match TreeEnsemble::from_description_text(&text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RlccEnsemble { inner }));
                RlccStatus::Ok
            }
            Err(e) => map_err(&e),
        }
    })
}

/// Parses a tree ensemble from in-memory description text.
///
/// # Safety
/// As [`rlcc_ensemble_load`], with `text` holding the description itself.
#[no_mangle]
pub unsafe extern "C" fn rlcc_ensemble_from_text(
    text: *const c_char,
    out: *mut *mut RlccEnsemble,
) -> RlccStatus {
    guarded(|| {
        if out.is_null() {
            return RlccStatus::NullArgument;
        }
        let text = match path_from(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match TreeEnsemble::from_description_text(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RlccEnsemble { inner }));
                RlccStatus::Ok
            }
            Err(e) => map_err(&e),
        }
    })
}

/// Releases an ensemble handle. Passing NULL is a no-op.
///
/// # Safety
/// `handle` must have come from an `rlcc_ensemble_*` constructor and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rlcc_ensemble_free(handle: *mut RlccEnsemble) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Feature-vector width the ensemble expects, or -1 for NULL.
///
/// # Safety
/// `handle` must be a live ensemble handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rlcc_ensemble_input_dim(handle: *const RlccEnsemble) -> i32 {
    if handle.is_null() {
        return -1;
    }
    (*handle).inner.input_dim() as i32
}

/// Worst-case operation count certificate, or -1 for NULL.
///
/// # Safety
/// `handle` must be a live ensemble handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rlcc_ensemble_op_count(handle: *const RlccEnsemble) -> i32 {
    if handle.is_null() {
        return -1;
    }
    (*handle).inner.op_count as i32
}

/// Evaluates the ensemble on `features[0..len)`, writing the raw output in
/// log-multiplier space to `out`.
///
/// # Safety
/// `features` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rlcc_ensemble_predict(
    handle: *const RlccEnsemble,
    features: *const f64,
    len: usize,
    out: *mut f64,
) -> RlccStatus {
    guarded(|| {
        if handle.is_null() || features.is_null() || out.is_null() {
            return RlccStatus::NullArgument;
        }
        let ens = &(*handle).inner;
        if len != ens.input_dim() {
            return RlccStatus::DimensionMismatch;
        }
        let x = std::slice::from_raw_parts(features, len);
        if x.iter().any(|v| !v.is_finite()) {
            return RlccStatus::NonFinite;
        }
        *out = ens.predict(x);
        RlccStatus::Ok
    })
}

/// Loads an MLP policy checkpoint.
///
/// # Safety
/// As [`rlcc_ensemble_load`]; release with [`rlcc_policy_free`].
#[no_mangle]
pub unsafe extern "C" fn rlcc_policy_load(
    path: *const c_char,
    out: *mut *mut RlccPolicy,
) -> RlccStatus {
    guarded(|| {
        if out.is_null() {
            return RlccStatus::NullArgument;
        }
        let path = match path_from(path) {
            Ok(p) => p,
            Err(s) => return s,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(_) => return RlccStatus::Io,
        };
        match PolicyCheckpoint::from_text(&text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(RlccPolicy { inner }));
                RlccStatus::Ok
            }
            Err(e) => map_err(&e),
        }
    })
}

/// Releases a policy handle. Passing NULL is a no-op.
///
/// # Safety
/// `handle` must have come from [`rlcc_policy_load`] and must not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn rlcc_policy_free(handle: *mut RlccPolicy) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Feature-vector width the policy expects, or -1 for NULL.
///
/// # Safety
/// `handle` must be a live policy handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn rlcc_policy_input_dim(handle: *const RlccPolicy) -> i32 {
    if handle.is_null() {
        return -1;
    }
    (*handle).inner.mlp.input_dim() as i32
}

/// Evaluates the MLP on `features[0..len)`, writing the raw output to `out`.
///
/// # Safety
/// As [`rlcc_ensemble_predict`].
#[no_mangle]
pub unsafe extern "C" fn rlcc_policy_predict(
    handle: *const RlccPolicy,
    features: *const f64,
    len: usize,
    out: *mut f64,
) -> RlccStatus {
    guarded(|| {
        if handle.is_null() || features.is_null() || out.is_null() {
            return RlccStatus::NullArgument;
        }
        let ckpt = &(*handle).inner;
        if len != ckpt.mlp.input_dim() {
            return RlccStatus::DimensionMismatch;
        }
        let x = std::slice::from_raw_parts(features, len);
        if x.iter().any(|v| !v.is_finite()) {
            return RlccStatus::NonFinite;
        }
        *out = ckpt.mlp.forward(x);
        RlccStatus::Ok
    })
}

/// Clamp bounds of the policy's action map, in log-multiplier space.
///
/// # Safety
/// `handle`, `y_min`, and `y_max` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rlcc_policy_clamp_bounds(
    handle: *const RlccPolicy,
    y_min: *mut f64,
    y_max: *mut f64,
) -> RlccStatus {
    if handle.is_null() || y_min.is_null() || y_max.is_null() {
        return RlccStatus::NullArgument;
    }
    let mapper = (*handle).inner.mapper;
    *y_min = mapper.y_min();
    *y_max = mapper.y_max();
    RlccStatus::Ok
}

/// Maps a raw output to a rate multiplier via `exp(clamp(y, y_min, y_max))`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rlcc_action_multiplier(
    y: f64,
    y_min: f64,
    y_max: f64,
    out: *mut f64,
) -> RlccStatus {
    if out.is_null() {
        return RlccStatus::NullArgument;
    }
    if !(y_min < y_max) || !y.is_finite() {
        return RlccStatus::NonFinite;
    }
    *out = ActionMapper::new(y_min, y_max).multiplier(y);
    RlccStatus::Ok
}

/// Default clamp bounds: multiplier range [0.8, 1.25] in log space.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rlcc_default_multiplier(y: f64, out: *mut f64) -> RlccStatus {
    rlcc_action_multiplier(
        y,
        rlcc_lab::policy::DEFAULT_MIN_MULTIPLIER.ln(),
        rlcc_lab::policy::DEFAULT_MAX_MULTIPLIER.ln(),
        out,
    )
}
