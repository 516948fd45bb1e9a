//! C ABI over `rankcalm`.
//!
//! Every fallible call returns an [`RcStatus`]; on failure the message is
//! kept per thread and read with [`rc_last_error_message`]. Handles are
//! opaque and freed with the matching `_free` function. Matrices cross the
//! boundary in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use rankcalm::calmness::{check_criterion1, check_criterion2, Outcome};
use rankcalm::sets::io::parse_set;
use rankcalm::sets::{dist_to_gamma, supports_enumeration, ConstraintSet, GammaMethod, GammaOptions};
use rankcalm::{spectral, Error, Matrix};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Dimension = 3,
    Parse = 4,
    NonConvergence = 5,
    Precondition = 6,
    Refused = 7,
    Io = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcOutcome {
    TrivialIntersection = 0,
    WitnessFound = 1,
    Inconclusive = 2,
}

/// Opaque dense matrix.
pub struct RcMatrix(Matrix);

/// Opaque constraint set.
pub struct RcSet(ConstraintSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RcStatus {
    match e {
        Error::Argument(_) => RcStatus::InvalidArgument,
        Error::Dimension { .. } => RcStatus::Dimension,
        Error::Parse { .. } => RcStatus::Parse,
        Error::NonConvergence { .. } | Error::Stall(_) | Error::Divergence(_) => {
            RcStatus::NonConvergence
        }
        Error::Precondition(_) => RcStatus::Precondition,
        Error::Refused(_) => RcStatus::Refused,
        Error::Io { .. } => RcStatus::Io,
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

/// Runs `f`, records any error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RcStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer passed as `{what}`"));
            RcStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RcStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies `rows * cols` row-major values. A nonzero `symmetric` requests
/// symmetric storage, which needs a square input symmetric within 1e-12.
///
/// # Safety
/// `data` must point to `rows * cols` readable doubles; `out_matrix`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_matrix_new(
    rows: usize,
    cols: usize,
    data: *const f64,
    symmetric: i32,
    out_matrix: *mut *mut RcMatrix,
) -> RcStatus {
    guard(|| {
        let slot = out(out_matrix, "out_matrix")?;
        if data.is_null() {
            return Err(Failure::Null("data"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::Argument("rows * cols overflows".into()))?;
        let values = std::slice::from_raw_parts(data, len);
        let m = if symmetric != 0 {
            if rows != cols {
                return Err(Error::Dimension {
                    field: "data".into(),
                    expected: "square matrix".into(),
                    got: format!("{rows}x{cols}"),
                }
                .into());
            }
            Matrix::symmetric(rows, values)?
        } else {
            Matrix::new(rows, cols, values)?
        };
        *slot = Box::into_raw(Box::new(RcMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn rc_matrix_free(m: *mut RcMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn rc_matrix_rows(m: *const RcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// # Safety
/// `m` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn rc_matrix_cols(m: *const RcMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// Writes the entries row-major into `buf`, which holds `len` doubles.
///
/// # Safety
/// `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rc_matrix_copy_data(m: *const RcMatrix, buf: *mut f64, len: usize) -> RcStatus {
    guard(|| {
        let m = deref(m, "m")?;
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let data = m.0.to_row_major();
        if len < data.len() {
            return Err(Error::Dimension {
                field: "buf".into(),
                expected: data.len().to_string(),
                got: len.to_string(),
            }
            .into());
        }
        std::slice::from_raw_parts_mut(buf, data.len()).copy_from_slice(&data);
        Ok(())
    })
}

/// Builds a set from a key=value block such as `family = correlation\nn = 3`.
/// Relative data-file paths resolve against the working directory.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_set` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_set_parse(text: *const c_char, out_set: *mut *mut RcSet) -> RcStatus {
    guard(|| {
        let slot = out(out_set, "out_set")?;
        if text.is_null() {
            return Err(Failure::Null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| Error::Argument("set text is not UTF-8".into()))?;
        let set = parse_set(text, Path::new("."))?;
        *slot = Box::into_raw(Box::new(RcSet(set)));
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn rc_set_free(s: *mut RcSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Sum of the r largest singular values.
///
/// # Safety
/// `m` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_kyfan_norm(m: *const RcMatrix, r: usize, out_value: *mut f64) -> RcStatus {
    guard(|| {
        let m = deref(m, "m")?;
        let slot = out(out_value, "out_value")?;
        *slot = spectral::kyfan_norm(&m.0, r)?;
        Ok(())
    })
}

/// θ_r = ‖X‖_* − ‖X‖_(r).
///
/// # Safety
/// `m` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_rank_residual(m: *const RcMatrix, r: usize, out_value: *mut f64) -> RcStatus {
    guard(|| {
        let m = deref(m, "m")?;
        let slot = out(out_value, "out_value")?;
        *slot = spectral::rank_residual(&m.0, r)?;
        Ok(())
    })
}

/// η_r = ‖X‖_* − H_r(X).
///
/// # Safety
/// `m` must be a live handle; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_truncated_residual(
    m: *const RcMatrix,
    r: usize,
    out_value: *mut f64,
) -> RcStatus {
    guard(|| {
        let m = deref(m, "m")?;
        let slot = out(out_value, "out_value")?;
        *slot = spectral::truncated_residual(&m.0, r)?.eta;
        Ok(())
    })
}

/// Nearest point of the set; `tol` bounds the inner iterations where no
/// closed form exists.
///
/// # Safety
/// `s` and `m` must be live handles; `out_matrix` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_project_set(
    s: *const RcSet,
    m: *const RcMatrix,
    tol: f64,
    out_matrix: *mut *mut RcMatrix,
) -> RcStatus {
    guard(|| {
        let s = deref(s, "s")?;
        let m = deref(m, "m")?;
        let slot = out(out_matrix, "out_matrix")?;
        let p = s.0.project(&m.0, tol)?;
        *slot = Box::into_raw(Box::new(RcMatrix(p)));
        Ok(())
    })
}

/// Checks criterion 1 or 2 at a point of Γ_r with automatic method choice.
///
/// # Safety
/// `s` and `m` must be live handles; `out_outcome` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_check_criterion(
    s: *const RcSet,
    r: usize,
    m: *const RcMatrix,
    criterion: u32,
    out_outcome: *mut RcOutcome,
) -> RcStatus {
    guard(|| {
        let s = deref(s, "s")?;
        let m = deref(m, "m")?;
        let slot = out(out_outcome, "out_outcome")?;
        let cert = match criterion {
            1 => check_criterion1(&s.0, r, &m.0)?,
            2 => check_criterion2(&s.0, r, &m.0)?,
            other => {
                return Err(Error::Argument(format!("criterion must be 1 or 2, got {other}")).into())
            }
        };
        *slot = match cert.outcome {
            Outcome::TrivialIntersection => RcOutcome::TrivialIntersection,
            Outcome::WitnessFound => RcOutcome::WitnessFound,
            Outcome::Inconclusive => RcOutcome::Inconclusive,
        };
        Ok(())
    })
}

/// Frobenius distance from X to Ω ∩ {rank ≤ r}, by enumeration where Γ_r is
/// finite and by seeded alternating projections otherwise.
///
/// # Safety
/// `s` and `m` must be live handles; `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_dist_to_gamma(
    s: *const RcSet,
    r: usize,
    m: *const RcMatrix,
    seed: u64,
    out_value: *mut f64,
) -> RcStatus {
    guard(|| {
        let s = deref(s, "s")?;
        let m = deref(m, "m")?;
        let slot = out(out_value, "out_value")?;
        let method = if supports_enumeration(&s.0, r) {
            GammaMethod::Enumerate
        } else {
            GammaMethod::Alternating
        };
        let opts = GammaOptions {
            method,
            seed,
            ..GammaOptions::default()
        };
        *slot = dist_to_gamma(&s.0, r, &m.0, opts)?;
        Ok(())
    })
}
