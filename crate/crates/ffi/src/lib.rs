//! C ABI over `rpcscreen`.
//!
//! Conventions:
//! - every fallible function returns an [`RpcStatus`]; on failure a message is
//!   available from [`rpc_last_error_message`] on the same thread;
//! - handles are opaque and owned by the caller, who releases them with the
//!   matching `_free` function;
//! - matrices are column-major `double` arrays, `n` rows by `p` columns;
//! - output buffers are caller-allocated and their length is passed in;
//! - strings returned by the library are released with [`rpc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rpcscreen::bench::{run_plan, BenchmarkPlan};
use rpcscreen::{
    fr_screen, holp_scores, lambda_presets, rpc_fast, select_top_k, sis_scores, standardize, DenseMatrix, Error,
    RpcComponents, StandardizedData,
};

/// Status codes; values 2 to 5 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidData = 4,
    Numerical = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Standardized predictors and response.
pub struct RpcDataset {
    data: StandardizedData,
}

/// Ridge partial correlation components for one penalty.
pub struct RpcFit {
    components: RpcComponents,
}

/// Per-predictor vectors held by an [`RpcFit`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpcFitField {
    Scores = 0,
    VIy = 1,
    VI = 2,
    Xi = 3,
    RidgeBeta = 4,
}

/// Scalar parts of an [`RpcFit`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RpcFitScalars {
    pub lambda: f64,
    pub v_y: f64,
    pub s_lambda: f64,
}

/// The penalties `p/n`, `n ln(n)/p` and `n/p`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RpcLambdaPresets {
    pub rpc1: f64,
    pub rpc2: f64,
    pub rpc3: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RpcStatus {
    match e.exit_code() {
        3 => RpcStatus::Io,
        4 => RpcStatus::InvalidData,
        5 => RpcStatus::Numerical,
        _ => RpcStatus::InvalidArgument,
    }
}

/// Runs `f`, recording the message of any failure, and converts panics.
fn guard(f: impl FnOnce() -> Result<(), (RpcStatus, String)>) -> RpcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            RpcStatus::Panic
        }
    }
}

type FfiResult<T> = Result<T, (RpcStatus, String)>;

fn lib<T>(r: rpcscreen::Result<T>) -> FfiResult<T> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> FfiResult<()> {
    if p.is_null() {
        Err((RpcStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn fits(len: usize, need: usize) -> FfiResult<()> {
    if len < need {
        Err((
            RpcStatus::BufferTooSmall,
            format!("buffer holds {len} values, need {need}"),
        ))
    } else {
        Ok(())
    }
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into the library from this thread.
#[no_mangle]
pub extern "C" fn rpc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn rpc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies and standardizes `x` (n×p, column-major) and `y` (length n).
///
/// # Safety
/// `x` must point to `n * p` doubles, `y` to `n` doubles and `out` to writable
/// storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rpc_dataset_new(
    x: *const f64,
    y: *const f64,
    n: usize,
    p: usize,
    out: *mut *mut RpcDataset,
) -> RpcStatus {
    guard(|| {
        non_null(x, "x")?;
        non_null(y, "y")?;
        non_null(out, "out")?;
        let len = n
            .checked_mul(p)
            .ok_or((RpcStatus::InvalidArgument, "n * p overflows".to_string()))?;
        let xs = std::slice::from_raw_parts(x, len).to_vec();
        let ys = std::slice::from_raw_parts(y, n);
        let matrix = lib(DenseMatrix::from_col_major(n, p, xs))?;
        let data = lib(standardize(&matrix, ys))?;
        *out = Box::into_raw(Box::new(RpcDataset { data }));
        Ok(())
    })
}

/// # Safety
/// `dataset` must be null or a handle from [`rpc_dataset_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rpc_dataset_free(dataset: *mut RpcDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rpc_dataset_n(dataset: *const RpcDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.n())
}

/// # Safety
/// `dataset` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rpc_dataset_p(dataset: *const RpcDataset) -> usize {
    dataset.as_ref().map_or(0, |d| d.data.p())
}

/// Ridge partial correlations at `lambda` by the fast algorithm.
///
/// # Safety
/// `dataset` must be a live handle and `out` writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn rpc_fit_new(dataset: *const RpcDataset, lambda: f64, out: *mut *mut RpcFit) -> RpcStatus {
    guard(|| {
        non_null(dataset, "dataset")?;
        non_null(out, "out")?;
        let components = lib(rpc_fast(&(*dataset).data, lambda))?;
        *out = Box::into_raw(Box::new(RpcFit { components }));
        Ok(())
    })
}

/// # Safety
/// `fit` must be null or a handle from [`rpc_fit_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rpc_fit_free(fit: *mut RpcFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// # Safety
/// `fit` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rpc_fit_scalars(fit: *const RpcFit, out: *mut RpcFitScalars) -> RpcStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let c = &(*fit).components;
        *out = RpcFitScalars {
            lambda: c.lambda,
            v_y: c.v_y,
            s_lambda: c.s_lambda,
        };
        Ok(())
    })
}

/// Copies one per-predictor vector (length p) into `out`.
///
/// # Safety
/// `fit` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rpc_fit_copy(fit: *const RpcFit, field: RpcFitField, out: *mut f64, len: usize) -> RpcStatus {
    guard(|| {
        non_null(fit, "fit")?;
        non_null(out, "out")?;
        let c = &(*fit).components;
        let src = match field {
            RpcFitField::Scores => &c.scores,
            RpcFitField::VIy => &c.v_iy,
            RpcFitField::VI => &c.v_i,
            RpcFitField::Xi => &c.xi,
            RpcFitField::RidgeBeta => &c.ridge_beta,
        };
        fits(len, src.len())?;
        ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
        Ok(())
    })
}

unsafe fn write_scores(
    dataset: *const RpcDataset,
    out: *mut f64,
    len: usize,
    f: impl FnOnce(&StandardizedData) -> rpcscreen::Result<Vec<f64>>,
) -> RpcStatus {
    guard(|| {
        non_null(dataset, "dataset")?;
        non_null(out, "out")?;
        let data = &(*dataset).data;
        fits(len, data.p())?;
        let scores = lib(f(data))?;
        ptr::copy_nonoverlapping(scores.as_ptr(), out, scores.len());
        Ok(())
    })
}

/// HOLP ridge coefficients at `lambda` into `out` (length ≥ p).
///
/// # Safety
/// `dataset` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rpc_holp_scores(
    dataset: *const RpcDataset,
    lambda: f64,
    out: *mut f64,
    len: usize,
) -> RpcStatus {
    write_scores(dataset, out, len, |d| holp_scores(d, lambda))
}

/// Marginal correlations into `out` (length ≥ p).
///
/// # Safety
/// `dataset` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn rpc_sis_scores(dataset: *const RpcDataset, out: *mut f64, len: usize) -> RpcStatus {
    write_scores(dataset, out, len, sis_scores)
}

/// Forward regression for `k` steps; entry order into `out` (length ≥ k).
///
/// # Safety
/// `dataset` must be a live handle and `out` must point to `len` writable slots.
#[no_mangle]
pub unsafe extern "C" fn rpc_fr_screen(dataset: *const RpcDataset, k: usize, out: *mut usize, len: usize) -> RpcStatus {
    guard(|| {
        non_null(dataset, "dataset")?;
        non_null(out, "out")?;
        fits(len, k)?;
        let r = lib(fr_screen(&(*dataset).data, k))?;
        ptr::copy_nonoverlapping(r.selected.as_ptr(), out, r.selected.len());
        Ok(())
    })
}

/// Indices of the `k` largest `|scores|`, best first, into `out` (length ≥ k).
///
/// # Safety
/// `scores` must point to `p` doubles and `out` to `len` writable slots.
#[no_mangle]
pub unsafe extern "C" fn rpc_select_top_k(
    scores: *const f64,
    p: usize,
    k: usize,
    out: *mut usize,
    len: usize,
) -> RpcStatus {
    guard(|| {
        non_null(scores, "scores")?;
        non_null(out, "out")?;
        fits(len, k)?;
        let s = std::slice::from_raw_parts(scores, p);
        let idx = lib(select_top_k(s, k))?;
        ptr::copy_nonoverlapping(idx.as_ptr(), out, idx.len());
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rpc_lambda_presets(n: usize, p: usize, out: *mut RpcLambdaPresets) -> RpcStatus {
    guard(|| {
        non_null(out, "out")?;
        let l = lib(lambda_presets(n, p))?;
        *out = RpcLambdaPresets {
            rpc1: l.rpc1,
            rpc2: l.rpc2,
            rpc3: l.rpc3,
        };
        Ok(())
    })
}

/// Runs a benchmark plan given as JSON and returns the per-design summaries
/// as a JSON array in `*out_json`, to be released with [`rpc_string_free`].
///
/// # Safety
/// `plan_json` must be a nul-terminated string and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn rpc_simulate_json(plan_json: *const c_char, out_json: *mut *mut c_char) -> RpcStatus {
    guard(|| {
        non_null(plan_json, "plan_json")?;
        non_null(out_json, "out_json")?;
        let text = CStr::from_ptr(plan_json)
            .to_str()
            .map_err(|e| (RpcStatus::InvalidArgument, format!("plan is not UTF-8: {e}")))?;
        let plan = lib(BenchmarkPlan::from_json(text))?;
        let summaries = lib(run_plan(&plan))?;
        let json = serde_json::to_string(&summaries).map_err(|e| (RpcStatus::InvalidArgument, e.to_string()))?;
        *out_json = CString::new(json).expect("json has no nul").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rpc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
