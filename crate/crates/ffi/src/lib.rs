//! C interface to imbalkit.
//!
//! Every function returns an [`ImbkStatus`]. On failure a message is
//! available from [`imbk_last_error`] on the same thread until the next
//! call. Datasets and models are opaque handles released with their `_free`
//! functions.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use imbalkit::data::{Dataset, Matrix};
use imbalkit::ensembles::TrainedModel;
use imbalkit::methods::{self, Params};
use imbalkit::{metrics, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImbkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidData = 3,
    UnknownMethod = 4,
    FitFailed = 5,
    Io = 6,
    Format = 7,
    Panic = 8,
}

/// Opaque dataset handle.
pub struct ImbkDataset {
    inner: Dataset,
}

/// Opaque trained-model handle.
pub struct ImbkModel {
    inner: TrainedModel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ImbkMetrics {
    pub auprc: f64,
    pub macro_f1: f64,
    pub balanced_accuracy: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ImbkStatus {
    match e {
        Error::UnknownMethod(_) => ImbkStatus::UnknownMethod,
        Error::InvalidParam(_) | Error::DimensionMismatch { .. } | Error::Config(_) => ImbkStatus::InvalidArgument,
        Error::InvalidDataset(_) | Error::Schema(_) | Error::ClassTooSmall { .. } | Error::Parse { .. } => {
            ImbkStatus::InvalidData
        }
        Error::Fit(_) => ImbkStatus::FitFailed,
        Error::Io(_) => ImbkStatus::Io,
        Error::Format(_) | Error::Json(_) | Error::ChecksumMismatch { .. } => ImbkStatus::Format,
        _ => ImbkStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (ImbkStatus, String)>) -> ImbkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ImbkStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_error(format!("internal error: {msg}"));
            ImbkStatus::Panic
        }
    }
}

fn lib<T>(r: imbalkit::Result<T>) -> Result<T, (ImbkStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (ImbkStatus, String) {
    (ImbkStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> (ImbkStatus, String) {
    (ImbkStatus::InvalidArgument, msg.into())
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ImbkStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("`{what}` is not UTF-8")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (ImbkStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn matrix(x: *const f64, n: usize, d: usize) -> Result<Matrix, (ImbkStatus, String)> {
    let len = n.checked_mul(d).ok_or_else(|| invalid("n * d overflows"))?;
    let data = slice(x, len, "x")?.to_vec();
    lib(Matrix::from_vec(n, d, data))
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn imbk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn imbk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a dataset from a row-major `n x d` feature array and `n` labels in
/// `0..n_classes`.
///
/// # Safety
/// `x` must point to `n * d` doubles, `y` to `n` labels and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn imbk_dataset_new(
    x: *const f64,
    n: usize,
    d: usize,
    y: *const u32,
    n_classes: usize,
    out: *mut *mut ImbkDataset,
) -> ImbkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = matrix(x, n, d)?;
        let labels: Vec<usize> = slice(y, n, "y")?.iter().map(|&v| v as usize).collect();
        let ds = lib(Dataset::numeric("ffi", m, labels, n_classes))?;
        *out = Box::into_raw(Box::new(ImbkDataset { inner: ds }));
        Ok(())
    })
}

/// Loads an ARFF (by extension) or CSV file whose last column is the target,
/// standardizing numeric columns and encoding nominal ones.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn imbk_dataset_from_file(path: *const c_char, out: *mut *mut ImbkDataset) -> ImbkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = Path::new(c_str(path, "path")?);
        let bytes = lib(std::fs::read(path).map_err(Error::from))?;
        let is_arff = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("arff"));
        let table = if is_arff {
            lib(imbalkit::ingest::parse_arff(&bytes))?.1
        } else {
            lib(imbalkit::ingest::parse_csv(&bytes, &Default::default()))?
        };
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let (ds, _) = lib(imbalkit::data::preprocess::encode_table(&table, &name))?;
        *out = Box::into_raw(Box::new(ImbkDataset { inner: ds }));
        Ok(())
    })
}

/// # Safety
/// `ds` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imbk_dataset_free(ds: *mut ImbkDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Writes sample, feature and class counts into any non-NULL pointer.
///
/// # Safety
/// `ds` must be a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn imbk_dataset_shape(
    ds: *const ImbkDataset,
    n_samples: *mut usize,
    n_features: *mut usize,
    n_classes: *mut usize,
) -> ImbkStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("ds"))?;
        if let Some(p) = n_samples.as_mut() {
            *p = ds.inner.n_samples();
        }
        if let Some(p) = n_features.as_mut() {
            *p = ds.inner.n_features();
        }
        if let Some(p) = n_classes.as_mut() {
            *p = ds.inner.n_classes();
        }
        Ok(())
    })
}

/// Fits `method` (for example `"spe"`) on `ds`. `params_json` is NULL or a
/// JSON object of parameter overrides.
///
/// # Safety
/// Pointers must be valid as documented; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imbk_model_fit(
    method: *const c_char,
    ds: *const ImbkDataset,
    params_json: *const c_char,
    seed: u64,
    out: *mut *mut ImbkModel,
) -> ImbkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let method = c_str(method, "method")?;
        let ds = ds.as_ref().ok_or_else(|| null("ds"))?;
        let params: Params = if params_json.is_null() {
            Params::new()
        } else {
            serde_json::from_str(c_str(params_json, "params_json")?)
                .map_err(|e| invalid(format!("params_json: {e}")))?
        };
        let model = lib(methods::fit(method, &ds.inner, &params, seed))?;
        *out = Box::into_raw(Box::new(ImbkModel { inner: model }));
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imbk_model_free(model: *mut ImbkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes the model predicts.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn imbk_model_n_classes(model: *const ImbkModel, out: *mut usize) -> ImbkStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.inner.estimator.n_classes();
        Ok(())
    })
}

/// Class probabilities for `n x d` rows into `out` (`n * n_classes`
/// doubles, row-major). `out_len` is the capacity of `out`.
///
/// # Safety
/// `x` must hold `n * d` doubles and `out` `out_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn imbk_model_predict_proba(
    model: *const ImbkModel,
    x: *const f64,
    n: usize,
    d: usize,
    out: *mut f64,
    out_len: usize,
) -> ImbkStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let p = lib(m.inner.predict_proba(&matrix(x, n, d)?))?;
        let values = p.as_slice();
        if out_len < values.len() {
            return Err(invalid(format!("out_len {out_len} < {} required", values.len())));
        }
        if out.is_null() && !values.is_empty() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
        Ok(())
    })
}

/// Predicted class per row into `out` (`n` labels).
///
/// # Safety
/// `x` must hold `n * d` doubles and `out` `n` labels.
#[no_mangle]
pub unsafe extern "C" fn imbk_model_predict(
    model: *const ImbkModel,
    x: *const f64,
    n: usize,
    d: usize,
    out: *mut u32,
) -> ImbkStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        let pred = lib(m.inner.predict(&matrix(x, n, d)?))?;
        if out.is_null() && n > 0 {
            return Err(null("out"));
        }
        for (i, c) in pred.into_iter().enumerate() {
            *out.add(i) = c as u32;
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn imbk_model_save(model: *const ImbkModel, path: *const c_char) -> ImbkStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        lib(m.inner.save(Path::new(c_str(path, "path")?)))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn imbk_model_load(path: *const c_char, out: *mut *mut ImbkModel) -> ImbkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = lib(TrainedModel::load(Path::new(c_str(path, "path")?)))?;
        *out = Box::into_raw(Box::new(ImbkModel { inner: model }));
        Ok(())
    })
}

/// AUPRC, macro-F1 and balanced accuracy from `n` labels and an `n x k`
/// row-major probability matrix.
///
/// # Safety
/// `y_true` must hold `n` labels, `proba` `n * k` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn imbk_evaluate(
    y_true: *const u32,
    proba: *const f64,
    n: usize,
    k: usize,
    out: *mut ImbkMetrics,
) -> ImbkStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let y: Vec<usize> = slice(y_true, n, "y_true")?.iter().map(|&v| v as usize).collect();
        let m = lib(metrics::evaluate(&y, &matrix(proba, n, k)?))?;
        *out = ImbkMetrics { auprc: m.auprc, macro_f1: m.macro_f1, balanced_accuracy: m.balanced_accuracy };
        Ok(())
    })
}
