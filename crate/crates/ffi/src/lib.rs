//! C interface to saved `stc` models.
//!
//! Load a model file into an opaque handle, classify UTF-8 text with it and
//! free it. Every fallible call returns an [`StcStatus`]; on failure the
//! calling thread's last error message is available from
//! [`stc_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use stc::model::{Model, ModelKind};
use stc::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The model file could not be read.
    Io = 3,
    /// The model file is malformed or inconsistent.
    InvalidModel = 4,
    /// The text has no sentence to read.
    InvalidInput = 5,
    /// The output buffer holds fewer entries than the model has categories.
    BufferTooSmall = 6,
    /// Any other failure, including a caught panic.
    Internal = 7,
}

/// A loaded model. Create with [`stc_model_load`], release with
/// [`stc_model_free`].
pub struct StcModel {
    model: Model,
    names: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: StcStatus, message: impl Into<String>) -> StcStatus {
    set_error(message);
    status
}

fn guarded(f: impl FnOnce() -> StcStatus) -> StcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(StcStatus::Internal, "panic inside the library"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, StcStatus> {
    if p.is_null() {
        return Err(fail(StcStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(StcStatus::InvalidUtf8, format!("{what}: {e}")))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn stc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn stc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads the model file at `path` and stores a new handle in `*out`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn stc_model_load(path: *const c_char, out: *mut *mut StcModel) -> StcStatus {
    guarded(|| {
        if out.is_null() {
            return fail(StcStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let path = match str_arg(path, "path") {
            Ok(p) => p,
            Err(s) => return s,
        };
        let model = match Model::load(Path::new(path)) {
            Ok(m) => m,
            Err(e @ Error::Io { .. }) => return fail(StcStatus::Io, e.to_string()),
            Err(e) => return fail(StcStatus::InvalidModel, e.to_string()),
        };
        let names = model
            .categories
            .names()
            .iter()
            .map(|n| CString::new(n.as_str()).unwrap_or_default())
            .collect();
        *out = Box::into_raw(Box::new(StcModel { model, names }));
        StcStatus::Ok
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `model` must come from [`stc_model_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn stc_model_free(model: *mut StcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of categories, 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stc_model_n_categories(model: *const StcModel) -> usize {
    model.as_ref().map_or(0, |m| m.names.len())
}

/// Name of category `k`, or null when out of range. Owned by the handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stc_model_category_name(model: *const StcModel, k: usize) -> *const c_char {
    model
        .as_ref()
        .and_then(|m| m.names.get(k))
        .map_or(ptr::null(), |n| n.as_ptr())
}

/// 1 for a reading-agent model, 0 for a baseline, -1 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn stc_model_is_sequential(model: *const StcModel) -> i32 {
    match model.as_ref().map(|m| m.model.kind()) {
        Some(ModelKind::Stc) => 1,
        Some(ModelKind::Baseline) => 0,
        None => -1,
    }
}

/// Classifies the NUL-terminated UTF-8 `text`. `labels[k]` is set to 1 for
/// every assigned category and 0 otherwise; `labels_len` must be at least
/// the number of categories. `read` and `n_sentences`, when not null,
/// receive the number of sentences read and in the text.
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string and
/// `labels` valid for `labels_len` writes.
#[no_mangle]
pub unsafe extern "C" fn stc_classify(
    model: *const StcModel,
    text: *const c_char,
    labels: *mut u8,
    labels_len: usize,
    read: *mut usize,
    n_sentences: *mut usize,
) -> StcStatus {
    guarded(|| {
        let Some(m) = model.as_ref() else {
            return fail(StcStatus::NullArgument, "model is null");
        };
        if labels.is_null() {
            return fail(StcStatus::NullArgument, "labels is null");
        }
        let text = match str_arg(text, "text") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let c = m.names.len();
        if labels_len < c {
            return fail(
                StcStatus::BufferTooSmall,
                format!("labels holds {labels_len} entries, the model has {c} categories"),
            );
        }
        let result = match m.model.classify_text(text) {
            Ok(r) => r,
            Err(e @ Error::InvalidDocument { .. }) => return fail(StcStatus::InvalidInput, e.to_string()),
            Err(e) => return fail(StcStatus::Internal, e.to_string()),
        };
        let out = std::slice::from_raw_parts_mut(labels, c);
        for (o, &l) in out.iter_mut().zip(&result.labels) {
            *o = l as u8;
        }
        if !read.is_null() {
            *read = result.read;
        }
        if !n_sentences.is_null() {
            *n_sentences = result.n;
        }
        StcStatus::Ok
    })
}
