// Copyright 2026 The colocate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! C interface to the `colocate` miner.
//!
//! Datasets and transaction sets are opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`ColocateStatus`]; on failure the message is available from
//! [`colocate_last_error_message`] until the next call on the same thread.
//! Strings returned by the library must be released with
//! [`colocate_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use colocate::geom::SpatialObject;
use colocate::measures::{expected_confidence, expected_support, Pattern, Rule};
use colocate::pipeline::{effective_threads, prepare, with_threads, RunConfig};
use colocate::significance::{self, mine_significant};
use colocate::transact::{get_transactions, grid_for_dataset, suggested_spacing, BufferParams, TransactionSet};
use colocate::uncertainty::UncertaintyModel;
use colocate::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColocateStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    UndefinedConfidence = 5,
    Panic = 6,
}

/// A parsed spatial dataset.
pub struct ColocateDataset {
    objects: Vec<SpatialObject>,
}

/// Probabilistic transactions derived from a dataset.
pub struct ColocateTransactions {
    inner: TransactionSet,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ColocateStatus {
    match e {
        Error::Validation(_) => ColocateStatus::InvalidArgument,
        Error::UndefinedConfidence { .. } => ColocateStatus::UndefinedConfidence,
        Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => ColocateStatus::Parse,
        Error::Io { .. } => ColocateStatus::Io,
    }
}

struct Fail(ColocateStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let mut msg = e.to_string();
        let mut src = std::error::Error::source(&e);
        while let Some(s) = src {
            msg.push_str(": ");
            msg.push_str(&s.to_string());
            src = s.source();
        }
        Fail(status_of(&e), msg)
    }
}

fn null(what: &str) -> Fail {
    Fail(ColocateStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ColocateStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ColocateStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ColocateStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ColocateStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Reads a dataset CSV (`id,feature,shape_type,coords,amount[,radius]`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colocate_dataset_from_csv(
    path: *const c_char,
    out: *mut *mut ColocateDataset,
) -> ColocateStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let objects = colocate::io::read_dataset(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(ColocateDataset { objects }));
        Ok(())
    })
}

/// # Safety
/// `ds` must be a live dataset handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colocate_dataset_len(ds: *const ColocateDataset, out: *mut usize) -> ColocateStatus {
    guard(|| {
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        *out_arg(out, "out")? = ds.objects.len();
        Ok(())
    })
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colocate_dataset_free(ds: *mut ColocateDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Transactionizes a dataset. A `spacing` of 0 or less picks one from the
/// buffer sizes. `model` is `curve`, `linear`, `certain` or
/// `categorical:ub=p,...`; null means `curve`.
///
/// # Safety
/// `ds` must be a live dataset handle, `model` null or NUL-terminated,
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colocate_transactions_new(
    ds: *const ColocateDataset,
    spacing: f64,
    model: *const c_char,
    out: *mut *mut ColocateTransactions,
) -> ColocateStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let ds = ds.as_ref().ok_or_else(|| null("dataset"))?;
        let model: UncertaintyModel =
            if model.is_null() { UncertaintyModel::default() } else { str_arg(model, "model")?.parse()? };
        let params = BufferParams::default();
        let spacing = if spacing > 0.0 { spacing } else { suggested_spacing(&ds.objects, &params)? };
        let grid = grid_for_dataset(&ds.objects, spacing, &params, None)?;
        let inner = get_transactions(&ds.objects, &grid, &model, &params)?;
        *out = Box::into_raw(Box::new(ColocateTransactions { inner }));
        Ok(())
    })
}

/// # Safety
/// `ts` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn colocate_transactions_len(ts: *const ColocateTransactions, out: *mut usize) -> ColocateStatus {
    guard(|| {
        let ts = ts.as_ref().ok_or_else(|| null("transactions"))?;
        *out_arg(out, "out")? = ts.inner.len();
        Ok(())
    })
}

/// # Safety
/// `ts` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colocate_transactions_free(ts: *mut ColocateTransactions) {
    if !ts.is_null() {
        drop(Box::from_raw(ts));
    }
}

/// Expected support of a pattern written `A+B+C`.
///
/// # Safety
/// `ts` must be a live handle, `pattern` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn colocate_expected_support(
    ts: *const ColocateTransactions,
    pattern: *const c_char,
    out: *mut f64,
) -> ColocateStatus {
    guard(|| {
        let ts = ts.as_ref().ok_or_else(|| null("transactions"))?;
        let p: Pattern = str_arg(pattern, "pattern")?.parse()?;
        *out_arg(out, "out")? = expected_support(&p, &ts.inner);
        Ok(())
    })
}

/// Expected confidence of a rule written `A+B->C`. Returns
/// `COLOCATE_STATUS_UNDEFINED_CONFIDENCE` when the antecedent never occurs.
///
/// # Safety
/// `ts` must be a live handle, `rule` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn colocate_expected_confidence(
    ts: *const ColocateTransactions,
    rule: *const c_char,
    out: *mut f64,
) -> ColocateStatus {
    guard(|| {
        let ts = ts.as_ref().ok_or_else(|| null("transactions"))?;
        let r: Rule = str_arg(rule, "rule")?.parse()?;
        *out_arg(out, "out")? = expected_confidence(&r, &ts.inner)?;
        Ok(())
    })
}

/// `(exceedances + 1) / (runs + 1)`.
#[no_mangle]
pub extern "C" fn colocate_p_value(exceedances: usize, runs: usize) -> f64 {
    significance::p_value(exceedances, runs)
}

/// Runs the miner on a JSON run configuration (the `config` object of a
/// manifest; omitted fields take their defaults) and returns the report as
/// JSON. Nothing is written to disk.
///
/// # Safety
/// `config_json` must be NUL-terminated and `out` a valid pointer. The
/// returned string must be released with [`colocate_string_free`].
#[no_mangle]
pub unsafe extern "C" fn colocate_mine_json(config_json: *const c_char, out: *mut *mut c_char) -> ColocateStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let cfg: RunConfig = serde_json::from_str(str_arg(config_json, "config")?).map_err(Error::from)?;
        let problem = prepare(&cfg)?;
        let report = with_threads(effective_threads(cfg.threads), || mine_significant(&problem, &cfg.significance()))??;
        let json = serde_json::to_string(&report).map_err(Error::from)?;
        *out = CString::new(json).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn colocate_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn colocate_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}
