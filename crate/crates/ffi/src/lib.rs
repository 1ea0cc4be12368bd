//! C ABI over `surveilcorr`.
//!
//! Tables and score matrices cross the boundary as opaque handles that the
//! caller frees with the matching `*_free` function. Every fallible call
//! returns an [`ScStatus`]; on failure, [`sc_last_error_message`] describes
//! the most recent error on the calling thread. Region indices are 1-based.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use surveilcorr::anomaly::ears_c;
use surveilcorr::xcorr::ccf_values;
use surveilcorr::{
    Error, ScoreConfig, ScoreMatrix, SurveillanceTable, TimeSeries, WeekRange, WeightVector,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    DataError = 4,
    Panic = 5,
}

/// Opaque parsed surveillance table.
pub struct ScTable(SurveillanceTable);

/// Opaque pairwise score matrix.
pub struct ScScoreMatrix(ScoreMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> ScStatus {
    match e {
        Error::Format { .. }
        | Error::Cell { .. }
        | Error::DuplicateIndex { .. }
        | Error::Csv(_) => ScStatus::ParseError,
        Error::Range { .. } | Error::RegionOutOfRange { .. } | Error::Domain(_) => {
            ScStatus::InvalidArgument
        }
        _ => ScStatus::DataError,
    }
}

struct Fail(ScStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(ScStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(ScStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ScStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ScStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn out_ref<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or_else(|| null(what))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next `sc_*` call on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Parses `len` bytes of wide-format UTF-8 CSV.
///
/// # Safety
/// `text` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_table_parse(
    text: *const u8,
    len: usize,
    out: *mut *mut ScTable,
) -> ScStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let bytes = slice(text, len, "text")?;
        let text = std::str::from_utf8(bytes)
            .map_err(|e| Fail(ScStatus::ParseError, format!("invalid UTF-8: {e}")))?;
        let table = surveilcorr::parse_wide_csv(text)?;
        *out = Box::into_raw(Box::new(ScTable(table)));
        Ok(())
    })
}

/// # Safety
/// `table` must come from [`sc_table_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sc_table_free(table: *mut ScTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of regions; 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_table_region_count(table: *const ScTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.n_regions())
}

/// Number of week columns; 0 for a null handle.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_table_week_count(table: *const ScTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.n_weeks())
}

/// Scores every region pair. `first_week = last_week = 0` selects the whole
/// record; `threads = 0` uses the default pool.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_score_matrix_compute(
    table: *const ScTable,
    lag_max: usize,
    first_week: usize,
    last_week: usize,
    prewhiten: bool,
    threads: usize,
    out: *mut *mut ScScoreMatrix,
) -> ScStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = std::ptr::null_mut();
        let table = table.as_ref().ok_or_else(|| null("table"))?;
        let week_range = match (first_week, last_week) {
            (0, 0) => None,
            (a, b) => Some(WeekRange::new(a, b)),
        };
        let config = ScoreConfig {
            lag_max,
            week_range,
            prewhiten,
            threads: (threads > 0).then_some(threads),
        };
        let m = surveilcorr::compute_all(&table.0, &config)?;
        *out = Box::into_raw(Box::new(ScScoreMatrix(m)));
        Ok(())
    })
}

/// # Safety
/// `matrix` must come from [`sc_score_matrix_compute`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sc_score_matrix_free(matrix: *mut ScScoreMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Number of stored (non-skipped) scores; 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_score_matrix_stored_count(matrix: *const ScScoreMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.stored_count())
}

/// Score of pair `(i, j)`. `*present` is false for a skipped pair, in which
/// case `*score` is NaN.
///
/// # Safety
/// `matrix` must be a live handle; `score` and `present` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_score_matrix_get(
    matrix: *const ScScoreMatrix,
    i: usize,
    j: usize,
    score: *mut f64,
    present: *mut bool,
) -> ScStatus {
    guard(|| {
        let m = matrix.as_ref().ok_or_else(|| null("matrix"))?;
        let score = out_ref(score, "score")?;
        let present = out_ref(present, "present")?;
        let value = m.0.get(i, j)?;
        *present = value.is_some();
        *score = value.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Writes the `k` best partners of `region` into `indices` and `scores`
/// (each of length `k`), best first.
///
/// # Safety
/// `matrix` must be a live handle; both arrays must hold `k` elements.
#[no_mangle]
pub unsafe extern "C" fn sc_score_matrix_top_k(
    matrix: *const ScScoreMatrix,
    region: usize,
    k: usize,
    indices: *mut usize,
    scores: *mut f64,
) -> ScStatus {
    guard(|| {
        let m = matrix.as_ref().ok_or_else(|| null("matrix"))?;
        let ranked = m.0.top_k(region, k)?;
        let indices = slice_mut(indices, k, "indices")?;
        let scores = slice_mut(scores, k, "scores")?;
        for (n, p) in ranked.iter().enumerate() {
            indices[n] = p.index;
            scores[n] = p.score;
        }
        Ok(())
    })
}

/// Cross-correlation of `x` and `y` (each of length `n`) at lags
/// `-lag_max..=lag_max`, written to `out` (length `2 * lag_max + 1`).
///
/// # Safety
/// `x` and `y` must hold `n` elements; `out` must hold `2 * lag_max + 1`.
#[no_mangle]
pub unsafe extern "C" fn sc_ccf(
    x: *const f64,
    y: *const f64,
    n: usize,
    lag_max: usize,
    out: *mut f64,
) -> ScStatus {
    guard(|| {
        let x = slice(x, n, "x")?;
        let y = slice(y, n, "y")?;
        let out = slice_mut(out, 2 * lag_max + 1, "out")?;
        let cv = ccf_values(x, y, lag_max, 1, 2)?;
        out.copy_from_slice(cv.values());
        Ok(())
    })
}

/// Weighted score of a correlation vector of odd length `len`.
///
/// # Safety
/// `values` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_weighted_score(
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> ScStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if len.is_multiple_of(2) {
            return Err(invalid(format!(
                "correlation vector length {len} must be odd"
            )));
        }
        let values = slice(values, len, "values")?;
        let cv = surveilcorr::CorrelationVector::from_values(len / 2, values.to_vec(), 0, 0, 0)?;
        *out = WeightVector::new(cv.lag_max).apply(cv.values());
        Ok(())
    })
}

/// EARS-C over `n` weekly counts. Writes `n - baseline` thresholds and alarm
/// flags, one per week after the first `baseline` weeks.
///
/// # Safety
/// `values` must hold `n` elements; `thresholds` and `alarms` must hold
/// `n - baseline` elements.
#[no_mangle]
pub unsafe extern "C" fn sc_ears_c(
    values: *const f64,
    n: usize,
    baseline: usize,
    alpha: f64,
    thresholds: *mut f64,
    alarms: *mut bool,
) -> ScStatus {
    guard(|| {
        let values = slice(values, n, "values")?;
        if n <= baseline {
            return Err(invalid(format!(
                "need more than {baseline} values, got {n}"
            )));
        }
        let ts = TimeSeries::new(1, 1, values.to_vec())?;
        let series = ears_c(&ts, baseline, alpha)?;
        let thresholds = slice_mut(thresholds, n - baseline, "thresholds")?;
        let alarms = slice_mut(alarms, n - baseline, "alarms")?;
        for (k, e) in series.entries.iter().enumerate() {
            thresholds[k] = e.threshold;
            alarms[k] = e.alarm;
        }
        Ok(())
    })
}
