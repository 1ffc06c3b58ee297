//! C ABI for the `wsobolev` library.
//!
//! Conventions:
//!
//! * all objects are opaque handles created by `*_new`/`*_from_json`
//!   constructors and released with the matching `*_free`;
//! * every fallible call returns a `WsStatus`; on failure the thread-local
//!   error message is available via `ws_last_error_message`;
//! * strings are NUL-terminated UTF-8; numeric output goes through out
//!   pointers that are written only on `WS_STATUS_OK`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::ptr;

use wsobolev::closability::{transversal_counterexample, Verdict};
use wsobolev::config::{FieldSpec, MeasureSpec};
use wsobolev::energy::{parallelogram_defect, EnergyEvaluator};
use wsobolev::error::Error;
use wsobolev::fields::{NormPlugin, ScalarField};
use wsobolev::measure::{quadrature, Measure, Resolution};

/// Status code of every fallible FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WsStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Invalid configuration or input (bad JSON, bad measure, bad field).
    InvalidInput = 3,
    /// A mathematical invariant failed while computing.
    InvariantViolation = 4,
    /// Unexpected internal failure.
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(err: &Error) -> WsStatus {
    match err {
        Error::Config(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::InvalidMeasure { .. }
        | Error::InvalidField(_)
        | Error::UnsupportedField(_)
        | Error::DimensionMismatch { .. } => WsStatus::InvalidInput,
        Error::CertificateInconsistent(_)
        | Error::NonFiniteValue { .. }
        | Error::DegeneratePatch { .. }
        | Error::EnsembleRefused(_) => WsStatus::InvariantViolation,
    }
}

fn fail(err: Error) -> WsStatus {
    let code = status_of(&err);
    set_error(err.to_string());
    code
}

/// Copy the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len` bytes). Returns the full message length in bytes.
#[no_mangle]
pub unsafe extern "C" fn ws_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

unsafe fn utf8_arg<'a>(s: *const c_char) -> Result<&'a str, WsStatus> {
    if s.is_null() {
        set_error("NULL string argument");
        return Err(WsStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        WsStatus::InvalidUtf8
    })
}

/// Opaque handle to a structured measure.
pub struct WsMeasure {
    inner: Measure,
}

/// Opaque handle to a scalar field.
pub struct WsField {
    inner: ScalarField,
    dim: usize,
}

/// Build a measure from a catalog id (see the CLI `--list-catalog`).
///
/// On success writes a new handle to `out`; release with `ws_measure_free`.
#[no_mangle]
pub unsafe extern "C" fn ws_measure_catalog(
    id: *const c_char,
    out: *mut *mut WsMeasure,
) -> WsStatus {
    if out.is_null() {
        set_error("NULL out pointer");
        return WsStatus::NullPointer;
    }
    let id = match utf8_arg(id) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let Some(spec) = MeasureSpec::named(id) else {
        set_error(format!("unknown catalog measure '{id}'"));
        return WsStatus::InvalidInput;
    };
    match spec.build() {
        Ok(m) => {
            *out = Box::into_raw(Box::new(WsMeasure { inner: m }));
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Build a measure from a JSON measure spec.
#[no_mangle]
pub unsafe extern "C" fn ws_measure_from_json(
    json: *const c_char,
    out: *mut *mut WsMeasure,
) -> WsStatus {
    if out.is_null() {
        set_error("NULL out pointer");
        return WsStatus::NullPointer;
    }
    let text = match utf8_arg(json) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let spec: MeasureSpec = match serde_json::from_str(text) {
        Ok(s) => s,
        Err(e) => return fail(Error::Json(e)),
    };
    match spec.build() {
        Ok(m) => {
            *out = Box::into_raw(Box::new(WsMeasure { inner: m }));
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Release a measure handle. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ws_measure_free(handle: *mut WsMeasure) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Ambient dimension of the measure; 0 on NULL.
#[no_mangle]
pub unsafe extern "C" fn ws_measure_dim(handle: *const WsMeasure) -> usize {
    if handle.is_null() {
        return 0;
    }
    (*handle).inner.dim()
}

/// Total quadrature mass of the measure at the default resolution.
#[no_mangle]
pub unsafe extern "C" fn ws_measure_mass(handle: *const WsMeasure, out: *mut f64) -> WsStatus {
    if handle.is_null() || out.is_null() {
        set_error("NULL argument");
        return WsStatus::NullPointer;
    }
    match quadrature(&(*handle).inner, &Resolution::default()) {
        Ok(rule) => {
            *out = rule.total_mass();
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Build a field of ambient dimension `dim` from a JSON field spec.
#[no_mangle]
pub unsafe extern "C" fn ws_field_from_json(
    json: *const c_char,
    dim: usize,
    out: *mut *mut WsField,
) -> WsStatus {
    if out.is_null() {
        set_error("NULL out pointer");
        return WsStatus::NullPointer;
    }
    let text = match utf8_arg(json) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let spec: FieldSpec = match serde_json::from_str(text) {
        Ok(s) => s,
        Err(e) => return fail(Error::Json(e)),
    };
    match spec.build(dim) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(WsField { inner: f, dim }));
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Release a field handle. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn ws_field_free(handle: *mut WsField) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Evaluate the field at a point of length `dim`.
#[no_mangle]
pub unsafe extern "C" fn ws_field_value(
    handle: *const WsField,
    point: *const f64,
    dim: usize,
    out: *mut f64,
) -> WsStatus {
    if handle.is_null() || point.is_null() || out.is_null() {
        set_error("NULL argument");
        return WsStatus::NullPointer;
    }
    let f = &*handle;
    if dim != f.dim {
        return fail(Error::DimensionMismatch {
            expected: f.dim,
            got: dim,
        });
    }
    let x = std::slice::from_raw_parts(point, dim);
    *out = f.inner.value(x);
    WsStatus::Ok
}

/// Evaluate the analytic gradient at a point; `out` must hold `dim` values.
#[no_mangle]
pub unsafe extern "C" fn ws_field_gradient(
    handle: *const WsField,
    point: *const f64,
    dim: usize,
    out: *mut f64,
) -> WsStatus {
    if handle.is_null() || point.is_null() || out.is_null() {
        set_error("NULL argument");
        return WsStatus::NullPointer;
    }
    let f = &*handle;
    if dim != f.dim {
        return fail(Error::DimensionMismatch {
            expected: f.dim,
            got: dim,
        });
    }
    let x = std::slice::from_raw_parts(point, dim);
    let g = f.inner.gradient(x);
    ptr::copy_nonoverlapping(g.as_ptr(), out, dim);
    WsStatus::Ok
}

/// Norm plug-in selector for the Lipschitz energy: 1, 2, or 0 for ∞.
fn norm_from_int(p: u32) -> Option<NormPlugin> {
    match p {
        1 => Some(NormPlugin::L1),
        2 => Some(NormPlugin::L2),
        0 => Some(NormPlugin::LInf),
        _ => None,
    }
}

/// E_lip(f; p) = ½ ∫ lip_p(f)² dμ at the default resolution.
/// `p` is 1, 2, or 0 for the ∞-norm.
#[no_mangle]
pub unsafe extern "C" fn ws_energy_lip(
    measure: *const WsMeasure,
    field: *const WsField,
    p: u32,
    out: *mut f64,
) -> WsStatus {
    if measure.is_null() || field.is_null() || out.is_null() {
        set_error("NULL argument");
        return WsStatus::NullPointer;
    }
    let Some(norm) = norm_from_int(p) else {
        set_error(format!("unsupported norm selector {p}; use 1, 2, or 0 for ∞"));
        return WsStatus::InvalidInput;
    };
    let run = || -> wsobolev::Result<f64> {
        let ev = EnergyEvaluator::lip(&(*measure).inner, norm, &Resolution::default())?;
        ev.energy(&(*field).inner)
    };
    match run() {
        Ok(v) => {
            *out = v;
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Projected-gradient energy ½ ∫ |π_{V(μ,x)} ∇f|² dμ at the default
/// resolution.
#[no_mangle]
pub unsafe extern "C" fn ws_energy_projected(
    measure: *const WsMeasure,
    field: *const WsField,
    out: *mut f64,
) -> WsStatus {
    if measure.is_null() || field.is_null() || out.is_null() {
        set_error("NULL argument");
        return WsStatus::NullPointer;
    }
    let run = || -> wsobolev::Result<f64> {
        let ev = EnergyEvaluator::projected(&(*measure).inner, &Resolution::default())?;
        ev.energy(&(*field).inner)
    };
    match run() {
        Ok(v) => {
            *out = v;
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Parallelogram defect E(f+g) + E(f−g) − 2E(f) − 2E(g) of the Lipschitz
/// energy. `p` as in `ws_energy_lip`.
#[no_mangle]
pub unsafe extern "C" fn ws_parallelogram_defect(
    measure: *const WsMeasure,
    f: *const WsField,
    g: *const WsField,
    p: u32,
    out: *mut f64,
) -> WsStatus {
    if measure.is_null() || f.is_null() || g.is_null() || out.is_null() {
        set_error("NULL argument");
        return WsStatus::NullPointer;
    }
    let Some(norm) = norm_from_int(p) else {
        set_error(format!("unsupported norm selector {p}; use 1, 2, or 0 for ∞"));
        return WsStatus::InvalidInput;
    };
    let run = || -> wsobolev::Result<f64> {
        let ev = EnergyEvaluator::lip(&(*measure).inner, norm, &Resolution::default())?;
        Ok(parallelogram_defect(&ev, &(*f).inner, &(*g).inner)?.defect)
    };
    match run() {
        Ok(v) => {
            *out = v;
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Closability verdict for the measure's Sobolev form from the transversal
/// vanishing-sequence probe: writes 1 for NOT_CLOSABLE (with a replayable
/// witness), 0 for NO_COUNTEREXAMPLE_FOUND.
#[no_mangle]
pub unsafe extern "C" fn ws_closability_probe(
    measure: *const WsMeasure,
    out_not_closable: *mut i32,
) -> WsStatus {
    if measure.is_null() || out_not_closable.is_null() {
        set_error("NULL argument");
        return WsStatus::NullPointer;
    }
    match transversal_counterexample(&(*measure).inner, &Resolution::default()) {
        Ok(cert) => {
            *out_not_closable = match cert.verdict {
                Verdict::NotClosable => 1,
                Verdict::NoCounterexampleFound => 0,
            };
            WsStatus::Ok
        }
        Err(e) => fail(e),
    }
}
