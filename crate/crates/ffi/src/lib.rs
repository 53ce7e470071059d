//! C ABI over `conetrap`.
//!
//! Every fallible call returns a [`CtStatus`]; on failure the message is
//! kept per thread and read with [`ct_last_error_message`]. Objects are
//! opaque handles released with their `*_free` function. Strings returned
//! by the library are released with [`ct_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;
use std::sync::Arc;

use conetrap::cli::{self, RunConfig, RunOutput};
use conetrap::discretization::{assemble_axisym, build_latitude_mesh, ElementOrder};
use conetrap::model::{make_cap_geometry, make_material, AzimuthalMode};
use conetrap::singularity::{analyze_pencil, perturbation_slope, SingularExponent, Tolerances};
use conetrap::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    OutOfRange = 3,
    AlphaOutOfRange = 10,
    SignViolation = 11,
    NegativeDissipation = 12,
    InvalidCutoff = 13,
    GeometryKindMismatch = 14,
    MeshFileInvalid = 15,
    PoleQuadratureFailure = 16,
    DegenerateTriangle = 17,
    MassMatrixSingular = 20,
    NoConvergence = 21,
    EndpointDegeneracy = 30,
    NoSpectralGap = 31,
    NoBlackHolePair = 32,
    TrackingAmbiguity = 33,
    TauOutsidePlateau = 40,
    QuadratureNotConverged = 41,
    PointOutsideChart = 42,
    ConfigParse = 50,
    ConfigValidation = 51,
    InvalidInput = 60,
    Io = 61,
    Panic = 99,
}

impl From<&Error> for CtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::AlphaOutOfRange { .. } => CtStatus::AlphaOutOfRange,
            Error::SignViolation { .. } => CtStatus::SignViolation,
            Error::NegativeDissipation { .. } => CtStatus::NegativeDissipation,
            Error::InvalidCutoff(_) => CtStatus::InvalidCutoff,
            Error::GeometryKindMismatch => CtStatus::GeometryKindMismatch,
            Error::MeshFileInvalid { .. } => CtStatus::MeshFileInvalid,
            Error::PoleQuadratureFailure { .. } => CtStatus::PoleQuadratureFailure,
            Error::DegenerateTriangle { .. } => CtStatus::DegenerateTriangle,
            Error::MassMatrixSingular { .. } => CtStatus::MassMatrixSingular,
            Error::NoConvergence(_) => CtStatus::NoConvergence,
            Error::EndpointDegeneracy { .. } => CtStatus::EndpointDegeneracy,
            Error::NoSpectralGap => CtStatus::NoSpectralGap,
            Error::NoBlackHolePair => CtStatus::NoBlackHolePair,
            Error::TrackingAmbiguity { .. } => CtStatus::TrackingAmbiguity,
            Error::TauOutsidePlateau { .. } => CtStatus::TauOutsidePlateau,
            Error::QuadratureNotConverged { .. } => CtStatus::QuadratureNotConverged,
            Error::PointOutsideChart { .. } => CtStatus::PointOutsideChart,
            Error::ConfigParse { .. } => CtStatus::ConfigParse,
            Error::ConfigValidation(_) => CtStatus::ConfigValidation,
            Error::InvalidInput(_) => CtStatus::InvalidInput,
            Error::Io(_) => CtStatus::Io,
        }
    }
}

/// Parsed run description.
pub struct CtConfig(RunConfig);

/// Output of a finished run.
pub struct CtRun {
    output: RunOutput,
}

/// An outgoing singular exponent of a circular cap.
pub struct CtExponent {
    exponent: SingularExponent,
    lambda_prime: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: CtStatus, msg: impl Into<String>) -> CtStatus {
    set_error(msg.into());
    status
}

fn fail_with(e: &Error) -> CtStatus {
    fail(e.into(), format!("[{}] {e}", e.code()))
}

/// Runs `f`, turning panics into [`CtStatus::Panic`] instead of unwinding into C.
fn guard(f: impl FnOnce() -> CtStatus) -> CtStatus {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(CtStatus::Panic, "internal panic"),
    }
}

unsafe fn str_arg<'a>(p: *const c_char) -> Result<&'a str, CtStatus> {
    if p.is_null() {
        return Err(fail(CtStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CtStatus::InvalidUtf8, "string argument is not UTF-8"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or NULL. Owned by the library;
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ct_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ct_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ct_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a TOML run description. `command` may be NULL to use the document's own.
///
/// # Safety
/// `text` and `command` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_config_parse(
    text: *const c_char,
    command: *const c_char,
    out: *mut *mut CtConfig,
) -> CtStatus {
    guard(|| {
        if out.is_null() {
            return fail(CtStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match str_arg(text) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let command = if command.is_null() {
            None
        } else {
            let name = match str_arg(command) {
                Ok(c) => c,
                Err(s) => return s,
            };
            match name.parse::<cli::Command>() {
                Ok(c) => Some(c),
                Err(e) => return fail_with(&e),
            }
        };
        match cli::parse_config(text, command) {
            Ok(c) => {
                *out = Box::into_raw(Box::new(CtConfig(c)));
                CtStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `config` must be NULL or a handle from [`ct_config_parse`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ct_config_free(config: *mut CtConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Executes a parsed config. A handle is produced even when the run itself
/// fails; the status then carries the run's error.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_run(config: *const CtConfig, out: *mut *mut CtRun) -> CtStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return fail(CtStatus::NullPointer, "null argument");
        }
        let output = cli::run_command(&(*config).0);
        let status = output.error.as_ref().map_or(CtStatus::Ok, fail_with);
        *out = Box::into_raw(Box::new(CtRun { output }));
        status
    })
}

/// # Safety
/// `run` must be NULL or a handle from [`ct_run`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ct_run_free(run: *mut CtRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Process exit code the command line tool would return (0, 1 or 2); -1 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_run_exit_code(run: *const CtRun) -> i32 {
    run.as_ref().map_or(-1, |r| r.output.exit_code)
}

/// Number of data rows; 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_run_row_count(run: *const CtRun) -> usize {
    run.as_ref().map_or(0, |r| r.output.table.rows.len())
}

/// Number of columns; 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_run_column_count(run: *const CtRun) -> usize {
    run.as_ref().map_or(0, |r| r.output.table.columns.len())
}

/// Numeric cell `(row, column)`. Booleans read as 0/1; empty cells as NaN.
///
/// # Safety
/// `run` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_run_value(run: *const CtRun, row: usize, column: usize, value: *mut f64) -> CtStatus {
    guard(|| {
        let (Some(run), false) = (run.as_ref(), value.is_null()) else {
            return fail(CtStatus::NullPointer, "null argument");
        };
        let Some(cell) = run.output.table.rows.get(row).and_then(|r| r.get(column)) else {
            return fail(CtStatus::OutOfRange, format!("no cell ({row}, {column})"));
        };
        *value = match cell {
            cli::Cell::Float(x) => *x,
            cli::Cell::Int(i) => *i as f64,
            cli::Cell::Bool(b) => f64::from(u8::from(*b)),
            cli::Cell::Empty => f64::NAN,
            cli::Cell::Text(_) => return fail(CtStatus::InvalidInput, "cell holds text"),
        };
        CtStatus::Ok
    })
}

/// The run's table serialized as CSV (`json = false`) or JSON. Free with [`ct_string_free`].
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_run_render(run: *const CtRun, json: bool) -> *mut c_char {
    match run.as_ref() {
        Some(r) => {
            let format = if json { cli::Format::Json } else { cli::Format::Csv };
            into_c_string(r.output.table.render(format))
        }
        None => ptr::null_mut(),
    }
}

/// Leading outgoing exponent of a circular cap of angle `alpha` (radians)
/// for azimuthal mode `mode`, using `n_elements` quadratic elements.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ct_cap_exponent(
    alpha: f64,
    eps_plus: f64,
    eps_minus: f64,
    mode: u32,
    n_elements: usize,
    out: *mut *mut CtExponent,
) -> CtStatus {
    guard(|| {
        if out.is_null() {
            return fail(CtStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let tol = Tolerances::default();
        let result = (|| {
            let geometry = make_cap_geometry(alpha)?;
            let material = make_material(eps_plus, eps_minus, 0.0)?;
            let mesh = Arc::new(build_latitude_mesh(&geometry, n_elements)?);
            let pencil = assemble_axisym(mesh, &material, AzimuthalMode(mode), ElementOrder::P2)?;
            let exponent = analyze_pencil(&pencil, &material, &tol)?
                .pairs
                .into_iter()
                .next()
                .ok_or(Error::NoBlackHolePair)?;
            let lambda_prime = perturbation_slope(&exponent, tol.degeneracy)?.re;
            Ok::<_, Error>(CtExponent { exponent, lambda_prime })
        })();
        match result {
            Ok(e) => {
                *out = Box::into_raw(Box::new(e));
                CtStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// # Safety
/// `exponent` must be NULL or a handle from [`ct_cap_exponent`], freed once.
#[no_mangle]
pub unsafe extern "C" fn ct_exponent_free(exponent: *mut CtExponent) {
    if !exponent.is_null() {
        drop(Box::from_raw(exponent));
    }
}

/// Signed `η` of the outgoing exponent `−1/2 + iη`; NaN for NULL.
///
/// # Safety
/// `exponent` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_exponent_eta(exponent: *const CtExponent) -> f64 {
    exponent.as_ref().map_or(f64::NAN, |e| e.exponent.eta_out())
}

/// `∫ ε|Φ|²`; NaN for NULL.
///
/// # Safety
/// `exponent` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_exponent_d(exponent: *const CtExponent) -> f64 {
    exponent.as_ref().map_or(f64::NAN, |e| e.exponent.d)
}

/// Spectral gap `β₀`; NaN for NULL.
///
/// # Safety
/// `exponent` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_exponent_beta0(exponent: *const CtExponent) -> f64 {
    exponent.as_ref().map_or(f64::NAN, |e| e.exponent.beta0)
}

/// Slope `dλ/dδ` at `δ = 0`; NaN for NULL.
///
/// # Safety
/// `exponent` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ct_exponent_lambda_prime(exponent: *const CtExponent) -> f64 {
    exponent.as_ref().map_or(f64::NAN, |e| e.lambda_prime)
}
