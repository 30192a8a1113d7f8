//! C ABI for the icefloe sea ice simulator.
//!
//! Every fallible function returns an [`IcefloeStatus`]. On failure a
//! human-readable message is kept per thread and can be fetched with
//! [`icefloe_last_error`]. Handles are opaque and must be released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use icefloe::mms::{convergence_study, StudyPlan};
use icefloe::rheology;
use icefloe::{load_config_with_overrides, Error, PhysParams, RunSpec, Scheme, Simulation};

/// Result codes shared by all entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcefloeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidSpec = 4,
    NonFinite = 5,
    NonConvergence = 6,
    Io = 7,
    BufferTooSmall = 8,
    Numerical = 9,
    Panic = 10,
}

/// Parsed run configuration.
pub struct IcefloeSpec {
    text: String,
    overrides: Vec<String>,
    spec: RunSpec,
}

/// A simulation that is advanced one step at a time.
pub struct IcefloeSim {
    sim: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> IcefloeStatus {
    match err {
        Error::Config { .. } => IcefloeStatus::Config,
        Error::InvalidSpec(_) => IcefloeStatus::InvalidSpec,
        Error::NonFinite { .. } => IcefloeStatus::NonFinite,
        Error::NonConvergence { .. } | Error::SingularJacobian => IcefloeStatus::NonConvergence,
        Error::Io { .. } => IcefloeStatus::Io,
        _ => IcefloeStatus::Numerical,
    }
}

fn fail(status: IcefloeStatus, msg: impl Into<String>) -> IcefloeStatus {
    set_last_error(msg);
    status
}

fn from_error(err: Error) -> IcefloeStatus {
    let status = status_of(&err);
    fail(status, err.to_string())
}

/// Runs `f`, turning panics into [`IcefloeStatus::Panic`].
fn guard(f: impl FnOnce() -> IcefloeStatus) -> IcefloeStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(IcefloeStatus::Panic, msg)
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, IcefloeStatus> {
    if p.is_null() {
        return Err(fail(IcefloeStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(IcefloeStatus::InvalidUtf8, e.to_string()))
}

/// Message for the most recent failure on this thread, or null. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn icefloe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a configuration file's text into a new spec handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icefloe_spec_from_config(text: *const c_char, out: *mut *mut IcefloeSpec) -> IcefloeStatus {
    guard(|| {
        if out.is_null() {
            return fail(IcefloeStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        let text = match read_str(text) {
            Ok(t) => t.to_string(),
            Err(s) => return s,
        };
        match load_config_with_overrides(&text, &[]) {
            Ok(spec) => {
                *out = Box::into_raw(Box::new(IcefloeSpec {
                    text,
                    overrides: Vec::new(),
                    spec,
                }));
                IcefloeStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Overrides one configuration key. The spec is left unchanged on failure.
///
/// # Safety
/// `spec` must come from [`icefloe_spec_from_config`]; `key` and `value`
/// must be NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn icefloe_spec_set(
    spec: *mut IcefloeSpec,
    key: *const c_char,
    value: *const c_char,
) -> IcefloeStatus {
    guard(|| {
        let Some(s) = spec.as_mut() else {
            return fail(IcefloeStatus::NullPointer, "null spec handle");
        };
        let (key, value) = match (read_str(key), read_str(value)) {
            (Ok(k), Ok(v)) => (k, v),
            (Err(e), _) | (_, Err(e)) => return e,
        };
        let mut overrides = s.overrides.clone();
        overrides.push(format!("{key}={value}"));
        match load_config_with_overrides(&s.text, &overrides) {
            Ok(resolved) => {
                s.spec = resolved;
                s.overrides = overrides;
                IcefloeStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Number of cells of the configured grid.
///
/// # Safety
/// `spec` must be null or a live spec handle.
#[no_mangle]
pub unsafe extern "C" fn icefloe_spec_cells(spec: *const IcefloeSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.spec.n_cells)
}

/// # Safety
/// `spec` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn icefloe_spec_free(spec: *mut IcefloeSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Runs the spec to completion and writes all artefacts under `out_dir`.
/// `exit_code` receives the same value the command-line tool would exit
/// with. A blow-up is a normal outcome here: the status is `Ok` and the
/// exit code says what happened.
///
/// # Safety
/// `spec` must be a live handle, `out_dir` a NUL-terminated path and
/// `exit_code` null or writable.
#[no_mangle]
pub unsafe extern "C" fn icefloe_run(
    spec: *const IcefloeSpec,
    out_dir: *const c_char,
    exit_code: *mut i32,
) -> IcefloeStatus {
    guard(|| {
        let Some(s) = spec.as_ref() else {
            return fail(IcefloeStatus::NullPointer, "null spec handle");
        };
        let dir = match read_str(out_dir) {
            Ok(d) => d,
            Err(e) => return e,
        };
        match icefloe::output::run(&s.spec, Path::new(dir)) {
            Ok(report) => {
                if let Some(code) = exit_code.as_mut() {
                    *code = report.code;
                }
                if report.code != 0 {
                    if let Some(msg) = &report.summary.message {
                        set_last_error(msg.clone());
                    }
                }
                IcefloeStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Builds a simulation at the initial state of `spec`.
///
/// # Safety
/// `spec` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn icefloe_sim_new(spec: *const IcefloeSpec, out: *mut *mut IcefloeSim) -> IcefloeStatus {
    guard(|| {
        if out.is_null() {
            return fail(IcefloeStatus::NullPointer, "null output handle");
        }
        *out = ptr::null_mut();
        let Some(s) = spec.as_ref() else {
            return fail(IcefloeStatus::NullPointer, "null spec handle");
        };
        match Simulation::new(&s.spec) {
            Ok(sim) => {
                *out = Box::into_raw(Box::new(IcefloeSim { sim }));
                IcefloeStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Advances by one time step.
///
/// # Safety
/// `sim` must be a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn icefloe_sim_step(sim: *mut IcefloeSim) -> IcefloeStatus {
    guard(|| {
        let Some(s) = sim.as_mut() else {
            return fail(IcefloeStatus::NullPointer, "null simulation handle");
        };
        match s.sim.step() {
            Ok(_) => IcefloeStatus::Ok,
            Err(e) => from_error(e),
        }
    })
}

/// Model time in seconds, or NaN for a null handle.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn icefloe_sim_time(sim: *const IcefloeSim) -> f64 {
    sim.as_ref().map_or(f64::NAN, |s| s.sim.state().time)
}

/// Field selector for [`icefloe_sim_copy_field`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IcefloeField {
    Velocity = 0,
    Thickness = 1,
    Concentration = 2,
}

/// Number of values in one field. Velocity has one more slot than the
/// number of cells on the staggered grid.
///
/// # Safety
/// `sim` must be null or a live simulation handle.
#[no_mangle]
pub unsafe extern "C" fn icefloe_sim_field_len(sim: *const IcefloeSim, field: IcefloeField) -> usize {
    sim.as_ref().map_or(0, |s| field_of(&s.sim, field).len())
}

fn field_of(sim: &Simulation, field: IcefloeField) -> &[f64] {
    let st = sim.state();
    match field {
        IcefloeField::Velocity => &st.u,
        IcefloeField::Thickness => &st.h,
        IcefloeField::Concentration => &st.a,
    }
}

/// Copies a field into `buf`, which must hold at least
/// [`icefloe_sim_field_len`] values.
///
/// # Safety
/// `sim` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn icefloe_sim_copy_field(
    sim: *const IcefloeSim,
    field: IcefloeField,
    buf: *mut f64,
    len: usize,
) -> IcefloeStatus {
    guard(|| {
        let Some(s) = sim.as_ref() else {
            return fail(IcefloeStatus::NullPointer, "null simulation handle");
        };
        if buf.is_null() {
            return fail(IcefloeStatus::NullPointer, "null buffer");
        }
        let src = field_of(&s.sim, field);
        if len < src.len() {
            return fail(
                IcefloeStatus::BufferTooSmall,
                format!("buffer holds {len} values, field has {}", src.len()),
            );
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
        IcefloeStatus::Ok
    })
}

/// # Safety
/// `sim` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn icefloe_sim_free(sim: *mut IcefloeSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Ice strength `P` in N/m with the default parameters.
#[no_mangle]
pub extern "C" fn icefloe_ice_strength(h: f64, a: f64) -> f64 {
    rheology::ice_strength(h, a, &PhysParams::default())
}

/// Internal stress in N/m for a strain rate and local state, with the
/// default parameters.
#[no_mangle]
pub extern "C" fn icefloe_stress(du_dx: f64, h: f64, a: f64) -> f64 {
    rheology::stress_from_state(du_dx, h, a, &PhysParams::default())
}

/// Values per row written by [`icefloe_converge`]: dx, three errors and
/// three rates.
pub const ICEFLOE_CONVERGENCE_COLUMNS: usize = 7;

/// Runs the manufactured-solution refinement study at 50, 100 and 200
/// cells. `scheme` is `"cd"` or `"weno"`; a non-positive `horizon` keeps the
/// default of 5 s. Rows are written to `rows` in row-major order with NaN
/// for the rates of the coarsest level, and `n_rows` receives the row count.
///
/// # Safety
/// `scheme` must be a NUL-terminated string, `rows` valid for `len` writes
/// and `n_rows` writable.
#[no_mangle]
pub unsafe extern "C" fn icefloe_converge(
    scheme: *const c_char,
    horizon: f64,
    rows: *mut f64,
    len: usize,
    n_rows: *mut usize,
) -> IcefloeStatus {
    guard(|| {
        if rows.is_null() || n_rows.is_null() {
            return fail(IcefloeStatus::NullPointer, "null output buffer");
        }
        let scheme = match read_str(scheme) {
            Ok("cd") => Scheme::Cd,
            Ok("weno") => Scheme::Weno,
            Ok(other) => return fail(IcefloeStatus::InvalidSpec, format!("unknown scheme `{other}`")),
            Err(e) => return e,
        };
        let mut plan = StudyPlan::default();
        if horizon > 0.0 {
            plan.horizon = horizon;
        }
        let needed = plan.resolutions.len() * ICEFLOE_CONVERGENCE_COLUMNS;
        if len < needed {
            return fail(
                IcefloeStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {needed}"),
            );
        }
        let table = match convergence_study(scheme, &plan) {
            Ok(t) => t,
            Err(e) => return from_error(e),
        };
        let out = std::slice::from_raw_parts_mut(rows, len);
        for (chunk, r) in out.chunks_mut(ICEFLOE_CONVERGENCE_COLUMNS).zip(&table) {
            let nan = f64::NAN;
            chunk.copy_from_slice(&[
                r.dx,
                r.err_u,
                r.err_h,
                r.err_a,
                r.rate_u.unwrap_or(nan),
                r.rate_h.unwrap_or(nan),
                r.rate_a.unwrap_or(nan),
            ]);
        }
        *n_rows = table.len();
        IcefloeStatus::Ok
    })
}
