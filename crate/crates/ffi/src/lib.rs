//! C ABI over `qpde`: build a problem from JSON, get its Trotter step as a
//! circuit, evolve a state and read amplitudes back.
//!
//! Every fallible call returns a [`QpdeStatus`]; on failure the message is
//! available from [`qpde_last_error`] until the next failing call on the
//! same thread. Handles are opaque and must be released with their `_free`
//! function. Strings returned by the library are released with
//! [`qpde_string_free`].

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qpde::analysis::step_bound;
use qpde::circuit::{count_cnots, export_qasm, step_circuit, Circuit, CountMode};
use qpde::error::Error;
use qpde::experiment::{run_experiment, validate_config};
use qpde::hamilton::PDEProblem;
use qpde::simulator::{evolve, expectation, Observable, StateVector};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpdeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Unsupported = 4,
    TooLarge = 5,
    Invariant = 6,
    Io = 7,
    Panic = 8,
}

/// A discretized PDE problem.
pub struct QpdeProblem(PDEProblem);

/// A gate sequence on a fixed register.
pub struct QpdeCircuit(Circuit);

/// A normalized state vector.
pub struct QpdeState(StateVector);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QpdeStatus {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::NotHermitian(_) => {
            QpdeStatus::InvalidArgument
        }
        Error::Config(_) | Error::Json(_) | Error::Qasm { .. } => QpdeStatus::Config,
        Error::Unsupported(_) | Error::UndecomposedGate => QpdeStatus::Unsupported,
        Error::TooLarge(..) | Error::NoConvergence(_) => QpdeStatus::TooLarge,
        Error::Invariant(_) => QpdeStatus::Invariant,
        Error::Io(_) => QpdeStatus::Io,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (QpdeStatus, String)>) -> QpdeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QpdeStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside qpde".into());
            QpdeStatus::Panic
        }
    }
}

fn lift<T>(r: qpde::error::Result<T>) -> Result<T, (QpdeStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (QpdeStatus, String) {
    (QpdeStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (QpdeStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller guarantees a NUL-terminated string that outlives the call.
    let s = unsafe { CStr::from_ptr(p) };
    s.to_str()
        .map_err(|_| (QpdeStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (QpdeStatus, String)> {
    // SAFETY: caller passes a live handle from this library or null.
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> Result<(), (QpdeStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    // SAFETY: non-null and, per the contract, valid for writes.
    unsafe { out.write(v) };
    Ok(())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn qpde_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Owned by the
/// library; valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qpde_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qpde_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: produced by CString::into_raw in this crate.
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parses a problem descriptor (the `problem` object of an experiment config).
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qpde_problem_from_json(
    json: *const c_char,
    out: *mut *mut QpdeProblem,
) -> QpdeStatus {
    guard(|| {
        let text = unsafe { read_str(json, "json") }?;
        let p: PDEProblem =
            serde_json::from_str(text).map_err(|e| (QpdeStatus::Config, e.to_string()))?;
        let errs = p.problems();
        if !errs.is_empty() {
            return Err((QpdeStatus::Config, errs.join("; ")));
        }
        let h = Box::into_raw(Box::new(QpdeProblem(p)));
        unsafe { write_out(out, h, "out") }.inspect_err(|_| {
            // SAFETY: just allocated, never shared.
            drop(unsafe { Box::from_raw(h) });
        })
    })
}

/// # Safety
/// `p` must be null or a handle from [`qpde_problem_from_json`], freed once.
#[no_mangle]
pub unsafe extern "C" fn qpde_problem_free(p: *mut QpdeProblem) {
    if !p.is_null() {
        // SAFETY: handle allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Qubits of the simulated state, including wave block labels.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_problem_num_qubits(
    p: *const QpdeProblem,
    out: *mut usize,
) -> QpdeStatus {
    guard(|| {
        let p = unsafe { borrow(p, "problem") }?;
        unsafe { write_out(out, p.0.num_qubits(), "out") }
    })
}

/// Trotter steps `T/τ`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_problem_steps(p: *const QpdeProblem, out: *mut usize) -> QpdeStatus {
    guard(|| {
        let p = unsafe { borrow(p, "problem") }?;
        let r = lift(p.0.steps())?;
        unsafe { write_out(out, r, "out") }
    })
}

/// Operator-norm bound on the error of one Trotter step.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_problem_step_bound(
    p: *const QpdeProblem,
    out: *mut f64,
) -> QpdeStatus {
    guard(|| {
        let p = unsafe { borrow(p, "problem") }?;
        let b = lift(step_bound(&p.0))?;
        unsafe { write_out(out, b, "out") }
    })
}

/// One Trotter step of the problem's configured order.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_step_circuit(
    p: *const QpdeProblem,
    out: *mut *mut QpdeCircuit,
) -> QpdeStatus {
    guard(|| {
        let p = unsafe { borrow(p, "problem") }?;
        let c = lift(step_circuit(&p.0))?;
        let h = Box::into_raw(Box::new(QpdeCircuit(c)));
        unsafe { write_out(out, h, "out") }.inspect_err(|_| drop(unsafe { Box::from_raw(h) }))
    })
}

/// # Safety
/// `c` must be null or a circuit handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn qpde_circuit_free(c: *mut QpdeCircuit) {
    if !c.is_null() {
        // SAFETY: handle allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(c) });
    }
}

/// Gate count of the circuit as built (multi-controlled rotations count once).
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_circuit_num_gates(
    c: *const QpdeCircuit,
    out: *mut usize,
) -> QpdeStatus {
    guard(|| {
        let c = unsafe { borrow(c, "circuit") }?;
        unsafe { write_out(out, c.0.len(), "out") }
    })
}

/// CNOT count. `decomposed = 0` uses the analytic per-gate costs,
/// otherwise the gates the lowering actually emits.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_circuit_count_cnots(
    c: *const QpdeCircuit,
    decomposed: i32,
    out: *mut usize,
) -> QpdeStatus {
    guard(|| {
        let c = unsafe { borrow(c, "circuit") }?;
        let mode = if decomposed == 0 {
            CountMode::Analytic
        } else {
            CountMode::Decomposed
        };
        unsafe { write_out(out, count_cnots(&c.0, mode), "out") }
    })
}

/// Lowered circuit as OpenQASM 3. Free the result with [`qpde_string_free`].
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_circuit_to_qasm(
    c: *const QpdeCircuit,
    out: *mut *mut c_char,
) -> QpdeStatus {
    guard(|| {
        let c = unsafe { borrow(c, "circuit") }?;
        let text = lift(export_qasm(&c.0.lower()))?;
        let s = CString::new(text).map_err(|e| (QpdeStatus::Invariant, e.to_string()))?;
        let raw = s.into_raw();
        unsafe { write_out(out, raw, "out") }
            .inspect_err(|_| drop(unsafe { CString::from_raw(raw) }))
    })
}

/// The problem's initial state.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_state_initial(
    p: *const QpdeProblem,
    out: *mut *mut QpdeState,
) -> QpdeStatus {
    guard(|| {
        let p = unsafe { borrow(p, "problem") }?;
        let s = lift(p.0.initial_state().and_then(StateVector::new))?;
        let h = Box::into_raw(Box::new(QpdeState(s)));
        unsafe { write_out(out, h, "out") }.inspect_err(|_| drop(unsafe { Box::from_raw(h) }))
    })
}

/// # Safety
/// `s` must be null or a state handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn qpde_state_free(s: *mut QpdeState) {
    if !s.is_null() {
        // SAFETY: handle allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Applies `c` to `s` `steps` times in place.
///
/// # Safety
/// Pointers must be valid or null; `s` must not be aliased during the call.
#[no_mangle]
pub unsafe extern "C" fn qpde_state_evolve(
    s: *mut QpdeState,
    c: *const QpdeCircuit,
    steps: usize,
) -> QpdeStatus {
    guard(|| {
        let c = unsafe { borrow(c, "circuit") }?;
        // SAFETY: exclusive access per the contract.
        let s = unsafe { s.as_mut() }.ok_or_else(|| null("state"))?;
        if steps == 0 {
            return Ok(());
        }
        let traj = lift(evolve(&c.0, &s.0, steps, 0))?;
        s.0 = traj.final_state().clone();
        Ok(())
    })
}

/// Number of amplitudes, `2^qubits`.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_state_len(s: *const QpdeState, out: *mut usize) -> QpdeStatus {
    guard(|| {
        let s = unsafe { borrow(s, "state") }?;
        unsafe { write_out(out, s.0.amplitudes().len(), "out") }
    })
}

/// Copies the amplitudes into `re` and `im`, each holding `len` doubles.
///
/// # Safety
/// `re` and `im` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn qpde_state_amplitudes(
    s: *const QpdeState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> QpdeStatus {
    guard(|| {
        let s = unsafe { borrow(s, "state") }?;
        let amps = s.0.amplitudes();
        if len != amps.len() {
            return Err((
                QpdeStatus::InvalidArgument,
                format!("buffer holds {len} values, state has {}", amps.len()),
            ));
        }
        if re.is_null() || im.is_null() {
            return Err(null("buffer"));
        }
        // SAFETY: both buffers hold `len` doubles per the contract.
        let (re, im) = unsafe {
            (
                std::slice::from_raw_parts_mut(re, len),
                std::slice::from_raw_parts_mut(im, len),
            )
        };
        for (k, z) in amps.iter().enumerate() {
            re[k] = z.re;
            im[k] = z.im;
        }
        Ok(())
    })
}

/// Weight of the `∂u/∂t` block of a wave state.
///
/// # Safety
/// Pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn qpde_state_kinetic_energy(
    s: *const QpdeState,
    p: *const QpdeProblem,
    out: *mut f64,
) -> QpdeStatus {
    guard(|| {
        let s = unsafe { borrow(s, "state") }?;
        let p = unsafe { borrow(p, "problem") }?;
        if p.0.block_qubits() == 0 {
            return Err((
                QpdeStatus::Unsupported,
                "kinetic energy needs a wave problem".into(),
            ));
        }
        let o = Observable::kinetic_energy(p.0.block_qubits(), p.0.field_qubits());
        let e = lift(expectation(&s.0, &o))?;
        unsafe { write_out(out, e, "out") }
    })
}

/// Runs a full experiment config, writing artifacts to `out_dir`.
/// `violations` receives the number of bound violations found.
///
/// # Safety
/// Strings must be NUL-terminated; `violations` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qpde_run_config(
    config_json: *const c_char,
    out_dir: *const c_char,
    violations: *mut usize,
) -> QpdeStatus {
    guard(|| {
        let text = unsafe { read_str(config_json, "config_json") }?;
        let dir = unsafe { read_str(out_dir, "out_dir") }?;
        let cfg = validate_config(text).map_err(|errs| (QpdeStatus::Config, errs.join("; ")))?;
        let summary = lift(run_experiment(&cfg, Path::new(dir)))?;
        unsafe { write_out(violations, summary.violations.len(), "violations") }
    })
}
