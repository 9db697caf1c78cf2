//! C interface to qdlab.
//!
//! Every function returns a [`QdStatus`]; results go through out-pointers.
//! On failure the message is kept per thread and can be read with
//! [`qdlab_last_error`]. Handles are opaque and must be released with their
//! `_free` function. Strings returned by the library are released with
//! [`qdlab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qdlab::error::QdError;
use qdlab::groups::{group_by_name, FiniteGroup};
use qdlab::harness::{
    bloch_report, hqd_spectrum, run_check, run_suite, CheckId, ExperimentConfig, GadgetConfig, GadgetInstance,
    Tolerances,
};
use qdlab::lattice::LatticeKind;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QdStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericFailure = 2,
    DegenerateCut = 3,
    PreconditionViolation = 4,
    ResourceLimit = 5,
    IoError = 6,
    ParseError = 7,
    NullPointer = 8,
    Panic = 9,
}

impl From<&QdError> for QdStatus {
    fn from(e: &QdError) -> Self {
        match e {
            QdError::InvalidArgument(_) => QdStatus::InvalidArgument,
            QdError::NumericFailure(_) => QdStatus::NumericFailure,
            QdError::DegenerateCut { .. } => QdStatus::DegenerateCut,
            QdError::PreconditionViolation(_) => QdStatus::PreconditionViolation,
            QdError::ResourceLimit { .. } => QdStatus::ResourceLimit,
            QdError::Io { .. } => QdStatus::IoError,
            QdError::Parse(_) => QdStatus::ParseError,
        }
    }
}

/// Opaque finite group.
pub struct QdGroup(FiniteGroup);

/// Opaque gadget with the lattice data its checks need.
pub struct QdGadget(GadgetInstance);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Qd(QdError),
    Null(&'static str),
}

impl From<QdError> for Failure {
    fn from(e: QdError) -> Self {
        Failure::Qd(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> QdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QdStatus::Ok,
        Ok(Err(Failure::Qd(e))) => {
            set_error(e.to_string());
            QdStatus::from(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QdStatus::NullPointer
        }
        Err(_) => {
            set_error("internal panic".into());
            QdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| QdError::invalid(format!("{what} is not UTF-8")).into())
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, Failure> {
    serde_json::to_string(v).map_err(|e| QdError::Parse(e.to_string()).into())
}

/// Message of the last failed call on this thread. Valid until the next
/// failing call; never null.
#[no_mangle]
pub extern "C" fn qdlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qdlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Looks up a group by name: Z<n>, S3 or D4.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_group_new(name: *const c_char, out: *mut *mut QdGroup) -> QdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let g = group_by_name(str_arg(name, "name")?)?;
        *out = Box::into_raw(Box::new(QdGroup(g)));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from [`qdlab_group_new`], not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qdlab_group_free(g: *mut QdGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// # Safety
/// `g` must be a live group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_group_order(g: *const QdGroup, out: *mut usize) -> QdStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(g, "group")?.0.order();
        Ok(())
    })
}

fn check_element(g: &FiniteGroup, a: usize) -> Result<(), Failure> {
    if a >= g.order() {
        return Err(QdError::invalid(format!("element {a} outside group of order {}", g.order())).into());
    }
    Ok(())
}

/// # Safety
/// `g` must be a live group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_group_mul(g: *const QdGroup, a: usize, b: usize, out: *mut usize) -> QdStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        check_element(g, a)?;
        check_element(g, b)?;
        *out_arg(out, "out")? = g.mul(a, b);
        Ok(())
    })
}

/// # Safety
/// `g` must be a live group handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_group_inv(g: *const QdGroup, a: usize, out: *mut usize) -> QdStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.0;
        check_element(g, a)?;
        *out_arg(out, "out")? = g.inv(a);
        Ok(())
    })
}

/// Builds a gadget from a JSON config with keys `group`, `lattice`, `size`,
/// `mode`, `site_index`, `lambda_grid`, `order`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_gadget_new(config_json: *const c_char, out: *mut *mut QdGadget) -> QdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = GadgetConfig::from_json(str_arg(config_json, "config_json")?)?;
        let inst = GadgetInstance::from_config(&cfg)?;
        *out = Box::into_raw(Box::new(QdGadget(inst)));
        Ok(())
    })
}

/// # Safety
/// `g` must be null or a handle from [`qdlab_gadget_new`], not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qdlab_gadget_free(g: *mut QdGadget) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Hilbert space dimension, clock dimension and ground-space rank.
///
/// # Safety
/// `g` must be a live gadget handle; every out-pointer must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_gadget_dims(
    g: *const QdGadget,
    dim: *mut usize,
    clock_dim: *mut usize,
    ground_rank: *mut usize,
) -> QdStatus {
    guard(|| {
        let gd = &ref_arg(g, "gadget")?.0.gadget;
        *out_arg(dim, "dim")? = gd.layout().total_dim();
        *out_arg(clock_dim, "clock_dim")? = gd.clock_dim();
        *out_arg(ground_rank, "ground_rank")? = gd.ground_rank();
        Ok(())
    })
}

/// Bloch series report as JSON; `*passed` is 1 when every check passed.
///
/// # Safety
/// `g` must be a live gadget handle; `lambdas` must point to `n_lambdas`
/// doubles; `json` and `passed` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_gadget_bloch(
    g: *const QdGadget,
    orders: usize,
    lambdas: *const f64,
    n_lambdas: usize,
    json: *mut *mut c_char,
    passed: *mut i32,
) -> QdStatus {
    guard(|| {
        let inst = &ref_arg(g, "gadget")?.0;
        if lambdas.is_null() {
            return Err(Failure::Null("lambdas"));
        }
        let grid = std::slice::from_raw_parts(lambdas, n_lambdas);
        qdlab::harness::validate_lambda_grid(grid)?;
        let json = out_arg(json, "json")?;
        let passed = out_arg(passed, "passed")?;
        let report = bloch_report(inst, orders, grid, &Tolerances::default())?;
        *passed = report.pass as i32;
        *json = into_c_string(to_json(&report)?);
        Ok(())
    })
}

/// Lowest energies of the quantum double Hamiltonian. Writes at most
/// `capacity` energies into `energies` and the count into `*written`.
///
/// # Safety
/// String arguments must be NUL-terminated; `energies` must hold `capacity`
/// doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_hqd_energies(
    group: *const c_char,
    lattice: *const c_char,
    size: *const c_char,
    energies: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> QdStatus {
    guard(|| {
        let kind: LatticeKind = str_arg(lattice, "lattice")?.parse()?;
        let size = str_arg(size, "size")?;
        if energies.is_null() {
            return Err(Failure::Null("energies"));
        }
        let written = out_arg(written, "written")?;
        let report = hqd_spectrum(str_arg(group, "group")?, kind, Some(size), capacity, 1e-8)?;
        let out = std::slice::from_raw_parts_mut(energies, capacity);
        let mut k = 0;
        for level in &report.levels {
            for _ in 0..level.degeneracy {
                if k < capacity {
                    out[k] = level.energy;
                    k += 1;
                }
            }
        }
        *written = k;
        Ok(())
    })
}

/// Runs one check with default scope. `*passed` is 1 on pass; `json`
/// receives the check record.
///
/// # Safety
/// `check` must be NUL-terminated; `passed` and `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_run_check(check: *const c_char, passed: *mut i32, json: *mut *mut c_char) -> QdStatus {
    guard(|| {
        let id: CheckId = str_arg(check, "check")?.parse()?;
        let passed = out_arg(passed, "passed")?;
        let json = out_arg(json, "json")?;
        let record = run_check(id, &ExperimentConfig::single(id))?;
        *passed = record.pass as i32;
        *json = into_c_string(to_json(&record)?);
        Ok(())
    })
}

/// Runs a suite described by a JSON config; see the CLI `suite` command.
///
/// # Safety
/// `config_json` must be NUL-terminated; `passed` and `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qdlab_run_suite(
    config_json: *const c_char,
    passed: *mut i32,
    json: *mut *mut c_char,
) -> QdStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json(str_arg(config_json, "config_json")?)?;
        let passed = out_arg(passed, "passed")?;
        let json = out_arg(json, "json")?;
        let report = run_suite(&cfg)?;
        *passed = report.all_pass() as i32;
        *json = into_c_string(report.to_json());
        Ok(())
    })
}
