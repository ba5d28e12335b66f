//! C ABI for the shepherding simulator.
//!
//! Objects cross the boundary as opaque heap handles created by a
//! `*_new`/constructor function and released with the matching `*_free`.
//! Every fallible call returns a [`ShepherdStatus`]; on failure a message is
//! available from [`shepherd_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use shepherd::evaluation::evaluate_trials;
use shepherd::expr::parse_tree;
use shepherd::settings::Settings;
use shepherd::sim::run_episode;
use shepherd::{Controller, TerminalSet};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShepherdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidConfig = 4,
    InvalidArgument = 5,
    Panic = 6,
}

/// Terminal set an evolved program reads.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShepherdTerminals {
    /// dog-x dog-y sheep-x sheep-y
    Single4 = 0,
    /// dog, two other dogs, nearest sheep, flock mean, steering point (x, y each)
    Multi12 = 1,
}

impl From<ShepherdTerminals> for TerminalSet {
    fn from(t: ShepherdTerminals) -> Self {
        match t {
            ShepherdTerminals::Single4 => TerminalSet::SingleDog4,
            ShepherdTerminals::Multi12 => TerminalSet::MultiDog12,
        }
    }
}

/// Simulation and GP settings, edited with [`shepherd_config_set`].
pub struct ShepherdConfig {
    settings: Settings,
}

/// An evolved program or one of the built-in baselines.
pub struct ShepherdController {
    inner: Controller,
}

/// Aggregate of a multi-trial evaluation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ShepherdTrialSummary {
    pub n_trials: u64,
    pub mean: f64,
    pub std_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(ShepherdStatus, String);

fn fail(status: ShepherdStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Runs `body`, converting errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ShepherdStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ShepherdStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ShepherdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(ShepherdStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ShepherdStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(ShepherdStatus::NullArgument, format!("{name} is null")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(ShepherdStatus::NullArgument, format!("{name} is null")))
}

/// Validated copy of the settings, checked against the controller.
fn prepared(cfg: &ShepherdConfig, ctrl: &ShepherdController) -> Result<Settings, Failure> {
    let s = cfg
        .settings
        .clone()
        .finish()
        .map_err(|e| fail(ShepherdStatus::InvalidConfig, e.to_string()))?;
    ctrl.inner
        .check(&s.sim, s.gp.d_max)
        .map_err(|e| fail(ShepherdStatus::InvalidConfig, e.to_string()))?;
    Ok(s)
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn shepherd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn shepherd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New configuration holding the default parameters.
#[no_mangle]
pub extern "C" fn shepherd_config_new() -> *mut ShepherdConfig {
    Box::into_raw(Box::new(ShepherdConfig {
        settings: Settings::default(),
    }))
}

/// # Safety
/// `cfg` must come from [`shepherd_config_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn shepherd_config_free(cfg: *mut ShepherdConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Sets one field by its configuration-file name, e.g. `"n_sheep"`, `"5"`.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn shepherd_config_set(
    cfg: *mut ShepherdConfig,
    key: *const c_char,
    value: *const c_char,
) -> ShepherdStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        cfg.settings
            .set(key, value)
            .map_err(|e| fail(ShepherdStatus::InvalidConfig, e.to_string()))
    })
}

/// Checks the configuration as a whole (ranges, pen smaller than field, ...).
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn shepherd_config_validate(cfg: *const ShepherdConfig) -> ShepherdStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "cfg")?;
        cfg.settings
            .clone()
            .finish()
            .map(|_| ())
            .map_err(|e| fail(ShepherdStatus::InvalidConfig, e.to_string()))
    })
}

fn boxed(out: &mut *mut ShepherdController, inner: Controller) {
    *out = Box::into_raw(Box::new(ShepherdController { inner }));
}

/// The handcrafted baseline dog.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shepherd_controller_simple(out: *mut *mut ShepherdController) -> ShepherdStatus {
    guard(|| {
        boxed(out_arg(out, "out")?, Controller::SimpleDog);
        Ok(())
    })
}

/// The random-force baseline dog.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shepherd_controller_random(out: *mut *mut ShepherdController) -> ShepherdStatus {
    guard(|| {
        boxed(out_arg(out, "out")?, Controller::RandDog);
        Ok(())
    })
}

/// Parses an s-expression program such as `"(pair (- sheep-x dog-x) 0)"`.
///
/// # Safety
/// `text` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shepherd_controller_parse(
    text: *const c_char,
    terminals: ShepherdTerminals,
    d_max: u32,
    out: *mut *mut ShepherdController,
) -> ShepherdStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let terminals = TerminalSet::from(terminals);
        let tree = parse_tree(text, terminals.labels(), d_max as usize)
            .map_err(|e| fail(ShepherdStatus::ParseError, e.to_string()))?;
        boxed(out, Controller::Evolved { tree, terminals });
        Ok(())
    })
}

/// # Safety
/// `ctrl` must come from a `shepherd_controller_*` constructor and not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn shepherd_controller_free(ctrl: *mut ShepherdController) {
    if !ctrl.is_null() {
        drop(Box::from_raw(ctrl));
    }
}

/// Evaluates an evolved program on a terminal vector, writing the force.
/// Fails with `INVALID_ARGUMENT` for baselines or a wrong-length vector.
///
/// # Safety
/// `params` must point to `len` doubles; `out_x`/`out_y` must be writable.
#[no_mangle]
pub unsafe extern "C" fn shepherd_controller_eval(
    ctrl: *const ShepherdController,
    params: *const f64,
    len: usize,
    out_x: *mut f64,
    out_y: *mut f64,
) -> ShepherdStatus {
    guard(|| {
        let ctrl = ref_arg(ctrl, "ctrl")?;
        let Controller::Evolved { tree, terminals } = &ctrl.inner else {
            return Err(fail(
                ShepherdStatus::InvalidArgument,
                "baseline controllers have no program",
            ));
        };
        if len != terminals.arity() {
            return Err(fail(
                ShepherdStatus::InvalidArgument,
                format!("expected {} parameters, got {len}", terminals.arity()),
            ));
        }
        if params.is_null() {
            return Err(fail(ShepherdStatus::NullArgument, "params is null"));
        }
        let params = std::slice::from_raw_parts(params, len);
        let (x, y) = tree.eval(params);
        *out_arg(out_x, "out_x")? = x;
        *out_arg(out_y, "out_y")? = y;
        Ok(())
    })
}

/// Runs one seeded episode and reports the captured sheep.
///
/// # Safety
/// Handles must be live; output pointers writable (either may be null to skip).
#[no_mangle]
pub unsafe extern "C" fn shepherd_run_episode(
    ctrl: *const ShepherdController,
    cfg: *const ShepherdConfig,
    seed: u64,
    out_captured: *mut u64,
    out_fraction: *mut f64,
) -> ShepherdStatus {
    guard(|| {
        let ctrl = ref_arg(ctrl, "ctrl")?;
        let s = prepared(ref_arg(cfg, "cfg")?, ctrl)?;
        let r = run_episode(&ctrl.inner, &s.sim, &s.sim.geometry(), seed, false);
        if let Some(c) = out_captured.as_mut() {
            *c = r.captured as u64;
        }
        if let Some(f) = out_fraction.as_mut() {
            *f = r.captured_fraction();
        }
        Ok(())
    })
}

/// Runs `n_trials` seeded episodes (trial seeds derived from `seed`).
///
/// # Safety
/// Handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn shepherd_evaluate_trials(
    ctrl: *const ShepherdController,
    cfg: *const ShepherdConfig,
    n_trials: u64,
    seed: u64,
    out: *mut ShepherdTrialSummary,
) -> ShepherdStatus {
    guard(|| {
        let ctrl = ref_arg(ctrl, "ctrl")?;
        let s = prepared(ref_arg(cfg, "cfg")?, ctrl)?;
        let out = out_arg(out, "out")?;
        if n_trials == 0 {
            return Err(fail(ShepherdStatus::InvalidArgument, "n_trials must be ≥ 1"));
        }
        let r = evaluate_trials(&ctrl.inner, &s.sim, n_trials as usize, seed);
        *out = ShepherdTrialSummary {
            n_trials: r.n_trials as u64,
            mean: r.mean,
            std_error: r.std_error,
        };
        Ok(())
    })
}
