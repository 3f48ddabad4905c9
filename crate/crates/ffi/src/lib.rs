//! C interface to `waveguard`.
//!
//! Every entry point returns a [`WgStatus`]; on failure the message is
//! available from [`wg_last_error_message`] on the same thread. Handles are
//! opaque and owned by the caller until passed to the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use waveguard::certificates::Certificate;
use waveguard::config::{parse_config, ScenarioConfig};
use waveguard::runner::{certify, cmd_verify};
use waveguard::solver::{make_initial, simulate, Trajectory};

/// Status codes. Values 0 to 4 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgStatus {
    Ok = 0,
    BoundViolation = 1,
    HypothesisViolated = 2,
    SolverFailure = 3,
    ConfigError = 4,
    NullPointer = 5,
    InvalidArgument = 6,
    Panic = 7,
}

/// Parsed scenario configuration.
pub struct WgScenario {
    config: ScenarioConfig,
}

/// Result of a simulation: times, energies and the final state.
pub struct WgTrajectory {
    trajectory: Trajectory,
}

/// Decay certificate for a scenario.
pub struct WgCertificate {
    certificate: Certificate,
}

enum Failure {
    Core(waveguard::Error),
    Null(&'static str),
    Invalid(String),
}

impl From<waveguard::Error> for Failure {
    fn from(e: waveguard::Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn status(&self) -> WgStatus {
        match self {
            Failure::Core(e) => match e.exit_code() {
                1 => WgStatus::BoundViolation,
                2 => WgStatus::HypothesisViolated,
                3 => WgStatus::SolverFailure,
                _ => WgStatus::ConfigError,
            },
            Failure::Null(_) => WgStatus::NullPointer,
            Failure::Invalid(_) => WgStatus::InvalidArgument,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Null(what) => format!("{what} is null"),
            Failure::Invalid(msg) => msg.clone(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => WgStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(failure.message());
            failure.status()
        }
        Err(_) => {
            set_last_error("internal panic".into());
            WgStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn free_box<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a scenario config (JSON text).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wg_scenario_from_json(json: *const c_char, out: *mut *mut WgScenario) -> WgStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let config = parse_config(c_str(json, "json")?)?;
        *out = Box::into_raw(Box::new(WgScenario { config }));
        Ok(())
    })
}

/// # Safety
/// `scenario` must come from [`wg_scenario_from_json`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn wg_scenario_free(scenario: *mut WgScenario) {
    free_box(scenario)
}

/// Number of grid nodes (`N + 1`), the length of state buffers.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_scenario_n_nodes(scenario: *const WgScenario, out: *mut usize) -> WgStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        *out_ref(out, "out")? = s.config.grid()?.n_nodes();
        Ok(())
    })
}

/// Runs the scenario to `t_final`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_simulate(scenario: *const WgScenario, out: *mut *mut WgTrajectory) -> WgStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let c = &deref(scenario, "scenario")?.config;
        let grid = c.grid()?;
        let init = make_initial(&c.init, &grid)?;
        let trajectory = simulate(&init.state, &c.g, &c.forcing, &grid, &c.solver_config()?)?;
        *out = Box::into_raw(Box::new(WgTrajectory { trajectory }));
        Ok(())
    })
}

/// # Safety
/// `trajectory` must come from [`wg_simulate`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn wg_trajectory_free(trajectory: *mut WgTrajectory) {
    free_box(trajectory)
}

/// Number of recorded time levels.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_trajectory_len(trajectory: *const WgTrajectory, out: *mut usize) -> WgStatus {
    guard(|| {
        *out_ref(out, "out")? = deref(trajectory, "trajectory")?.trajectory.times.len();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_trajectory_dt(trajectory: *const WgTrajectory, out: *mut f64) -> WgStatus {
    guard(|| {
        *out_ref(out, "out")? = deref(trajectory, "trajectory")?.trajectory.dt;
        Ok(())
    })
}

/// Copies times and total energies into caller buffers of exactly `len`
/// entries, `len` being [`wg_trajectory_len`].
///
/// # Safety
/// `times` and `energies` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn wg_trajectory_energies(
    trajectory: *const WgTrajectory,
    times: *mut f64,
    energies: *mut f64,
    len: usize,
) -> WgStatus {
    guard(|| {
        let t = &deref(trajectory, "trajectory")?.trajectory;
        if len != t.times.len() {
            return Err(Failure::Invalid(format!("buffer length {len}, trajectory has {}", t.times.len())));
        }
        if times.is_null() || energies.is_null() {
            return Err(Failure::Null("buffer"));
        }
        let times = std::slice::from_raw_parts_mut(times, len);
        let energies = std::slice::from_raw_parts_mut(energies, len);
        times.copy_from_slice(&t.times);
        for (dst, e) in energies.iter_mut().zip(&t.energies) {
            *dst = e.total;
        }
        Ok(())
    })
}

/// Copies the final displacement and velocity into buffers of `n_nodes`.
///
/// # Safety
/// `u` and `v` must each hold `n_nodes` doubles.
#[no_mangle]
pub unsafe extern "C" fn wg_trajectory_final_state(
    trajectory: *const WgTrajectory,
    u: *mut f64,
    v: *mut f64,
    n_nodes: usize,
) -> WgStatus {
    guard(|| {
        let state = deref(trajectory, "trajectory")?.trajectory.final_state();
        if n_nodes != state.u.len() {
            return Err(Failure::Invalid(format!("buffer length {n_nodes}, grid has {} nodes", state.u.len())));
        }
        if u.is_null() || v.is_null() {
            return Err(Failure::Null("buffer"));
        }
        std::slice::from_raw_parts_mut(u, n_nodes).copy_from_slice(&state.u);
        std::slice::from_raw_parts_mut(v, n_nodes).copy_from_slice(&state.v);
        Ok(())
    })
}

/// Builds the certificate selected by the config. Fails with
/// `WG_STATUS_HYPOTHESIS_VIOLATED` when the laws are outside its hypotheses.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_certify(scenario: *const WgScenario, out: *mut *mut WgCertificate) -> WgStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let certificate = certify(&deref(scenario, "scenario")?.config)?
            .ok_or_else(|| Failure::Invalid("certificate.mode is none".into()))?;
        *out = Box::into_raw(Box::new(WgCertificate { certificate }));
        Ok(())
    })
}

/// # Safety
/// `certificate` must come from [`wg_certify`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn wg_certificate_free(certificate: *mut WgCertificate) {
    free_box(certificate)
}

/// Decay envelope `{E − E_S}⁺ ≤ M·exp(−μt)·{E(0) − E_S}⁺`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_certificate_envelope(
    certificate: *const WgCertificate,
    mu: *mut f64,
    prefactor: *mut f64,
    e_s: *mut f64,
) -> WgStatus {
    guard(|| {
        let env = deref(certificate, "certificate")?.certificate.envelope();
        *out_ref(mu, "mu")? = env.mu;
        *out_ref(prefactor, "prefactor")? = env.prefactor;
        *out_ref(e_s, "e_s")? = env.e_s;
        Ok(())
    })
}

/// Full certificate as JSON. Release the string with [`wg_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_certificate_to_json(certificate: *const WgCertificate, out: *mut *mut c_char) -> WgStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let text = serde_json::to_string_pretty(&deref(certificate, "certificate")?.certificate)
            .map_err(|e| Failure::Core(e.into()))?;
        *out = CString::new(text).map_err(|e| Failure::Invalid(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn wg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Runs the `verify` command, writing artifacts under `out_dir`.
/// `exit_code` receives the command-line exit code; the return value is
/// `WG_STATUS_OK` whenever the command ran to completion.
///
/// # Safety
/// Pointers must be valid; `out_dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn wg_verify(scenario: *const WgScenario, out_dir: *const c_char, exit_code: *mut i32) -> WgStatus {
    guard(|| {
        let code = out_ref(exit_code, "exit_code")?;
        let config = &deref(scenario, "scenario")?.config;
        let dir = c_str(out_dir, "out_dir")?;
        *code = cmd_verify(config, Path::new(dir), None)?.exit_code;
        Ok(())
    })
}
