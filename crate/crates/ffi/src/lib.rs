//! C ABI over `udn-core`.
//!
//! Every fallible call returns a [`UdnStatus`] and writes its result
//! through an out-pointer. The message of the last failure on the calling
//! thread is available from [`udn_last_error`]. Models are opaque handles
//! released with [`udn_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use udn_core::config::validate_config;
use udn_core::load::{prob_active, LoadModel};
use udn_core::power::{min_tx_power_with, PowerSearchConfig};
use udn_core::propagation::{FadingModel, LosProbabilityModel, PathLossParams};
use udn_core::sinr::{CoverageModel, Scenario, Tolerances};
use udn_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UdnStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Quadrature = 3,
    NoCrossing = 4,
    SearchFailure = 5,
    Underdetermined = 6,
    DegenerateBoundary = 7,
    Invalid = 8,
    Config = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UdnLosKind {
    /// `min(d1/d, 1)(1 − e^{−d/d0}) + e^{−d/d0}`; params: d0, d1 (km).
    ThreeGpp = 0,
    /// `e^{−(d/L)²}`; param: L (km).
    ExpSquare = 1,
    /// `e^{−d/L}`; param: L (km).
    Exp = 2,
    /// Distance independent; param: probability.
    Constant = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UdnLoadKind {
    Full = 0,
    /// Uses `user_density`.
    Partial = 1,
    /// Uses `reuse_factor`.
    Reuse = 2,
}

/// Plain-data scenario description. Densities in 1/km², path loss at 1 km
/// in dB.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct UdnScenario {
    pub density: f64,
    pub path_loss_los_db: f64,
    pub exponent_los: f64,
    pub path_loss_nlos_db: f64,
    pub exponent_nlos: f64,
    pub los_kind: UdnLosKind,
    pub los_param_a: f64,
    pub los_param_b: f64,
    pub fading_mu: f64,
    pub load_kind: UdnLoadKind,
    pub user_density: f64,
    pub reuse_factor: u32,
    /// Normalized noise σ²; 0 for interference only.
    pub noise: f64,
}

/// Opaque coverage model.
pub struct UdnModel {
    inner: CoverageModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> UdnStatus {
    match e {
        Error::Domain { .. } => UdnStatus::Domain,
        Error::Quadrature(_) => UdnStatus::Quadrature,
        Error::NoCrossing { .. } => UdnStatus::NoCrossing,
        Error::SearchFailure { .. } => UdnStatus::SearchFailure,
        Error::Underdetermined { .. } => UdnStatus::Underdetermined,
        Error::DegenerateBoundary { .. } => UdnStatus::DegenerateBoundary,
        Error::Invalid(_) => UdnStatus::Invalid,
    }
}

/// Runs `f`, mapping errors and panics to a status.
fn guard<F: FnOnce() -> Result<(), (UdnStatus, String)>>(f: F) -> UdnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UdnStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            UdnStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (UdnStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (UdnStatus, String) {
    (UdnStatus::NullPointer, format!("{what} is NULL"))
}

fn to_scenario(d: &UdnScenario) -> Result<Scenario, (UdnStatus, String)> {
    let propagation = PathLossParams::from_db(d.path_loss_los_db, d.exponent_los, d.path_loss_nlos_db, d.exponent_nlos)
        .map_err(core_err)?;
    let los = match d.los_kind {
        UdnLosKind::ThreeGpp => LosProbabilityModel::ThreeGpp {
            d0: d.los_param_a,
            d1: d.los_param_b,
        },
        UdnLosKind::ExpSquare => LosProbabilityModel::ExpSquare { scale: d.los_param_a },
        UdnLosKind::Exp => LosProbabilityModel::Exp { scale: d.los_param_a },
        UdnLosKind::Constant => LosProbabilityModel::Constant { p: d.los_param_a },
    };
    let load = match d.load_kind {
        UdnLoadKind::Full => LoadModel::FullyLoaded,
        UdnLoadKind::Partial => LoadModel::PartiallyLoaded {
            user_density: d.user_density,
        },
        UdnLoadKind::Reuse => LoadModel::FrequencyReuse { reuse: d.reuse_factor },
    };
    let fading = FadingModel::new(d.fading_mu).map_err(core_err)?;
    let s = Scenario::new(d.density, propagation, los)
        .with_load(load)
        .with_fading(fading)
        .with_noise(d.noise);
    s.validate().map_err(core_err)?;
    Ok(s)
}

/// Urban small-cell defaults at `density` (ExpSquare LOS, L = 82.5 m,
/// fully loaded, Rayleigh fading, no noise).
#[no_mangle]
pub extern "C" fn udn_scenario_default(density: f64) -> UdnScenario {
    UdnScenario {
        density,
        path_loss_los_db: 103.8,
        exponent_los: 2.09,
        path_loss_nlos_db: 145.4,
        exponent_nlos: 3.75,
        los_kind: UdnLosKind::ExpSquare,
        los_param_a: 0.0825,
        los_param_b: 0.0,
        fading_mu: 1.0,
        load_kind: UdnLoadKind::Full,
        user_density: 0.0,
        reuse_factor: 1,
        noise: 0.0,
    }
}

/// Builds a model. `sweep_accuracy` selects the faster tolerances.
///
/// # Safety
/// `scenario` must point to a valid `UdnScenario`; `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn udn_model_new(
    scenario: *const UdnScenario,
    sweep_accuracy: bool,
    out: *mut *mut UdnModel,
) -> UdnStatus {
    guard(|| {
        let d = unsafe { scenario.as_ref() }.ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let tol = if sweep_accuracy {
            Tolerances::sweep()
        } else {
            Tolerances::default()
        };
        let inner = CoverageModel::with_tolerances(to_scenario(d)?, tol).map_err(core_err)?;
        unsafe { *out = Box::into_raw(Box::new(UdnModel { inner })) };
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`udn_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn udn_model_free(model: *mut UdnModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

unsafe fn eval(
    model: *const UdnModel,
    out: *mut f64,
    f: impl FnOnce(&CoverageModel) -> Result<f64, Error>,
) -> UdnStatus {
    guard(|| {
        let m = unsafe { model.as_ref() }.ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let v = f(&m.inner).map_err(core_err)?;
        unsafe { *out = v };
        Ok(())
    })
}

/// `P[SINR > y]`, `y` linear.
///
/// # Safety
/// `model` from [`udn_model_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn udn_model_sinr_ccdf(model: *const UdnModel, y: f64, out: *mut f64) -> UdnStatus {
    unsafe { eval(model, out, |m| m.sinr_ccdf(y)) }
}

/// `P[SINR ≤ y]`, `y` linear.
///
/// # Safety
/// `model` from [`udn_model_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn udn_model_outage(model: *const UdnModel, y: f64, out: *mut f64) -> UdnStatus {
    unsafe { eval(model, out, |m| m.outage(y)) }
}

/// Average spectral efficiency, bit/s/Hz.
///
/// # Safety
/// `model` from [`udn_model_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn udn_model_spectral_efficiency(model: *const UdnModel, out: *mut f64) -> UdnStatus {
    unsafe { eval(model, out, |m| m.avg_spectral_efficiency().map(|e| e.value)) }
}

/// Area spectral efficiency, bit/s/Hz/km².
///
/// # Safety
/// `model` from [`udn_model_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn udn_model_ase(model: *const UdnModel, out: *mut f64) -> UdnStatus {
    unsafe { eval(model, out, |m| m.ase()) }
}

/// Density of the nearest LOS-equivalent distance at `r` km.
///
/// # Safety
/// `model` from [`udn_model_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn udn_model_distance_pdf(model: *const UdnModel, r: f64, out: *mut f64) -> UdnStatus {
    unsafe { eval(model, out, |m| Ok(m.distance_law().pdf(r))) }
}

/// `P[nearest LOS-equivalent distance > r]`.
///
/// # Safety
/// `model` from [`udn_model_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn udn_model_distance_tail(model: *const UdnModel, r: f64, out: *mut f64) -> UdnStatus {
    unsafe { eval(model, out, |m| Ok(m.distance_law().tail_probability(r))) }
}

/// Minimum interference-limited transmit power in dBm for linear SINR
/// threshold `y` and outage tolerance `outage_tolerance`, with 10 MHz
/// bandwidth, 9 dB noise figure and 5/1/0.2/0.05 dB steps.
///
/// # Safety
/// `model` from [`udn_model_new`]; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn udn_model_min_tx_power_dbm(
    model: *const UdnModel,
    y: f64,
    outage_tolerance: f64,
    out: *mut f64,
) -> UdnStatus {
    unsafe {
        eval(model, out, |m| {
            let cfg = PowerSearchConfig {
                threshold: y,
                outage_tolerance,
                ..PowerSearchConfig::default()
            };
            min_tx_power_with(m.scenario(), &cfg, m.tolerances()).map(|r| r.p_tx_dbm)
        })
    }
}

/// Probability that a BS has at least one user.
#[no_mangle]
pub extern "C" fn udn_prob_active(density: f64, user_density: f64) -> f64 {
    prob_active(density, user_density)
}

/// Validates a JSON experiment configuration. On `UDN_STATUS_CONFIG` the
/// diagnostics are available from [`udn_last_error`].
///
/// # Safety
/// `json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn udn_config_validate(json: *const c_char) -> UdnStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = unsafe { CStr::from_ptr(json) }
            .to_str()
            .map_err(|_| (UdnStatus::Invalid, "configuration is not UTF-8".to_owned()))?;
        validate_config(text)
            .map(|_| ())
            .map_err(|e| (UdnStatus::Config, e.to_string()))
    })
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn udn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn udn_status_name(status: UdnStatus) -> *const c_char {
    let s: &'static CStr = match status {
        UdnStatus::Ok => c"ok",
        UdnStatus::NullPointer => c"null pointer",
        UdnStatus::Domain => c"domain error",
        UdnStatus::Quadrature => c"quadrature failure",
        UdnStatus::NoCrossing => c"no crossing",
        UdnStatus::SearchFailure => c"power search failure",
        UdnStatus::Underdetermined => c"underdetermined fit",
        UdnStatus::DegenerateBoundary => c"degenerate boundary",
        UdnStatus::Invalid => c"invalid input",
        UdnStatus::Config => c"configuration error",
        UdnStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}
