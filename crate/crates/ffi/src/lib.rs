//! C interface to `patchrad`.
//!
//! Every fallible function returns a [`PatchradStatus`] and writes its result
//! through an out-pointer. On failure the out-pointer is left untouched and
//! [`patchrad_last_error`] describes what went wrong on the calling thread.
//! Models and trajectories are opaque handles; free them with the matching
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use patchrad::correlation::CorrelationModel;
use patchrad::error::Error;
use patchrad::motion::{Trajectory, Window};
use patchrad::quad::QuadOptions;
use patchrad::{specfun, spectrum};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchradStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    NonFinite = 3,
    NonConvergence = 4,
    TailNotReached = 5,
    Io = 6,
    Panic = 7,
}

/// Taper for sampled trajectories.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchradWindow {
    Hann = 0,
    /// Uses the `alpha` argument as the tapered fraction.
    Tukey = 1,
    Rectangular = 2,
}

/// Opaque trajectory handle.
pub struct PatchradTrajectory(Trajectory);

/// Opaque correlation-model handle.
pub struct PatchradCorrelation(CorrelationModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PatchradStatus {
    match err.root() {
        Error::NonFinite(_) => PatchradStatus::NonFinite,
        Error::NonConvergence { .. } => PatchradStatus::NonConvergence,
        Error::TailNotReached { .. } => PatchradStatus::TailNotReached,
        Error::Io { .. } | Error::Csv(_) | Error::Json(_) => PatchradStatus::Io,
        _ => PatchradStatus::InvalidArgument,
    }
}

/// Runs `f`, storing its value in `out`. Catches panics.
fn guard<T>(out: *mut T, f: impl FnOnce() -> patchrad::error::Result<T>) -> PatchradStatus {
    if out.is_null() {
        set_last_error("null output pointer".into());
        return PatchradStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            PatchradStatus::Ok
        }
        Ok(Err(e)) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic".into());
            PatchradStatus::Panic
        }
    }
}

fn null_error(what: &str) -> PatchradStatus {
    set_last_error(format!("null {what} handle"));
    PatchradStatus::NullPointer
}

/// Message for the most recent failure on this thread, or NULL if none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn patchrad_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn patchrad_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Dawson function F(x).
#[no_mangle]
pub extern "C" fn patchrad_dawson(x: f64, out: *mut f64) -> PatchradStatus {
    guard(out, || specfun::dawson(x))
}

/// Dimensionless shape factor of the Gaussian-correlated spectrum.
#[no_mangle]
pub extern "C" fn patchrad_f_gaussian(x: f64, out: *mut f64) -> PatchradStatus {
    guard(out, || spectrum::f_gaussian(x))
}

/// ξ for rms potential `v_rms` (statvolt) and correlation length `ell` (cm).
#[no_mangle]
pub extern "C" fn patchrad_xi(v_rms: f64, ell: f64, out: *mut f64) -> PatchradStatus {
    guard(out, || spectrum::xi_ratio(v_rms, ell))
}

fn box_traj(
    out: *mut *mut PatchradTrajectory,
    f: impl FnOnce() -> patchrad::error::Result<Trajectory>,
) -> PatchradStatus {
    guard(out, || f().map(|t| Box::into_raw(Box::new(PatchradTrajectory(t)))))
}

fn box_corr(
    out: *mut *mut PatchradCorrelation,
    f: impl FnOnce() -> patchrad::error::Result<CorrelationModel>,
) -> PatchradStatus {
    guard(out, || f().map(|c| Box::into_raw(Box::new(PatchradCorrelation(c)))))
}

/// q(t) = q0 exp(-t²/2τ²).
#[no_mangle]
pub extern "C" fn patchrad_trajectory_gaussian_pulse(
    q0: f64,
    tau: f64,
    out: *mut *mut PatchradTrajectory,
) -> PatchradStatus {
    box_traj(out, || Trajectory::gaussian_pulse(q0, tau))
}

/// q(t) = q0 cos(ω0 t) exp(-t²/2τ²).
#[no_mangle]
pub extern "C" fn patchrad_trajectory_enveloped_harmonic(
    q0: f64,
    omega0: f64,
    tau: f64,
    out: *mut *mut PatchradTrajectory,
) -> PatchradStatus {
    box_traj(out, || Trajectory::enveloped_harmonic(q0, omega0, tau))
}

/// Uniformly sampled motion; `t` and `q` hold `n` values in s and cm.
///
/// # Safety
/// `t` and `q` must point to `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn patchrad_trajectory_sampled(
    t: *const f64,
    q: *const f64,
    n: usize,
    window: PatchradWindow,
    alpha: f64,
    out: *mut *mut PatchradTrajectory,
) -> PatchradStatus {
    if t.is_null() || q.is_null() {
        set_last_error("null sample array".into());
        return PatchradStatus::NullPointer;
    }
    let t = std::slice::from_raw_parts(t, n);
    let q = std::slice::from_raw_parts(q, n);
    let window = match window {
        PatchradWindow::Hann => Window::Hann,
        PatchradWindow::Tukey => Window::Tukey { alpha },
        PatchradWindow::Rectangular => Window::Rectangular,
    };
    box_traj(out, || Trajectory::sampled(t, q, window))
}

/// # Safety
/// `traj` must come from a `patchrad_trajectory_*` constructor and not be
/// freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn patchrad_trajectory_free(traj: *mut PatchradTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// q̃(ω) = ∫ q(t) e^{iωt} dt.
///
/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn patchrad_trajectory_fourier(
    traj: *const PatchradTrajectory,
    omega: f64,
    re: *mut f64,
    im: *mut f64,
) -> PatchradStatus {
    let Some(traj) = traj.as_ref() else {
        return null_error("trajectory");
    };
    if re.is_null() || im.is_null() {
        set_last_error("null output pointer".into());
        return PatchradStatus::NullPointer;
    }
    let mut z = (0.0, 0.0);
    let status = guard(&mut z, || traj.0.fourier_transform(omega).map(|c| (c.re, c.im)));
    if status == PatchradStatus::Ok {
        *re = z.0;
        *im = z.1;
    }
    status
}

/// d^order q / dt^order at `t`.
///
/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn patchrad_trajectory_derivative(
    traj: *const PatchradTrajectory,
    order: u32,
    t: f64,
    out: *mut f64,
) -> PatchradStatus {
    let Some(traj) = traj.as_ref() else {
        return null_error("trajectory");
    };
    guard(out, || traj.0.derivative(order as usize, t))
}

/// Gaussian-correlated patches with rms potential `v_rms` and length `ell`.
#[no_mangle]
pub extern "C" fn patchrad_correlation_gaussian(
    v_rms: f64,
    ell: f64,
    image_factor: bool,
    out: *mut *mut PatchradCorrelation,
) -> PatchradStatus {
    box_corr(out, || {
        CorrelationModel::gaussian(v_rms, ell).map(|m| m.with_image(image_factor))
    })
}

/// Flat spectrum on k_min ≤ k ≤ k_max.
#[no_mangle]
pub extern "C" fn patchrad_correlation_sharp_cutoff(
    v_rms: f64,
    k_min: f64,
    k_max: f64,
    image_factor: bool,
    out: *mut *mut PatchradCorrelation,
) -> PatchradStatus {
    box_corr(out, || {
        CorrelationModel::sharp_cutoff(v_rms, k_min, k_max).map(|m| m.with_image(image_factor))
    })
}

/// Wavenumber-independent spectrum Ω̃(k) = omega0.
#[no_mangle]
pub extern "C" fn patchrad_correlation_constant(
    omega0: f64,
    image_factor: bool,
    out: *mut *mut PatchradCorrelation,
) -> PatchradStatus {
    box_corr(out, || {
        CorrelationModel::constant(omega0).map(|m| m.with_image(image_factor))
    })
}

/// Monotone interpolation through `n` nodes (k in 1/cm, Ω̃ in erg cm).
///
/// # Safety
/// `k` and `values` must point to `n` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn patchrad_correlation_tabulated(
    k: *const f64,
    values: *const f64,
    n: usize,
    image_factor: bool,
    out: *mut *mut PatchradCorrelation,
) -> PatchradStatus {
    if k.is_null() || values.is_null() {
        set_last_error("null table array".into());
        return PatchradStatus::NullPointer;
    }
    let k = std::slice::from_raw_parts(k, n).to_vec();
    let values = std::slice::from_raw_parts(values, n).to_vec();
    box_corr(out, || {
        CorrelationModel::tabulated(k, values).map(|m| m.with_image(image_factor))
    })
}

/// # Safety
/// `model` must come from a `patchrad_correlation_*` constructor and not be
/// freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn patchrad_correlation_free(model: *mut PatchradCorrelation) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Ω̃(k), image factor included.
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn patchrad_correlation_omega_tilde(
    model: *const PatchradCorrelation,
    k: f64,
    out: *mut f64,
) -> PatchradStatus {
    let Some(model) = model.as_ref() else {
        return null_error("correlation");
    };
    guard(out, || model.0.omega_tilde(k))
}

/// Trajectory-independent kernel K(ω), so that P(ω) = K(ω)|q̃(ω)|².
///
/// # Safety
/// `model` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn patchrad_kernel(
    model: *const PatchradCorrelation,
    omega: f64,
    out: *mut f64,
) -> PatchradStatus {
    let Some(model) = model.as_ref() else {
        return null_error("correlation");
    };
    guard(out, || {
        spectrum::kernel(&model.0, omega, &spectrum::default_options()).map(|r| r.value)
    })
}

/// Radiated energy per unit area per unit angular frequency, erg s / cm².
///
/// # Safety
/// Both handles must be live or NULL.
#[no_mangle]
pub unsafe extern "C" fn patchrad_spectral_density(
    model: *const PatchradCorrelation,
    traj: *const PatchradTrajectory,
    omega: f64,
    out: *mut f64,
) -> PatchradStatus {
    let Some(model) = model.as_ref() else {
        return null_error("correlation");
    };
    let Some(traj) = traj.as_ref() else {
        return null_error("trajectory");
    };
    guard(out, || spectrum::spectral_density(&model.0, &traj.0, omega))
}

/// Total radiated energy per unit area, erg / cm². `rel_tol` ≤ 0 selects
/// the default of 1e-10.
///
/// # Safety
/// Both handles must be live or NULL.
#[no_mangle]
pub unsafe extern "C" fn patchrad_total_energy(
    model: *const PatchradCorrelation,
    traj: *const PatchradTrajectory,
    rel_tol: f64,
    out: *mut f64,
) -> PatchradStatus {
    let Some(model) = model.as_ref() else {
        return null_error("correlation");
    };
    let Some(traj) = traj.as_ref() else {
        return null_error("trajectory");
    };
    guard(out, || {
        let mut opts = QuadOptions::default();
        if rel_tol > 0.0 {
            opts = opts.with_rel_tol(rel_tol);
        }
        spectrum::total_energy(&model.0, &traj.0, &opts).map(|r| r.value)
    })
}

/// Vacuum-fluctuation (dynamical Casimir) spectrum of the same motion.
///
/// # Safety
/// `traj` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn patchrad_dce_spectral_density(
    traj: *const PatchradTrajectory,
    omega: f64,
    out: *mut f64,
) -> PatchradStatus {
    let Some(traj) = traj.as_ref() else {
        return null_error("trajectory");
    };
    guard(out, || spectrum::dce_spectral_density(&traj.0, omega))
}
