//! Radiated spectral density of a rigidly moving dipole layer.
//!
//! For a layer displaced normally by `q(t)`, with autocorrelation spectrum
//! `Omega~(k)`, the energy radiated per unit area and per `dw/2pi` is
//!
//! ```text
//! P(w) = |w| |q~(w)|^2 int_0^{w/c} k^3 Omega~(k) sqrt((w/c)^2 - k^2) dk
//!      = K(w) |q~(w)|^2
//! ```
//!
//! Everything here is in Gaussian-CGS: `P` in erg s / cm^2, `K` in
//! erg / (cm^4 s), energies per area in erg / cm^2.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::{CorrelationModel, TemporalProfile, TimeCorrelationModel};
use crate::error::{Error, Result};
use crate::motion::Trajectory;
use crate::quad::{self, QuadOptions, QuadResult};
use crate::specfun::dawson;
use crate::units::{C, HBAR};

/// Sharp-cutoff prefactor `C` in `C V^2 w^6 |q~|^2 / (c^5 (k_max^2 - k_min^2))`
/// for the bare spectrum.
pub const SHARP_CUTOFF_PREFACTOR: f64 = 4.0 * PI / 15.0;

/// `int_0^1 s^3 sqrt(1 - s^2) ds`.
pub const ENDPOINT_MOMENT: f64 = 2.0 / 15.0;

/// Below this `x` the Gaussian shape function is summed as a power series.
const F_SERIES_LIMIT: f64 = 1.0;

pub const UNIT_SYSTEM: &str = "gaussian-cgs";

/// Tolerances for the inner `k` integral.
pub fn default_options() -> QuadOptions {
    QuadOptions::default().with_rel_tol(1e-12)
}

fn check_omega(omega: f64) -> Result<()> {
    if !omega.is_finite() {
        return Err(Error::NonFinite("omega"));
    }
    if omega < 0.0 {
        return Err(Error::invalid("omega", "angular frequency must be non-negative"));
    }
    Ok(())
}

/// `K(w) = P(w) / |q~(w)|^2`, by quadrature. Zero for `w = 0`.
pub fn kernel(model: &CorrelationModel, omega: f64, opts: &QuadOptions) -> Result<QuadResult> {
    check_omega(omega)?;
    let a = omega / C;
    if a <= model.support_start() || model.is_zero() {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let breaks = model.breakpoints();
    let r = quad::integrate_sqrt_endpoint_with_breaks(|k| model.omega_tilde(k).unwrap_or(f64::NAN), a, &breaks, opts)
        .map_err(|e| e.context(format!("k integral at omega = {omega:e}")))?;
    Ok(r.scaled(omega))
}

pub fn spectral_density(model: &CorrelationModel, traj: &Trajectory, omega: f64) -> Result<f64> {
    spectral_density_with(model, traj, omega, &default_options())
}

pub fn spectral_density_with(
    model: &CorrelationModel,
    traj: &Trajectory,
    omega: f64,
    opts: &QuadOptions,
) -> Result<f64> {
    let power = traj.power(omega)?;
    if power == 0.0 {
        check_omega(omega)?;
        return Ok(0.0);
    }
    Ok(kernel(model, omega, opts)?.value * power)
}

/// `f(x) = (2 pi / x^3) [3x - (3 + 2x^2) D(x)]`, with `D` Dawson's integral.
///
/// Equals `8 pi x^2 int_0^1 s^3 sqrt(1 - s^2) exp(-x^2 s^2) ds`.
pub fn f_gaussian(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("f_gaussian"));
    }
    if x <= 0.0 {
        return Err(Error::invalid("x", "must be positive"));
    }
    if x < F_SERIES_LIMIT {
        return Ok(f_gaussian_series(x));
    }
    let d = dawson(x)?;
    Ok(2.0 * PI / x.powi(3) * (3.0 * x - (3.0 + 2.0 * x * x) * d))
}

/// `2 pi sum_{m>=2} (-1)^m 2^(m+1) (m-1) / (2m+1)!! x^(2m-2)`.
fn f_gaussian_series(x: f64) -> f64 {
    let x2 = x * x;
    // m = 2 term: 8/15 x^2
    let mut coef = 8.0 / 15.0;
    let mut power = x2;
    let mut sum = coef * power;
    let mut m = 2.0f64;
    loop {
        coef *= -2.0 * m / ((m - 1.0) * (2.0 * m + 3.0));
        power *= x2;
        let term = coef * power;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        m += 1.0;
    }
    2.0 * PI * sum
}

fn image_weight(image: bool) -> f64 {
    if image {
        1.0
    } else {
        0.25
    }
}

/// Closed form for the Gaussian quasilocal model:
/// `w V^2 |q~|^2 (w^4 / c^3) f(l w / 4c)` with `w = 1` (image) or `1/4`.
pub fn spectral_density_gaussian_closed(
    v_rms: f64,
    ell: f64,
    traj: &Trajectory,
    omega: f64,
    image: bool,
) -> Result<f64> {
    check_omega(omega)?;
    if !(v_rms >= 0.0 && v_rms.is_finite()) {
        return Err(Error::invalid("v_rms", "must be finite and non-negative"));
    }
    if !(ell > 0.0 && ell.is_finite()) {
        return Err(Error::invalid("ell", "must be positive and finite"));
    }
    if omega == 0.0 {
        return Ok(0.0);
    }
    let x = ell * omega / (4.0 * C);
    let power = traj.power(omega)?;
    Ok(image_weight(image) * v_rms * v_rms * power * omega.powi(4) / C.powi(3) * f_gaussian(x)?)
}

/// `(1 - b^2)^{3/2} (2 + 3 b^2)` with `b = k_min c / w`.
pub fn sharp_cutoff_shape(beta: f64) -> f64 {
    let one_minus = (1.0 - beta * beta).max(0.0);
    one_minus * one_minus.sqrt() * (2.0 + 3.0 * beta * beta)
}

/// Closed form for the sharp-cutoff model, valid while `w / c <= k_max`;
/// above that the band lies entirely inside the light cone and the value is
/// computed by quadrature.
pub fn spectral_density_sharpcutoff_closed(
    v_rms: f64,
    k_min: f64,
    k_max: f64,
    traj: &Trajectory,
    omega: f64,
    image: bool,
) -> Result<f64> {
    check_omega(omega)?;
    let model = CorrelationModel::sharp_cutoff(v_rms, k_min, k_max)?.with_image(image);
    if omega <= k_min * C {
        return Ok(0.0);
    }
    if omega > k_max * C {
        return spectral_density(&model, traj, omega);
    }
    let beta = k_min * C / omega;
    let power = traj.power(omega)?;
    Ok(
        model.multiplier() * SHARP_CUTOFF_PREFACTOR * v_rms * v_rms * omega.powi(6) * power
            / (C.powi(5) * (k_max * k_max - k_min * k_min))
            * sharp_cutoff_shape(beta),
    )
}

/// Small-correlation-length limit `(2/15) Omega~(0) w^6 |q~|^2 / c^5`.
pub fn spectral_density_small_l(omega0_tilde: f64, traj: &Trajectory, omega: f64) -> Result<f64> {
    check_omega(omega)?;
    if !omega0_tilde.is_finite() {
        return Err(Error::NonFinite("omega0_tilde"));
    }
    Ok(ENDPOINT_MOMENT * omega0_tilde * omega.powi(6) * traj.power(omega)? / C.powi(5))
}

/// `int_0^inf dw/2pi P(w)` for an arbitrary density.
pub fn integrate_spectrum<F>(traj: &Trajectory, density: F, opts: &QuadOptions) -> Result<QuadResult>
where
    F: Fn(f64) -> Result<f64>,
{
    let failure = std::cell::RefCell::new(None);
    let r = quad::integrate_semi_infinite_from(
        |w| match density(w) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &traj.spectral_seeds(),
        opts,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r.map_err(|e| e.context("frequency integral"))?.scaled(1.0 / (2.0 * PI)))
}

/// Total radiated energy per unit area, erg / cm^2.
pub fn total_energy(model: &CorrelationModel, traj: &Trajectory, opts: &QuadOptions) -> Result<QuadResult> {
    let inner = inner_options(opts);
    integrate_spectrum(traj, |w| spectral_density_with(model, traj, w, &inner), opts)
}

fn inner_options(outer: &QuadOptions) -> QuadOptions {
    outer.with_rel_tol((outer.rel_tol * 1e-2).max(1e-14))
}

/// Radiation-reaction force per unit area in the small-correlation limit,
/// `-(2/15) Omega~(0) q^(5)(t) / c^5`, in dyn / cm^2.
///
/// With this sign the work done against the force, `-int f q' dt`, equals
/// `(2/15) Omega~(0) int (q''')^2 dt / c^5 > 0`.
pub fn reaction_force(omega0_tilde: f64, traj: &Trajectory, t: f64) -> Result<f64> {
    if !traj.is_analytic() {
        return Err(Error::invalid(
            "trajectory",
            "reaction force needs the fifth derivative; use an analytic trajectory",
        ));
    }
    Ok(-ENDPOINT_MOMENT * omega0_tilde * traj.derivative(5, t)? / C.powi(5))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeDependentDensity {
    pub value: f64,
    /// Imaginary part of the frequency convolution, times `K(w)`.
    pub imaginary_residual: f64,
}

/// Spectral density for a separable `Omega~(k, w) = Omega~(k) g(w)`:
/// `P(w) = K(w) int dnu/2pi q~(-nu) g(w - nu) q~(nu)`.
///
/// The instantaneous profile returns [`spectral_density_with`] unchanged.
pub fn spectral_density_time_dependent(
    model: &TimeCorrelationModel,
    traj: &Trajectory,
    omega: f64,
    opts: &QuadOptions,
) -> Result<TimeDependentDensity> {
    let gamma = match model.temporal {
        TemporalProfile::Instantaneous => {
            return Ok(TimeDependentDensity {
                value: spectral_density_with(&model.spatial, traj, omega, opts)?,
                imaginary_residual: 0.0,
            })
        }
        TemporalProfile::Lorentzian { gamma } => gamma,
    };
    let k = kernel(&model.spatial, omega, opts)?.value;
    if k == 0.0 {
        return Ok(TimeDependentDensity {
            value: 0.0,
            imaginary_residual: 0.0,
        });
    }

    let support = traj.spectral_support();
    let mut points: Vec<f64> = traj.spectral_seeds().into_iter().flat_map(|s| [s, -s]).collect();
    for m in [0.0, 1.0, 10.0, 100.0, 1000.0] {
        points.push(omega - m * gamma);
        points.push(omega + m * gamma);
    }
    points.retain(|p| p.abs() < support);
    points.push(-support);
    points.push(support);
    points.sort_by(f64::total_cmp);
    points.dedup();

    let profile = model.temporal;
    let convolve = |part: fn(num_complex::Complex64) -> f64| {
        let failure = std::cell::RefCell::new(None);
        let r = quad::integrate_with_breaks(
            |nu| {
                let product = traj
                    .fourier_transform(-nu)
                    .and_then(|a| traj.fourier_transform(nu).map(|b| a * b));
                match product {
                    Ok(z) => part(z) * profile.density(omega - nu).unwrap_or(0.0),
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                }
            },
            &points,
            &opts.with_abs_tol(opts.abs_tol.max(f64::MIN_POSITIVE)),
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => r
                .map(|q| q.value / (2.0 * PI))
                .map_err(|e| e.context(format!("frequency convolution at omega = {omega:e}"))),
        }
    };
    let re = convolve(|z| z.re)?;
    let im = convolve(|z| z.im)?;
    Ok(TimeDependentDensity {
        value: k * re,
        imaginary_residual: k * im,
    })
}

/// Dynamical-Casimir spectrum of an ideal mirror, `hbar w^6 |q~|^2 / (30 pi^2 c^4)`.
pub fn dce_spectral_density(traj: &Trajectory, omega: f64) -> Result<f64> {
    Ok(dce_kernel(omega)? * traj.power(omega)?)
}

pub fn dce_kernel(omega: f64) -> Result<f64> {
    check_omega(omega)?;
    Ok(HBAR * omega.powi(6) / (30.0 * PI * PI * C.powi(4)))
}

/// `xi = pi^3 V^2 l^2 / (2 hbar c)`, the classical-to-Casimir ratio in the
/// small-correlation limit.
pub fn xi_ratio(v_rms: f64, ell: f64) -> Result<f64> {
    if !(v_rms >= 0.0 && v_rms.is_finite() && ell >= 0.0 && ell.is_finite()) {
        return Err(Error::invalid("v_rms/ell", "must be finite and non-negative"));
    }
    Ok(PI.powi(3) * (v_rms * ell).powi(2) / (2.0 * HBAR * C))
}

/// `xi` as the ratio of the two spectra at `omega`.
pub fn xi_ratio_numeric(v_rms: f64, ell: f64, traj: &Trajectory, omega: f64) -> Result<f64> {
    let omega0 = PI / 8.0 * (v_rms * ell).powi(2);
    let classical = spectral_density_small_l(omega0, traj, omega)?;
    let dce = dce_spectral_density(traj, omega)?;
    if dce == 0.0 {
        return Err(Error::invalid("omega", "Casimir spectrum vanishes here"));
    }
    Ok(classical / dce)
}

/// Reference voltage and length used to quote `xi` in natural units.
pub const XI_REFERENCE_VOLTS: f64 = 0.040;
pub const XI_REFERENCE_CM: f64 = 1.0e-5;

/// `(V / 40 mV)^2 (l / 100 nm)^2`.
pub fn xi_normalized(v_rms: f64, ell: f64) -> f64 {
    let v_ref = XI_REFERENCE_VOLTS / crate::units::VOLTS_PER_STATVOLT;
    (v_rms / v_ref).powi(2) * (ell / XI_REFERENCE_CM).powi(2)
}

/// Steady-state power per area for `q = q0 cos(w0 t)`: `(q0^2 / 4) K(w0)`,
/// in erg / (s cm^2).
pub fn monochromatic_power(model: &CorrelationModel, omega0: f64, q0: f64, opts: &QuadOptions) -> Result<f64> {
    check_omega(omega0)?;
    if omega0 == 0.0 {
        return Err(Error::invalid("omega0", "must be positive"));
    }
    if q0 == 0.0 {
        return Ok(0.0);
    }
    Ok(0.25 * q0 * q0 * kernel(model, omega0, opts)?.value)
}

/// Comparison of the computed energy against `F Omega~(0) I_3 / c^5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyFactor {
    pub total_energy: f64,
    /// `Omega~(0) int (q''')^2 dt / c^5`
    pub jerk_term: f64,
    /// `total_energy / jerk_term`
    pub factor: f64,
    /// 1/15 or 2/15, whichever agrees to `1e-6`, else `None`.
    pub identified: Option<f64>,
}

pub fn energy_factor(omega0_tilde: f64, traj: &Trajectory, opts: &QuadOptions) -> Result<EnergyFactor> {
    if !(omega0_tilde > 0.0) {
        return Err(Error::invalid("omega0", "must be positive"));
    }
    let model = CorrelationModel::constant(omega0_tilde)?;
    let total = total_energy(&model, traj, opts)?.value;
    let jerk_term = omega0_tilde * traj.jerk_energy()? / C.powi(5);
    let factor = total / jerk_term;
    let identified = [1.0 / 15.0, 2.0 / 15.0]
        .into_iter()
        .find(|f| (factor / f - 1.0).abs() <= 1e-6);
    Ok(EnergyFactor {
        total_energy: total,
        jerk_term,
        factor,
        identified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// `(l, U_rad)` pairs, cm and erg / cm^2.
    pub table: Vec<(f64, f64)>,
    pub ell_star: f64,
    pub energy_star: f64,
    /// The largest tabulated energy sits at an end of the range, so
    /// `ell_star` is only a bound.
    pub peak_on_boundary: bool,
}

/// Radiated energy of the Gaussian model as a function of `l`, tabulated
/// on a log grid and refined by golden-section search.
pub fn sweep_correlation_length(
    v_rms: f64,
    traj: &Trajectory,
    ell_min: f64,
    ell_max: f64,
    count: usize,
    image: bool,
    opts: &QuadOptions,
) -> Result<SweepResult> {
    if !(ell_min > 0.0 && ell_max > ell_min && ell_max.is_finite()) {
        return Err(Error::invalid("ell_range", "need 0 < min < max"));
    }
    if count < 3 {
        return Err(Error::invalid("count", "need at least 3 points"));
    }
    let energy = |ell: f64| {
        integrate_spectrum(
            traj,
            |w| spectral_density_gaussian_closed(v_rms, ell, traj, w, image),
            opts,
        )
        .map(|r| r.value)
    };
    let ratio = (ell_max / ell_min).ln();
    let ells: Vec<f64> = (0..count)
        .map(|i| ell_min * (ratio * i as f64 / (count - 1) as f64).exp())
        .collect();
    let energies = ells.par_iter().map(|&l| energy(l)).collect::<Result<Vec<f64>>>()?;
    let table: Vec<(f64, f64)> = ells.iter().copied().zip(energies.iter().copied()).collect();

    let best = energies
        .iter()
        .enumerate()
        .fold(0, |b, (i, e)| if *e > energies[b] { i } else { b });
    if best == 0 || best == count - 1 {
        return Ok(SweepResult {
            ell_star: ells[best],
            energy_star: energies[best],
            table,
            peak_on_boundary: true,
        });
    }

    // golden section in ln(l)
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (ells[best - 1].ln(), ells[best + 1].ln());
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = energy(x1.exp())?;
    let mut f2 = energy(x2.exp())?;
    while b - a > 1e-9 {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = energy(x1.exp())?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = energy(x2.exp())?;
        }
    }
    let ell_star = (0.5 * (a + b)).exp();
    Ok(SweepResult {
        ell_star,
        energy_star: energy(ell_star)?,
        table,
        peak_on_boundary: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// `count` frequencies from `min` to `max` inclusive.
pub fn omega_grid(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) {
        return Err(Error::NonFinite("omega grid"));
    }
    if count < 2 {
        return Err(Error::invalid("omega_grid.count", "need at least 2 points"));
    }
    if !(max > min) {
        return Err(Error::invalid("omega_grid.max", "must exceed min"));
    }
    let t = |i: usize| i as f64 / (count - 1) as f64;
    let grid: Vec<f64> = match spacing {
        Spacing::Linear => {
            if min < 0.0 {
                return Err(Error::invalid("omega_grid.min", "must be non-negative"));
            }
            (0..count).map(|i| min + (max - min) * t(i)).collect()
        }
        Spacing::Log => {
            if !(min > 0.0) {
                return Err(Error::invalid("omega_grid.min", "log spacing needs min > 0"));
            }
            let r = (max / min).ln();
            (0..count).map(|i| min * (r * t(i)).exp()).collect()
        }
    };
    check_grid(&grid)?;
    Ok(grid)
}

pub(crate) fn check_grid(omega: &[f64]) -> Result<()> {
    if omega.is_empty() {
        return Err(Error::invalid("omega", "grid is empty"));
    }
    if omega.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::invalid("omega", "frequencies must be finite and non-negative"));
    }
    if omega.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("omega", "grid must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMetadata {
    pub model: String,
    pub trajectory: String,
    pub image_factor: bool,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub unit_system: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omega: Vec<f64>,
    pub p: Vec<f64>,
    pub kernel: Vec<f64>,
    pub p_over_pdce: Vec<f64>,
    /// Casimir spectrum on the same grid, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_dce: Option<Vec<f64>>,
    pub metadata: SpectrumMetadata,
}

/// Evaluates `P`, `K` and `P / P_DCE` on `omega`, in parallel over grid
/// points. Each point is computed independently, so the result does not
/// depend on scheduling.
pub fn compute_spectrum(
    model: &CorrelationModel,
    traj: &Trajectory,
    omega: &[f64],
    opts: &QuadOptions,
) -> Result<SpectrumResult> {
    check_grid(omega)?;
    let rows = omega
        .par_iter()
        .map(|&w| {
            let k = kernel(model, w, opts)?.value;
            let p = k * traj.power(w)?;
            let dce = dce_kernel(w)?;
            let ratio = if dce > 0.0 { k / dce } else { 0.0 };
            Ok((p, k, ratio))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut p, mut kernel_values, mut ratio) = (vec![], vec![], vec![]);
    for (a, b, r) in rows {
        p.push(a);
        kernel_values.push(b);
        ratio.push(r);
    }
    Ok(SpectrumResult {
        omega: omega.to_vec(),
        p,
        kernel: kernel_values,
        p_over_pdce: ratio,
        p_dce: None,
        metadata: SpectrumMetadata {
            model: model.descriptor(),
            trajectory: traj.descriptor(),
            image_factor: model.image_factor,
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol,
            unit_system: UNIT_SYSTEM.into(),
        },
    })
}

/// Like [`compute_spectrum`] with a temporal profile. `K` is reported as
/// `P / |q~|^2` where the motion spectrum is non-zero, else the static kernel.
pub fn compute_spectrum_time_dependent(
    model: &TimeCorrelationModel,
    traj: &Trajectory,
    omega: &[f64],
    opts: &QuadOptions,
) -> Result<SpectrumResult> {
    let mut result = compute_spectrum(&model.spatial, traj, omega, opts)?;
    if model.temporal == TemporalProfile::Instantaneous {
        return Ok(result);
    }
    let rows = omega
        .par_iter()
        .map(|&w| {
            let p = spectral_density_time_dependent(model, traj, w, opts)?.value;
            let power = traj.power(w)?;
            Ok((p, power))
        })
        .collect::<Result<Vec<_>>>()?;
    for (i, (p, power)) in rows.into_iter().enumerate() {
        result.p[i] = p;
        if power > 0.0 {
            result.kernel[i] = p / power;
            let dce = dce_kernel(omega[i])?;
            result.p_over_pdce[i] = if dce > 0.0 { result.kernel[i] / dce } else { 0.0 };
        }
    }
    result.metadata.model = format!("{}, temporal={:?}", result.metadata.model, model.temporal);
    Ok(result)
}

/// Column set for CSV output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitColumns {
    #[default]
    Gauss,
    Si,
}

impl UnitColumns {
    pub fn tag(self) -> &'static str {
        match self {
            UnitColumns::Gauss => UNIT_SYSTEM,
            UnitColumns::Si => "si",
        }
    }
}

/// Shortest round-trip formatting is not fixed-width; 17 significant digits
/// are.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl SpectrumResult {
    /// CSV with `# `-prefixed header lines.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &[String], units: UnitColumns) -> Result<()> {
        for line in header {
            writeln!(out, "# {line}").map_err(|e| Error::io("<csv>", e))?;
        }
        let (names, p_scale, k_scale) = match units {
            UnitColumns::Gauss => (
                ["omega_rad_per_s", "P_erg_s_per_cm2", "K_erg_per_cm4_s", "P_over_PDCE"],
                1.0,
                1.0,
            ),
            // erg s/cm^2 -> J s/m^2 is 1e-7 / 1e-4; erg/(cm^4 s) -> J/(m^4 s) is 1e-7 / 1e-8
            UnitColumns::Si => (
                ["omega_rad_per_s", "P_J_s_per_m2", "K_J_per_m4_s", "P_over_PDCE"],
                1e-3,
                10.0,
            ),
        };
        let mut w = csv::Writer::from_writer(out);
        let mut columns: Vec<&str> = names.to_vec();
        if self.p_dce.is_some() {
            columns.push(match units {
                UnitColumns::Gauss => "PDCE_erg_s_per_cm2",
                UnitColumns::Si => "PDCE_J_s_per_m2",
            });
        }
        w.write_record(&columns)?;
        for i in 0..self.omega.len() {
            let mut row = vec![
                fmt17(self.omega[i]),
                fmt17(self.p[i] * p_scale),
                fmt17(self.kernel[i] * k_scale),
                fmt17(self.p_over_pdce[i]),
            ];
            if let Some(d) = &self.p_dce {
                row.push(fmt17(d[i] * p_scale));
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pulse() -> Trajectory {
        Trajectory::gaussian_pulse(1e-7, 1e-14).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn constant_model_matches_endpoint_moment() {
        let traj = pulse();
        let m = CorrelationModel::constant(2.0e-9).unwrap();
        for w in [1e13, 1e14, 3e14] {
            let p = spectral_density(&m, &traj, w).unwrap();
            let exact = 2.0 / 15.0 * 2.0e-9 * w.powi(6) * traj.power(w).unwrap() / C.powi(5);
            assert!(rel(p, exact) < 1e-12);
            assert!(rel(p, spectral_density_small_l(2.0e-9, &traj, w).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn wide_light_cone_resolves_narrow_gaussian() {
        let ell = 1e-4;
        let m = CorrelationModel::gaussian(1e-4, ell).unwrap();
        for x in [1e3, 1e5] {
            let w = 4.0 * C * x / ell;
            let k = kernel(&m, w, &default_options()).unwrap().value;
            let closed = 0.25 * 1e-8 * w.powi(4) / C.powi(3) * f_gaussian(x).unwrap();
            assert!(rel(k, closed) < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn degenerate_inputs() {
        let m = CorrelationModel::constant(1.0).unwrap();
        assert_eq!(spectral_density(&m, &pulse(), 0.0).unwrap(), 0.0);
        assert!(spectral_density(&m, &pulse(), -1.0).is_err());
        let still = Trajectory::gaussian_pulse(0.0, 1.0).unwrap();
        assert_eq!(spectral_density(&m, &still, 1e10).unwrap(), 0.0);
        assert_eq!(dce_spectral_density(&still, 1e10).unwrap(), 0.0);
        assert_eq!(spectral_density_small_l(0.0, &pulse(), 1e14).unwrap(), 0.0);
        assert!(f_gaussian(0.0).is_err());
        assert!(f_gaussian(-1.0).is_err());
    }

    #[test]
    fn f_limits() {
        assert!(rel(f_gaussian(1e-4).unwrap() / 1e-8, 16.0 * PI / 15.0) < 1e-7);
        assert!(rel(f_gaussian(1e4).unwrap() * 1e8, 4.0 * PI) < 1e-7);
        // continuity at the series switch
        let below = f_gaussian_series(F_SERIES_LIMIT);
        let d = dawson(F_SERIES_LIMIT).unwrap();
        let direct = 2.0 * PI * (3.0 - 5.0 * d);
        assert!(rel(below, direct) < 1e-14);
        // f(1) = 1.9452896618950431 (50-digit evaluation)
        assert!(rel(f_gaussian(1.0).unwrap(), 1.945_289_661_895_043_1) < 1e-14);
    }

    #[test]
    fn f_matches_integral_form() {
        let opts = QuadOptions::default().with_rel_tol(1e-13);
        for x in [0.05, 0.3, 0.99, 1.01, 2.0, 7.0, 20.0] {
            let j = quad::integrate(
                |s| s.powi(3) * (1.0 - s * s).sqrt() * (-(x * s).powi(2)).exp(),
                0.0,
                1.0,
                &opts,
            )
            .unwrap()
            .value;
            assert!(rel(f_gaussian(x).unwrap(), 8.0 * PI * x * x * j) < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn gaussian_closed_matches_quadrature() {
        let ell = 1e-4;
        for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
            let w = 4.0 * C * x / ell;
            let traj = Trajectory::gaussian_pulse(1e-7, 1.0 / w).unwrap();
            for image in [false, true] {
                let m = CorrelationModel::gaussian(3e-4, ell).unwrap().with_image(image);
                let q = spectral_density(&m, &traj, w).unwrap();
                let c = spectral_density_gaussian_closed(3e-4, ell, &traj, w, image).unwrap();
                assert!(rel(c, q) < 1e-8, "x = {x}, image = {image}");
            }
        }
    }

    #[test]
    fn sharp_cutoff_closed_and_threshold() {
        let traj = pulse();
        let (kmin, kmax) = (1e3, 1e4);
        for image in [false, true] {
            let m = CorrelationModel::sharp_cutoff(2e-4, kmin, kmax)
                .unwrap()
                .with_image(image);
            for f in [1.001, 1.5, 3.0, 9.99, 10.0, 12.0] {
                let w = f * kmin * C;
                let q = spectral_density(&m, &traj, w).unwrap();
                let c = spectral_density_sharpcutoff_closed(2e-4, kmin, kmax, &traj, w, image).unwrap();
                assert!(rel(c, q) < 1e-9, "f = {f}");
            }
            assert_eq!(spectral_density(&m, &traj, 0.999 * kmin * C).unwrap(), 0.0);
            assert_eq!(spectral_density(&m, &traj, kmin * C).unwrap(), 0.0);
        }
        assert_eq!(sharp_cutoff_shape(0.0), 2.0);
        assert!(spectral_density_sharpcutoff_closed(1.0, 2.0, 1.0, &traj, 1e14, false).is_err());
    }

    #[test]
    fn xi_pinned() {
        let v = 0.040 / crate::units::VOLTS_PER_STATVOLT;
        let xi = xi_ratio(v, 1e-5).unwrap();
        // pi^3 V^2 l^2 / (2 hbar c) at 40 mV, 100 nm, 50-digit evaluation
        assert!(rel(xi, 0.872_974_052_832_869_33) < 1e-12);
        assert!((xi_normalized(v, 1e-5) - 1.0).abs() < 1e-14);
        assert_eq!(xi_ratio(0.0, 1.0).unwrap(), 0.0);
        assert!(rel(xi_ratio(2.0 * v, 1e-5).unwrap(), 4.0 * xi) < 1e-15);
        for w in [1e12, 1e14, 1e15] {
            let numeric = xi_ratio_numeric(v, 1e-5, &pulse(), w).unwrap();
            assert!(rel(numeric, xi) < 1e-10);
        }
    }

    #[test]
    fn dce_scaling() {
        let a = dce_kernel(1e14).unwrap();
        let b = dce_kernel(2e14).unwrap();
        assert!(rel(b, 64.0 * a) < 1e-14);
    }

    #[test]
    fn energy_factor_is_one_fifteenth() {
        let traj = pulse();
        let r = energy_factor(1e-9, &traj, &QuadOptions::default()).unwrap();
        assert_eq!(r.identified, Some(1.0 / 15.0));
        let h = Trajectory::enveloped_harmonic(1e-7, 3e14, 2e-14).unwrap();
        let r = energy_factor(1e-9, &h, &QuadOptions::default()).unwrap();
        assert_eq!(r.identified, Some(1.0 / 15.0));
    }

    #[test]
    fn energy_scales_quadratically() {
        let m = CorrelationModel::gaussian(3e-4, 1e-4).unwrap();
        let opts = QuadOptions::default();
        let a = total_energy(&m, &pulse(), &opts).unwrap().value;
        let b = total_energy(&m, &pulse().scaled(2.0), &opts).unwrap().value;
        assert!(rel(b, 4.0 * a) < 1e-9);
        let still = Trajectory::gaussian_pulse(0.0, 1e-14).unwrap();
        assert_eq!(total_energy(&m, &still, &opts).unwrap().value, 0.0);
    }

    #[test]
    fn reaction_force_properties() {
        let traj = pulse();
        assert_eq!(reaction_force(1e-9, &traj, 0.0).unwrap(), 0.0);
        let still = Trajectory::gaussian_pulse(0.0, 1e-14).unwrap();
        assert_eq!(reaction_force(1e-9, &still, 3e-15).unwrap(), 0.0);
        // work against the force equals (2/15) Omega0 I_3 / c^5
        let opts = QuadOptions::default().with_rel_tol(1e-12);
        let (lo, hi) = traj.time_support();
        let work = -quad::integrate(
            |t| reaction_force(1e-9, &traj, t).unwrap() * traj.derivative(1, t).unwrap(),
            lo,
            hi,
            &opts,
        )
        .unwrap()
        .value;
        let expected = 2.0 / 15.0 * 1e-9 * traj.jerk_energy().unwrap() / C.powi(5);
        assert!(rel(work, expected) < 1e-8);
        let t: Vec<f64> = (0..16).map(f64::from).collect();
        let sampled = Trajectory::sampled(&t, &t, crate::motion::Window::Hann).unwrap();
        assert!(reaction_force(1.0, &sampled, 1.0).is_err());
    }

    #[test]
    fn reaction_force_dimensions() {
        use crate::units::{Dimension, Quantity};
        let omega0 = Quantity::new(1.0, Dimension::ENERGY * Dimension::LENGTH);
        let q5 = Quantity::new(1.0, Dimension::LENGTH / Dimension::TIME.powi(5));
        let f = omega0 * q5 / Quantity::speed_of_light().powi(5);
        assert_eq!(f.dim, Dimension::FORCE / Dimension::LENGTH.powi(2));
    }

    #[test]
    fn time_dependent_reduces_to_static() {
        let traj = pulse();
        let spatial = CorrelationModel::gaussian(3e-4, 1e-4).unwrap();
        let opts = default_options();
        let inst = TimeCorrelationModel::new(spatial.clone(), TemporalProfile::Instantaneous).unwrap();
        // the Lorentzian tail picks up ~gamma tau exp(w^2 tau^2) of extra weight,
        // so compare over the bulk of the emission, w tau <= sqrt(3)
        for w in [5e13, 1e14, 1.7e14] {
            let s = spectral_density_with(&spatial, &traj, w, &opts).unwrap();
            let i = spectral_density_time_dependent(&inst, &traj, w, &opts).unwrap();
            assert_eq!(i.value.to_bits(), s.to_bits());
            let lor = TimeCorrelationModel::new(spatial.clone(), TemporalProfile::Lorentzian { gamma: 1e-3 / 1e-14 })
                .unwrap();
            let l = spectral_density_time_dependent(&lor, &traj, w, &opts).unwrap();
            assert!(rel(l.value, s) < 0.01, "w = {w}: {} vs {s}", l.value);
            assert!(l.imaginary_residual.abs() <= 1e-10 * l.value.abs());
            assert!(l.value >= 0.0);
        }
    }

    #[test]
    fn monochromatic_matches_long_pulse() {
        let w0 = 1e14;
        let tau = 50.0 / w0;
        let traj = Trajectory::enveloped_harmonic(1e-7, w0, tau).unwrap();
        let m = CorrelationModel::gaussian(3e-4, 4.0 * C / w0).unwrap();
        let opts = QuadOptions::default();
        let u = total_energy(&m, &traj, &opts).unwrap().value;
        let power = monochromatic_power(&m, w0, 1e-7, &opts).unwrap();
        assert!(rel(u / (PI.sqrt() * tau), power) < 0.02);
        assert_eq!(monochromatic_power(&m, w0, 0.0, &opts).unwrap(), 0.0);
        let sc = CorrelationModel::sharp_cutoff(1.0, 2.0 * w0 / C, 3.0 * w0 / C).unwrap();
        assert_eq!(monochromatic_power(&sc, w0, 1e-7, &opts).unwrap(), 0.0);
    }

    #[test]
    fn sweep_finds_peak() {
        let w0 = 1e14;
        let traj = Trajectory::enveloped_harmonic(1e-7, w0, 50.0 / w0).unwrap();
        let s = sweep_correlation_length(
            3e-4,
            &traj,
            0.5 * C / w0,
            50.0 * C / w0,
            25,
            false,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!(!s.peak_on_boundary);
        let l = s.ell_star * w0 / C;
        assert!((5.0..=7.0).contains(&l), "l* = {l} c/w0");
        let edge = sweep_correlation_length(
            3e-4,
            &traj,
            0.5 * C / w0,
            2.0 * C / w0,
            5,
            false,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!(edge.peak_on_boundary);
    }

    #[test]
    fn grids() {
        let g = omega_grid(1.0, 100.0, 3, Spacing::Log).unwrap();
        assert!(rel(g[1], 10.0) < 1e-14);
        assert!(omega_grid(0.0, 1.0, 3, Spacing::Log).is_err());
        assert!(omega_grid(2.0, 1.0, 3, Spacing::Linear).is_err());
    }

    #[test]
    fn csv_output() {
        let m = CorrelationModel::constant(1e-9).unwrap();
        let r = compute_spectrum(&m, &pulse(), &[1e13, 1e14], &default_options()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf, &["version 0".into()], UnitColumns::Gauss)
            .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# version 0");
        assert_eq!(lines[1], "omega_rad_per_s,P_erg_s_per_cm2,K_erg_per_cm4_s,P_over_PDCE");
        let p: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(p, r.p[1]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn density_non_negative(
            v in 0.0f64..1e-3,
            ell in 1e-6f64..1e-3,
            tau in 1e-15f64..1e-13,
            w in 1e12f64..1e15,
        ) {
            let traj = Trajectory::gaussian_pulse(1e-7, tau).unwrap();
            let m = CorrelationModel::gaussian(v, ell).unwrap();
            prop_assert!(spectral_density(&m, &traj, w).unwrap() >= 0.0);
        }
    }
}
