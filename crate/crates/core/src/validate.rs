//! Self-validation: every closed form and limit checked against an
//! independent oracle.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::correlation::{CorrelationModel, TemporalProfile, TimeCorrelationModel};
use crate::ensemble;
use crate::error::Result;
use crate::motion::Trajectory;
use crate::quad::{self, QuadOptions};
use crate::specfun::dawson;
use crate::spectrum::{self, SHARP_CUTOFF_PREFACTOR};
use crate::units::{C, VOLTS_PER_STATVOLT};

/// `pi^3 V^2 l^2 / (2 hbar c)` at 40 mV and 100 nm, evaluated to 50 digits.
pub const XI_REFERENCE_VALUE: f64 = 0.872_974_052_832_869_33;

/// Sharp-cutoff prefactor as usually quoted in the literature for this
/// model.
pub const LITERATURE_SHARP_CUTOFF_PREFACTOR: f64 = 64.0 * PI / 15.0;

/// Energy factor `F` in `U = F Omega~(0) int (q''')^2 dt / c^5` as usually
/// quoted.
pub const LITERATURE_ENERGY_FACTOR: f64 = 2.0 / 15.0;

/// Dawson's integral at selected points, 50-digit evaluations.
const DAWSON_REFERENCE: &[(f64, f64)] = &[
    (0.5, 0.424_436_383_502_022_3),
    (1.0, 0.538_079_506_912_768_4),
    (1.5, 0.428_249_071_085_398_6),
    (2.0, 0.301_340_388_923_791_97),
    (5.0, 0.102_134_074_424_276_84),
    (10.0, 0.050_253_847_187_598_53),
    (20.0, 0.025_031_367_926_403_67),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Informational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|value / oracle - 1| <= tolerance`
    Relative,
    /// `|value - oracle| <= tolerance`
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub oracle: f64,
    pub value: f64,
    /// `value / oracle`, absent when the oracle is zero.
    pub ratio: Option<f64>,
    pub comparison: Comparison,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub entries: Vec<Entry>,
}

impl ValidationReport {
    fn push(
        &mut self,
        name: impl Into<String>,
        oracle: f64,
        value: f64,
        comparison: Comparison,
        tolerance: f64,
    ) -> &mut Entry {
        let ratio = (oracle != 0.0).then(|| value / oracle);
        let ok = match comparison {
            Comparison::Relative => ratio.is_some_and(|r| (r - 1.0).abs() <= tolerance),
            Comparison::Absolute => (value - oracle).abs() <= tolerance,
        };
        self.entries.push(Entry {
            name: name.into(),
            oracle,
            value,
            ratio,
            comparison,
            tolerance,
            status: if ok { Status::Pass } else { Status::Fail },
            note: String::new(),
        });
        self.entries.last_mut().expect("just pushed")
    }

    pub fn relative(&mut self, name: impl Into<String>, oracle: f64, value: f64, tolerance: f64) -> &mut Entry {
        self.push(name, oracle, value, Comparison::Relative, tolerance)
    }

    pub fn absolute(&mut self, name: impl Into<String>, oracle: f64, value: f64, tolerance: f64) -> &mut Entry {
        self.push(name, oracle, value, Comparison::Absolute, tolerance)
    }

    /// Recorded for reference; never counts as a failure.
    pub fn informational(&mut self, name: impl Into<String>, oracle: f64, value: f64, note: &str) {
        let e = self.push(name, oracle, value, Comparison::Relative, 0.0);
        e.status = Status::Informational;
        e.note = note.into();
    }

    pub fn failures(&self) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(|e| e.status == Status::Fail)
    }

    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn find(&self, name: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub seed: u64,
    /// Patch-field grid size for the ensemble round trip.
    pub ensemble_n: usize,
    pub ensemble_realizations: usize,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        ValidationOptions {
            seed: 0,
            ensemble_n: 256,
            ensemble_realizations: 200,
        }
    }
}

/// Runs the full oracle suite.
pub fn run(opts: &ValidationOptions) -> Result<ValidationReport> {
    let mut r = ValidationReport::default();
    dawson_checks(&mut r)?;
    gaussian_checks(&mut r)?;
    small_l_checks(&mut r)?;
    peak_checks(&mut r)?;
    sharp_cutoff_checks(&mut r)?;
    casimir_checks(&mut r)?;
    energy_checks(&mut r)?;
    time_dependent_checks(&mut r)?;
    property_checks(&mut r)?;
    ensemble_checks(&mut r, opts)?;
    Ok(r)
}

fn dawson_checks(r: &mut ValidationReport) -> Result<()> {
    for &(x, d) in DAWSON_REFERENCE {
        r.absolute(format!("dawson_reference_x{x}"), d, dawson(x)?, 1e-15);
    }
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 1..200 {
        let x = i as f64 * 0.1;
        let fd = (dawson(x + h)? - dawson(x - h)?) / (2.0 * h);
        worst = worst.max((fd - (1.0 - 2.0 * x * dawson(x)?)).abs());
    }
    r.absolute("dawson_derivative_identity", 0.0, worst, 1e-8);
    Ok(())
}

fn gaussian_checks(r: &mut ValidationReport) -> Result<()> {
    let (v, ell) = (1e-4, 1e-4);
    for x in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let w = 4.0 * C * x / ell;
        let traj = Trajectory::gaussian_pulse(1e-7, 1.0 / w)?;
        for image in [false, true] {
            let model = CorrelationModel::gaussian(v, ell)?.with_image(image);
            let oracle = spectrum::spectral_density(&model, &traj, w)?;
            let value = spectrum::spectral_density_gaussian_closed(v, ell, &traj, w, image)?;
            r.relative(format!("gaussian_closed_form_x{x}_image_{image}"), oracle, value, 1e-8);
        }
    }
    r.relative(
        "f_small_x_limit",
        16.0 * PI / 15.0,
        spectrum::f_gaussian(1e-4)? / 1e-8,
        1e-7,
    );
    r.relative("f_large_x_limit", 4.0 * PI, spectrum::f_gaussian(1e4)? * 1e8, 1e-7);
    Ok(())
}

fn small_l_checks(r: &mut ValidationReport) -> Result<()> {
    let v = 0.040 / VOLTS_PER_STATVOLT;
    let w = 1e14;
    let traj = Trajectory::gaussian_pulse(1e-7, 1.0 / w)?;
    for (lw, tol) in [(0.1, 1e-2), (0.01, 1e-4)] {
        let ell = lw * C / w;
        let model = CorrelationModel::gaussian(v, ell)?;
        let oracle = spectrum::spectral_density_small_l(PI / 8.0 * (v * ell).powi(2), &traj, w)?;
        let value = spectrum::spectral_density(&model, &traj, w)?;
        r.relative(format!("small_l_limit_lw{lw}"), oracle, value, tol);
    }
    // the small-l form written out in terms of V and l
    let ell = 1e-5;
    let pi60 = PI / 60.0 * (v * ell).powi(2) * w.powi(6) * traj.power(w)? / C.powi(5);
    let value = spectrum::spectral_density_small_l(PI / 8.0 * (v * ell).powi(2), &traj, w)?;
    r.relative("small_l_pi_over_60", pi60, value, 1e-14);
    Ok(())
}

fn peak_checks(r: &mut ValidationReport) -> Result<()> {
    // golden section on f over [0.5, 3]
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.5f64, 3.0f64);
    while b - a > 1e-10 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if spectrum::f_gaussian(x1)? > spectrum::f_gaussian(x2)? {
            b = x2;
        } else {
            a = x1;
        }
    }
    let argmax = 0.5 * (a + b);
    r.absolute("f_argmax_in_1.3_1.7", 1.5, argmax, 0.2);

    let w0 = 1e14;
    let traj = Trajectory::enveloped_harmonic(1e-7, w0, 50.0 / w0)?;
    let sweep = spectrum::sweep_correlation_length(
        0.040 / VOLTS_PER_STATVOLT,
        &traj,
        0.5 * C / w0,
        50.0 * C / w0,
        25,
        false,
        &QuadOptions::default(),
    )?;
    let e = r.absolute("sweep_ell_star_in_5_7_c_over_omega0", 6.0, sweep.ell_star * w0 / C, 1.0);
    if sweep.peak_on_boundary {
        e.status = Status::Fail;
        e.note = "peak on sweep boundary".into();
    }
    Ok(())
}

fn sharp_cutoff_checks(r: &mut ValidationReport) -> Result<()> {
    let (v, kmin, kmax) = (1e-4, 1e3, 1e4);
    let model = CorrelationModel::sharp_cutoff(v, kmin, kmax)?;
    let w_min = kmin * C;
    let traj = Trajectory::gaussian_pulse(1e-7, 1.0 / (3.0 * w_min))?;

    let at = spectrum::spectral_density(&model, &traj, w_min)?;
    let below = spectrum::spectral_density(&model, &traj, 0.9 * w_min)?;
    r.absolute("sharp_cutoff_zero_at_threshold", 0.0, at, 0.0);
    r.absolute("sharp_cutoff_zero_below_threshold", 0.0, below, 0.0);

    // exponent of K / w^6 just above threshold
    let reduced = |eps: f64| -> Result<f64> {
        let w = w_min * (1.0 + eps);
        Ok(spectrum::kernel(&model, w, &spectrum::default_options())?.value / w.powi(6))
    };
    let (e1, e2) = (1e-4, 1e-5);
    let exponent = (reduced(e1)? / reduced(e2)?).ln() / (e1 / e2).ln();
    r.relative("sharp_cutoff_threshold_exponent", 1.5, exponent, 0.05);

    // fitted prefactor across the band
    let delta = kmax * kmax - kmin * kmin;
    let fitted: Vec<f64> = (1..=9)
        .map(|i| {
            let w = w_min * (1.0 + i as f64);
            let k = spectrum::kernel(&model, w, &spectrum::default_options())?.value;
            Ok(k * C.powi(5) * delta / (v * v * w.powi(6) * spectrum::sharp_cutoff_shape(w_min / w)))
        })
        .collect::<Result<_>>()?;
    let mean = fitted.iter().sum::<f64>() / fitted.len() as f64;
    let var = fitted.iter().map(|c| (c / mean - 1.0).powi(2)).sum::<f64>() / fitted.len() as f64;
    r.absolute("sharp_cutoff_prefactor_relative_variance", 0.0, var, 1e-9);
    r.relative("sharp_cutoff_prefactor_bare", SHARP_CUTOFF_PREFACTOR, mean, 1e-10);
    r.informational(
        "sharp_cutoff_prefactor_literature",
        LITERATURE_SHARP_CUTOFF_PREFACTOR,
        mean,
        "quoted 64pi/15 is 16x the bare quadrature value (4x with the image factor)",
    );

    let closed = spectrum::spectral_density_sharpcutoff_closed(v, kmin, kmax, &traj, 4.0 * w_min, false)?;
    let quad = spectrum::spectral_density(&model, &traj, 4.0 * w_min)?;
    r.relative("sharp_cutoff_closed_form", quad, closed, 1e-9);
    Ok(())
}

fn casimir_checks(r: &mut ValidationReport) -> Result<()> {
    let v = 0.040 / VOLTS_PER_STATVOLT;
    let ell = 1e-5;
    let xi = spectrum::xi_ratio(v, ell)?;
    let traj = Trajectory::gaussian_pulse(1e-7, 1e-14)?;
    for w in [3e13, 1e14, 3e14] {
        let numeric = spectrum::xi_ratio_numeric(v, ell, &traj, w)?;
        r.relative(format!("xi_numeric_ratio_w{w:e}"), xi, numeric, 1e-10);
    }
    r.relative("xi_40mV_100nm", XI_REFERENCE_VALUE, xi, 1e-12);
    r.absolute("xi_40mV_100nm_order_unity", 1.25, xi, 0.75);
    let k1 = spectrum::dce_kernel(1e14)?;
    let k2 = spectrum::dce_kernel(2e14)?;
    r.relative("dce_omega6_scaling", 64.0, k2 / k1, 1e-14);
    Ok(())
}

fn energy_checks(r: &mut ValidationReport) -> Result<()> {
    let omega0 = 1e-9;
    for (name, traj) in [
        ("pulse", Trajectory::gaussian_pulse(1e-7, 1e-14)?),
        ("harmonic", Trajectory::enveloped_harmonic(1e-7, 3e14, 2e-14)?),
    ] {
        let f = spectrum::energy_factor(omega0, &traj, &QuadOptions::default())?;
        r.relative(format!("energy_factor_{name}"), 1.0 / 15.0, f.factor, 1e-6);
        if name == "pulse" {
            r.informational(
                "energy_factor_literature",
                LITERATURE_ENERGY_FACTOR,
                f.factor,
                "integrating the spectrum over w >= 0 gives 1/15, half the quoted 2/15",
            );
        }
    }

    // monochromatic steady state against a long pulse
    let w0 = 1e14;
    let tau = 50.0 / w0;
    let traj = Trajectory::enveloped_harmonic(1e-7, w0, tau)?;
    let model = CorrelationModel::gaussian(1e-4, 4.0 * C / w0)?;
    let u = spectrum::total_energy(&model, &traj, &QuadOptions::default())?.value;
    let power = spectrum::monochromatic_power(&model, w0, 1e-7, &QuadOptions::default())?;
    r.relative("monochromatic_power_vs_long_pulse", power, u / (PI.sqrt() * tau), 0.02);

    // work done against the reaction force
    let traj = Trajectory::gaussian_pulse(1e-7, 1e-14)?;
    let (lo, hi) = traj.time_support();
    let work = -quad::integrate(
        |t| spectrum::reaction_force(omega0, &traj, t).unwrap_or(f64::NAN) * traj.derivative(1, t).unwrap_or(f64::NAN),
        lo,
        hi,
        &QuadOptions::default().with_rel_tol(1e-12),
    )?
    .value;
    let expected = 2.0 / 15.0 * omega0 * traj.jerk_energy()? / C.powi(5);
    r.relative("reaction_force_work", expected, work, 1e-8);
    Ok(())
}

fn time_dependent_checks(r: &mut ValidationReport) -> Result<()> {
    let tau = 1e-14;
    let traj = Trajectory::gaussian_pulse(1e-7, tau)?;
    let spatial = CorrelationModel::gaussian(1e-4, 1e-4)?;
    let opts = spectrum::default_options();
    let lorentz = TimeCorrelationModel::new(spatial.clone(), TemporalProfile::Lorentzian { gamma: 1e-3 / tau })?;
    let instant = TimeCorrelationModel::new(spatial.clone(), TemporalProfile::Instantaneous)?;
    for wt in [0.5, 1.0, 1.7] {
        let w = wt / tau;
        let s = spectrum::spectral_density_with(&spatial, &traj, w, &opts)?;
        let l = spectrum::spectral_density_time_dependent(&lorentz, &traj, w, &opts)?;
        r.relative(format!("lorentzian_reduction_wtau{wt}"), s, l.value, 1e-2);
        r.absolute(
            format!("lorentzian_imaginary_residual_wtau{wt}"),
            0.0,
            l.imaginary_residual / l.value,
            1e-10,
        );
        let i = spectrum::spectral_density_time_dependent(&instant, &traj, w, &opts)?;
        r.absolute(format!("instantaneous_reduction_wtau{wt}"), s, i.value, 0.0);
    }
    Ok(())
}

fn property_checks(r: &mut ValidationReport) -> Result<()> {
    let model = CorrelationModel::gaussian(1e-4, 1e-4)?;
    let w = 1e14;
    let a = Trajectory::gaussian_pulse(1e-7, 1e-14)?;
    let b = Trajectory::enveloped_harmonic(3e-8, 8e13, 3e-14)?;
    let ka = spectrum::spectral_density(&model, &a, w)? / a.power(w)?;
    let kb = spectrum::spectral_density(&model, &b, w)? / b.power(w)?;
    r.relative("kernel_trajectory_independence", ka, kb, 1e-10);

    let p1 = spectrum::spectral_density(&model, &a, w)?;
    let p3 = spectrum::spectral_density(&model, &a.scaled(3.0), w)?;
    r.relative("second_order_scaling", p1, p3 / 9.0, 1e-14);

    let opts = QuadOptions::default().with_rel_tol(1e-12);
    for (name, traj) in [("pulse", &a), ("harmonic", &b)] {
        for n in 0..=5usize {
            let parseval = quad::integrate_semi_infinite_from(
                |w| w.powi(2 * n as i32) * traj.power(w).unwrap_or(f64::NAN),
                &traj.spectral_seeds(),
                &opts,
            )?
            .value
                / PI;
            r.relative(
                format!("parseval_{name}_order{n}"),
                traj.derivative_energy(n)?,
                parseval,
                1e-8,
            );
        }
    }
    Ok(())
}

fn ensemble_checks(r: &mut ValidationReport, opts: &ValidationOptions) -> Result<()> {
    let ell = 1e-4;
    let target = CorrelationModel::gaussian(1e-4, ell)?;
    let n = opts.ensemble_n;
    let cell = ell / 4.0;
    let bins = ensemble::mean_radial_spectrum(&target, n, cell, opts.ensemble_realizations, opts.seed)?;
    let worst = bins
        .iter()
        .filter(|b| b.modes >= 50 && b.target > 0.0)
        .map(|b| (b.mean / b.target - 1.0).abs())
        .fold(0.0, f64::max);
    r.absolute("ensemble_radial_spectrum_worst_bin", 0.0, worst, 0.05);

    let traj = Trajectory::gaussian_pulse(1e-7, ell / (4.0 * C))?;
    let omega: Vec<f64> = [0.5, 1.0, 2.0].iter().map(|x| 4.0 * C * x / ell).collect();
    let e = ensemble::ensemble_spectrum(
        &target,
        &traj,
        &omega,
        opts.ensemble_realizations,
        opts.seed,
        n,
        cell,
        &QuadOptions::default().with_rel_tol(1e-8),
    )?;
    for (i, w) in omega.iter().enumerate() {
        let closed = spectrum::spectral_density_gaussian_closed(1e-4, ell, &traj, *w, false)?;
        r.relative(
            format!("ensemble_mean_spectrum_x{}", w * ell / (4.0 * C)),
            closed,
            e.mean[i],
            0.1,
        );
    }
    Ok(())
}
