//! Bounded plane trajectories `q(t)`.
//!
//! Fourier convention: `q~(w) = int dt exp(+i w t) q(t)`, inverse
//! `q(t) = (1/2pi) int dw exp(-i w t) q~(w)`, so Parseval reads
//! `int |q|^2 dt = int dw/2pi |q~|^2`.
//!
//! Two analytic families are available in closed form (transform,
//! derivatives to fifth order, derivative energies). Sampled motion is kept
//! as tapered samples on a uniform grid; the taper is part of the motion, so
//! transforms and derivatives describe the same signal.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Taper applied to sampled motion before any transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    #[default]
    Hann,
    /// Cosine-tapered flat top; `alpha` is the tapered fraction of the record.
    Tukey {
        alpha: f64,
    },
    Rectangular,
}

impl Window {
    /// Weight of sample `j` of `n`.
    pub fn weight(&self, j: usize, n: usize) -> f64 {
        if n < 2 {
            return 1.0;
        }
        let x = j as f64 / (n - 1) as f64;
        match *self {
            Window::Rectangular => 1.0,
            Window::Hann => 0.5 * (1.0 - (2.0 * PI * x).cos()),
            Window::Tukey { alpha } => {
                if alpha <= 0.0 {
                    return 1.0;
                }
                let alpha = alpha.min(1.0);
                let edge = 0.5 * alpha;
                if x < edge {
                    0.5 * (1.0 - (PI * x / edge).cos())
                } else if x > 1.0 - edge {
                    0.5 * (1.0 - (PI * (1.0 - x) / edge).cos())
                } else {
                    1.0
                }
            }
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Window::Hann => f.write_str("hann"),
            Window::Rectangular => f.write_str("rectangular"),
            Window::Tukey { alpha } => write!(f, "tukey:{alpha}"),
        }
    }
}

impl FromStr for Window {
    type Err = Error;

    /// `hann`, `rectangular` (or `none`), `tukey` or `tukey:<alpha>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "hann" => Ok(Window::Hann),
            "rectangular" | "none" => Ok(Window::Rectangular),
            "tukey" => Ok(Window::Tukey { alpha: 0.5 }),
            other => {
                let alpha = other
                    .strip_prefix("tukey:")
                    .and_then(|a| a.parse::<f64>().ok())
                    .filter(|a| (0.0..=1.0).contains(a))
                    .ok_or_else(|| Error::invalid("window", format!("unknown taper `{other}`")))?;
                Ok(Window::Tukey { alpha })
            }
        }
    }
}

/// Uniformly sampled, tapered motion. Zero outside the record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledMotion {
    pub t0: f64,
    pub dt: f64,
    /// Samples with the taper already applied.
    pub q: Vec<f64>,
    pub window: Window,
}

pub const MIN_SAMPLES: usize = 8;
pub const MAX_ORDER: usize = 5;
pub const MAX_SAMPLED_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Trajectory {
    /// `q0 exp(-t^2 / 2 tau^2)`
    GaussianPulse {
        q0: f64,
        tau: f64,
    },
    /// `q0 cos(omega0 t) exp(-t^2 / 2 tau^2)`
    EnvelopedHarmonic {
        q0: f64,
        omega0: f64,
        tau: f64,
    },
    Sampled(SampledMotion),
}

impl Trajectory {
    pub fn gaussian_pulse(q0: f64, tau: f64) -> Result<Self> {
        check_finite("q0", q0)?;
        check_positive("tau", tau)?;
        Ok(Trajectory::GaussianPulse { q0, tau })
    }

    pub fn enveloped_harmonic(q0: f64, omega0: f64, tau: f64) -> Result<Self> {
        check_finite("q0", q0)?;
        check_finite("omega0", omega0)?;
        if omega0 < 0.0 {
            return Err(Error::invalid("omega0", "must be non-negative"));
        }
        check_positive("tau", tau)?;
        Ok(Trajectory::EnvelopedHarmonic { q0, omega0, tau })
    }

    /// Builds sampled motion from a uniform grid; the taper is applied here.
    pub fn sampled(t: &[f64], q: &[f64], window: Window) -> Result<Self> {
        if t.len() != q.len() {
            return Err(Error::invalid("q", "time and position columns differ in length"));
        }
        if t.len() < MIN_SAMPLES {
            return Err(Error::invalid(
                "t",
                format!("need at least {MIN_SAMPLES} samples, got {}", t.len()),
            ));
        }
        if t.iter().chain(q).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sampled trajectory"));
        }
        let n = t.len();
        let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
        if !(dt > 0.0) {
            return Err(Error::invalid("t", "time grid must be increasing"));
        }
        for (j, tj) in t.iter().enumerate() {
            let expected = t[0] + j as f64 * dt;
            if (tj - expected).abs() > 1e-6 * dt {
                return Err(Error::invalid("t", format!("grid is not uniform at sample {j}")));
            }
        }
        let q = q.iter().enumerate().map(|(j, v)| v * window.weight(j, n)).collect();
        Ok(Trajectory::Sampled(SampledMotion {
            t0: t[0],
            dt,
            q,
            window,
        }))
    }

    /// Reads a two-column CSV with header (`t_seconds`, `q_centimeters`).
    pub fn from_csv(path: impl AsRef<Path>, window: Window) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, window)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, window: Window) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || headers.iter().any(|h| h.parse::<f64>().is_ok()) {
            return Err(Error::invalid("csv", "expected a header row `t_seconds,q_centimeters`"));
        }
        let mut t = Vec::new();
        let mut q = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid("csv", format!("bad number on data row {}", line + 1)))
            };
            t.push(parse(0)?);
            q.push(parse(1)?);
        }
        Self::sampled(&t, &q, window)
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, Trajectory::Sampled(_))
    }

    /// Bound `l` with `|q(t)| <= l` for all `t`.
    pub fn bound(&self) -> f64 {
        match self {
            Trajectory::GaussianPulse { q0, .. } | Trajectory::EnvelopedHarmonic { q0, .. } => q0.abs(),
            Trajectory::Sampled(s) => s.q.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        }
    }

    /// Carrier frequency when the motion has one.
    pub fn dominant_frequency(&self) -> Option<f64> {
        match self {
            Trajectory::EnvelopedHarmonic { omega0, .. } => Some(*omega0),
            _ => None,
        }
    }

    /// Same motion with amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Trajectory::GaussianPulse { q0, tau } => Trajectory::GaussianPulse {
                q0: q0 * factor,
                tau: *tau,
            },
            Trajectory::EnvelopedHarmonic { q0, omega0, tau } => Trajectory::EnvelopedHarmonic {
                q0: q0 * factor,
                omega0: *omega0,
                tau: *tau,
            },
            Trajectory::Sampled(s) => Trajectory::Sampled(SampledMotion {
                q: s.q.iter().map(|v| v * factor).collect(),
                ..s.clone()
            }),
        }
    }

    pub fn fourier_transform(&self, omega: f64) -> Result<Complex64> {
        if !omega.is_finite() {
            return Err(Error::NonFinite("fourier_transform"));
        }
        Ok(match self {
            Trajectory::GaussianPulse { q0, tau } => {
                Complex64::new(q0 * tau * (2.0 * PI).sqrt() * (-0.5 * (omega * tau).powi(2)).exp(), 0.0)
            }
            Trajectory::EnvelopedHarmonic { q0, omega0, tau } => {
                let amp = 0.5 * q0 * tau * (2.0 * PI).sqrt();
                let lo = (-0.5 * (tau * (omega - omega0)).powi(2)).exp();
                let hi = (-0.5 * (tau * (omega + omega0)).powi(2)).exp();
                Complex64::new(amp * (lo + hi), 0.0)
            }
            Trajectory::Sampled(s) => s.transform(omega),
        })
    }

    /// `|q~(w)|^2`.
    pub fn power(&self, omega: f64) -> Result<f64> {
        Ok(self.fourier_transform(omega)?.norm_sqr())
    }

    /// `d^n q / dt^n` at `t`.
    pub fn derivative(&self, order: usize, t: f64) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(Error::invalid("order", format!("at most {MAX_ORDER}")));
        }
        if !t.is_finite() {
            return Err(Error::NonFinite("derivative"));
        }
        match self {
            Trajectory::GaussianPulse { q0, tau } => Ok(q0 * gaussian_derivative(order, t, *tau)),
            Trajectory::EnvelopedHarmonic { q0, omega0, tau } => {
                let mut sum = 0.0;
                let phase = omega0 * t;
                for k in 0..=order {
                    let carrier = omega0.powi(k as i32)
                        * match k % 4 {
                            0 => phase.cos(),
                            1 => -phase.sin(),
                            2 => -phase.cos(),
                            _ => phase.sin(),
                        };
                    sum += binomial(order, k) * carrier * gaussian_derivative(order - k, t, *tau);
                }
                Ok(q0 * sum)
            }
            Trajectory::Sampled(s) => {
                if order > MAX_SAMPLED_ORDER {
                    return Err(Error::invalid(
                        "order",
                        format!("sampled motion supports derivatives up to order {MAX_SAMPLED_ORDER}"),
                    ));
                }
                Ok(s.derivative(order, t))
            }
        }
    }

    /// `I_n = int dt [q^(n)(t)]^2`.
    pub fn derivative_energy(&self, order: usize) -> Result<f64> {
        if order > MAX_ORDER {
            return Err(Error::invalid("order", format!("at most {MAX_ORDER}")));
        }
        match self {
            Trajectory::GaussianPulse { q0, tau } => {
                let n = order as i32;
                Ok(q0 * q0 * half_integer_gamma(order) * tau.powi(1 - 2 * n))
            }
            Trajectory::EnvelopedHarmonic { q0, omega0, tau } => {
                // Parseval with |q~|^2 = A^2 [G(w - w0) + G(w + w0) + 2 exp(-tau^2 w0^2) G(w)],
                // G(x) = exp(-tau^2 x^2): moments of a normal with variance 1/(2 tau^2).
                let amp2 = 0.5 * PI * (q0 * tau).powi(2);
                let var = 0.5 / (tau * tau);
                let m = 2 * order;
                let shifted = normal_moment(m, *omega0, var);
                let centered = normal_moment(m, 0.0, var);
                let cross = (-(tau * omega0).powi(2)).exp();
                Ok(amp2 / (2.0 * PI) * (PI.sqrt() / tau) * (2.0 * shifted + 2.0 * cross * centered))
            }
            Trajectory::Sampled(s) => {
                if order > MAX_SAMPLED_ORDER {
                    return Err(Error::invalid(
                        "order",
                        format!("sampled motion supports derivatives up to order {MAX_SAMPLED_ORDER}"),
                    ));
                }
                Ok(s.derivative_energy(order))
            }
        }
    }

    /// `int dt [q'''(t)]^2`, the `int da/dt^2 dt` of the small-correlation
    /// energy formula with `a = q''`.
    pub fn jerk_energy(&self) -> Result<f64> {
        self.derivative_energy(3)
    }

    /// Frequency beyond which `|q~|^2` is negligible (below ~1e-40 of peak
    /// for the analytic families, Nyquist for sampled motion).
    pub fn spectral_support(&self) -> f64 {
        match self {
            Trajectory::GaussianPulse { tau, .. } => 10.0 / tau,
            Trajectory::EnvelopedHarmonic { omega0, tau, .. } => omega0 + 10.0 / tau,
            Trajectory::Sampled(s) => PI / s.dt,
        }
    }

    /// Partition of `[0, spectral_support]` resolving every spectral feature.
    pub fn spectral_seeds(&self) -> Vec<f64> {
        let top = self.spectral_support();
        let mut seeds: Vec<f64> = (0..=32).map(|i| top * i as f64 / 32.0).collect();
        if let Trajectory::EnvelopedHarmonic { omega0, tau, .. } = self {
            seeds.extend(
                (-10..=10)
                    .map(|j| omega0 + j as f64 / tau)
                    .filter(|w| *w > 0.0 && *w < top),
            );
        }
        seeds.sort_by(f64::total_cmp);
        seeds.dedup();
        seeds
    }

    /// Time interval outside which the motion is negligible.
    pub fn time_support(&self) -> (f64, f64) {
        match self {
            Trajectory::GaussianPulse { tau, .. } | Trajectory::EnvelopedHarmonic { tau, .. } => {
                (-14.0 * tau, 14.0 * tau)
            }
            Trajectory::Sampled(s) => (s.t0, s.t0 + (s.q.len() - 1) as f64 * s.dt),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Trajectory::GaussianPulse { q0, tau } => format!("gaussian_pulse(q0={q0:e} cm, tau={tau:e} s)"),
            Trajectory::EnvelopedHarmonic { q0, omega0, tau } => {
                format!("enveloped_harmonic(q0={q0:e} cm, omega0={omega0:e} rad/s, tau={tau:e} s)")
            }
            Trajectory::Sampled(s) => format!(
                "sampled(n={}, t0={:e} s, dt={:e} s, window={})",
                s.q.len(),
                s.t0,
                s.dt,
                s.window
            ),
        }
    }
}

impl SampledMotion {
    fn sample(&self, i: i64) -> f64 {
        if i < 0 || i as usize >= self.q.len() {
            0.0
        } else {
            self.q[i as usize]
        }
    }

    /// Discrete transform, band-limited to the Nyquist frequency; the
    /// periodic images beyond it are aliases, not signal.
    fn transform(&self, omega: f64) -> Complex64 {
        if omega.abs() > PI / self.dt {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.q.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in self.q.iter().enumerate() {
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            let (s, c) = (omega * (self.t0 + j as f64 * self.dt)).sin_cos();
            acc += Complex64::new(c, s) * (w * v);
        }
        acc * self.dt
    }

    /// Second-order central stencil at grid node `i`.
    fn node_derivative(&self, order: usize, i: i64) -> f64 {
        let h = self.dt;
        let q = |k: i64| self.sample(i + k);
        match order {
            0 => q(0),
            1 => (q(1) - q(-1)) / (2.0 * h),
            2 => (q(1) - 2.0 * q(0) + q(-1)) / (h * h),
            _ => (q(2) - 2.0 * q(1) + 2.0 * q(-1) - q(-2)) / (2.0 * h * h * h),
        }
    }

    fn derivative(&self, order: usize, t: f64) -> f64 {
        let x = (t - self.t0) / self.dt;
        let i = x.floor();
        let frac = x - i;
        let i = i as i64;
        let lo = self.node_derivative(order, i);
        let hi = self.node_derivative(order, i + 1);
        lo + frac * (hi - lo)
    }

    fn derivative_energy(&self, order: usize) -> f64 {
        let n = self.q.len() as i64;
        (-2..n + 2).map(|i| self.node_derivative(order, i).powi(2)).sum::<f64>() * self.dt
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be finite"))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be positive and finite"))
    }
}

/// `d^n/dt^n exp(-t^2 / 2 tau^2) = (-1/tau)^n He_n(t/tau) exp(-t^2 / 2 tau^2)`.
fn gaussian_derivative(order: usize, t: f64, tau: f64) -> f64 {
    let u = t / tau;
    let sign = if order.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * hermite_he(order, u) * tau.powi(-(order as i32)) * (-0.5 * u * u).exp()
}

/// Probabilists' Hermite polynomial.
fn hermite_he(n: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn double_factorial_odd(m: usize) -> f64 {
    // (m - 1)!! for even m, i.e. 1 * 3 * ... * (m - 1)
    (1..m).step_by(2).map(|v| v as f64).product()
}

/// `Gamma(n + 1/2) = (2n - 1)!! sqrt(pi) / 2^n`.
fn half_integer_gamma(n: usize) -> f64 {
    double_factorial_odd(2 * n) * PI.sqrt() / 2f64.powi(n as i32)
}

/// `E[X^m]` for `X ~ N(mean, var)`.
fn normal_moment(m: usize, mean: f64, var: f64) -> f64 {
    (0..=m)
        .step_by(2)
        .map(|j| binomial(m, j) * mean.powi((m - j) as i32) * var.powi((j / 2) as i32) * double_factorial_odd(j))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_with_breaks, QuadOptions};

    fn pulse() -> Trajectory {
        Trajectory::gaussian_pulse(1.0, 1.0).unwrap()
    }

    fn harmonic() -> Trajectory {
        Trajectory::enveloped_harmonic(0.7, 3.0, 1.3).unwrap()
    }

    #[test]
    fn gaussian_transform_at_zero() {
        let v = pulse().fourier_transform(0.0).unwrap();
        assert!((v.re - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn gaussian_transform_real_even() {
        let p = pulse();
        for w in [0.3, 1.1, 2.5] {
            let a = p.fourier_transform(w).unwrap();
            let b = p.fourier_transform(-w).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn harmonic_transform_matches_time_integral() {
        // Direct quadrature of int cos(w t) q(t) dt (q even, so no sine part).
        let h = harmonic();
        let o = QuadOptions::default().with_rel_tol(1e-12).with_abs_tol(1e-13);
        for w in [0.0, 2.0, 3.0, 4.5] {
            let direct = integrate(|t| (w * t).cos() * h.derivative(0, t).unwrap(), -20.0, 20.0, &o)
                .unwrap()
                .value;
            let closed = h.fourier_transform(w).unwrap().re;
            assert!((direct - closed).abs() < 1e-10, "w = {w}: {direct} vs {closed}");
        }
    }

    #[test]
    fn gaussian_second_derivative_at_origin() {
        let p = Trajectory::gaussian_pulse(2.0, 0.5).unwrap();
        assert!((p.derivative(2, 0.0).unwrap() + 2.0 / 0.25).abs() < 1e-12);
        assert_eq!(p.derivative(5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn order_zero_is_position() {
        let p = pulse();
        for t in [-1.0, 0.0, 0.4, 2.0] {
            assert_eq!(p.derivative(0, t).unwrap(), (-0.5 * t * t).exp());
        }
        let h = harmonic();
        let t = 0.37;
        assert!(
            (h.derivative(0, t).unwrap() - 0.7 * (3.0 * t).cos() * (-0.5 * (t / 1.3f64).powi(2)).exp()).abs() < 1e-15
        );
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let step = 1e-4;
        for traj in [pulse(), harmonic()] {
            for order in 1..=MAX_ORDER {
                for t in [-1.3, -0.2, 0.5, 1.7] {
                    let fd = (traj.derivative(order - 1, t + step).unwrap()
                        - traj.derivative(order - 1, t - step).unwrap())
                        / (2.0 * step);
                    let exact = traj.derivative(order, t).unwrap();
                    let scale = 1.0 + exact.abs();
                    assert!(
                        (fd - exact).abs() < 1e-6 * scale,
                        "order {order} t {t}: {fd} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn derivative_energy_unit_pulse() {
        assert!((pulse().derivative_energy(0).unwrap() - PI.sqrt()).abs() < 1e-14);
        let zero = Trajectory::gaussian_pulse(0.0, 1.0).unwrap();
        assert_eq!(zero.jerk_energy().unwrap(), 0.0);
    }

    #[test]
    fn derivative_energy_matches_time_quadrature() {
        let o = QuadOptions::default().with_rel_tol(1e-13);
        for traj in [pulse(), harmonic()] {
            for n in 0..=MAX_ORDER {
                let (lo, hi) = traj.time_support();
                let breaks: Vec<f64> = (0..=28).map(|i| lo + (hi - lo) * i as f64 / 28.0).collect();
                let direct = integrate_with_breaks(|t| traj.derivative(n, t).unwrap().powi(2), &breaks, &o)
                    .unwrap()
                    .value;
                let closed = traj.derivative_energy(n).unwrap();
                assert!((direct / closed - 1.0).abs() < 1e-10, "n = {n}: {direct} vs {closed}");
            }
        }
    }

    #[test]
    fn derivative_energy_matches_parseval() {
        let o = QuadOptions::default().with_rel_tol(1e-13);
        for traj in [pulse(), harmonic()] {
            for n in 0..=MAX_ORDER {
                let seeds = traj.spectral_seeds();
                let mut breaks: Vec<f64> = seeds.iter().rev().map(|w| -w).collect();
                breaks.extend(seeds.iter().skip(1));
                let spectral = integrate_with_breaks(|w| w.powi(2 * n as i32) * traj.power(w).unwrap(), &breaks, &o)
                    .unwrap()
                    .value
                    / (2.0 * PI);
                let closed = traj.derivative_energy(n).unwrap();
                assert!((spectral / closed - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bounded() {
        for traj in [pulse(), harmonic()] {
            let l = traj.bound();
            for i in -400..400 {
                let t = i as f64 * 0.013;
                assert!(traj.derivative(0, t).unwrap().abs() <= l);
            }
        }
    }

    fn sampled_pulse(window: Window) -> Trajectory {
        let n = 161;
        let t: Vec<f64> = (0..n).map(|i| -20.0 + 40.0 * i as f64 / (n - 1) as f64).collect();
        let q: Vec<f64> = t.iter().map(|t| (-0.5 * t * t).exp()).collect();
        Trajectory::sampled(&t, &q, window).unwrap()
    }

    #[test]
    fn sampled_reproduces_analytic_transform() {
        let s = sampled_pulse(Window::Tukey { alpha: 0.25 });
        let a = pulse();
        let peak = a.power(0.0).unwrap().sqrt();
        let mut w = 0.0;
        while a.power(w).unwrap().sqrt() > 1e-6 * peak {
            let exact = a.fourier_transform(w).unwrap();
            let got = s.fourier_transform(w).unwrap();
            assert!((got - exact).norm() / exact.norm() < 1e-6, "w = {w}");
            w += 0.05;
        }
    }

    #[test]
    fn sampled_transform_is_band_limited() {
        let s = sampled_pulse(Window::Hann);
        let nyquist = s.spectral_support();
        assert!(s.power(0.999 * nyquist).unwrap() < 1e-20);
        assert_eq!(s.power(1.001 * nyquist).unwrap(), 0.0);
        assert_eq!(s.power(2.0 * nyquist).unwrap(), 0.0);
    }

    #[test]
    fn hermitian_symmetry() {
        let t: Vec<f64> = (0..64).map(|i| 0.1 * i as f64).collect();
        let q: Vec<f64> = t.iter().map(|t| (1.3 * t).sin() * (t - 3.0)).collect();
        let s = Trajectory::sampled(&t, &q, Window::Hann).unwrap();
        for traj in [s, pulse(), harmonic()] {
            for w in [0.2, 1.0, 7.5] {
                let a = traj.fourier_transform(w).unwrap();
                let b = traj.fourier_transform(-w).unwrap();
                assert!((a - b.conj()).norm() <= 1e-12 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn sampled_derivatives_limited() {
        let s = sampled_pulse(Window::Rectangular);
        assert!(s.derivative(4, 0.0).is_err());
        assert!(s.derivative_energy(5).is_err());
        let d2 = s.derivative(2, 0.0).unwrap();
        // Second-order stencil error h^2/12 q'''' ~ 0.016 at h = 0.25.
        assert!((d2 + 1.0).abs() < 0.02, "{d2}");
        let i1 = s.derivative_energy(1).unwrap();
        // Central-difference response sin(wh)/h loses ~h^2 <w^4>/(3 <w^2>) = 6%.
        let ratio = i1 / pulse().derivative_energy(1).unwrap();
        assert!(ratio < 1.0 && ratio > 0.92, "{ratio}");
    }

    #[test]
    fn sampled_validation() {
        let t: Vec<f64> = (0..7).map(|i| i as f64).collect();
        assert!(Trajectory::sampled(&t, &t, Window::Hann).is_err());
        let mut t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        t[4] = 4.3;
        assert!(Trajectory::sampled(&t, &t, Window::Hann).is_err());
    }

    #[test]
    fn csv_ingestion() {
        let mut text = String::from("t_seconds,q_centimeters\n");
        for i in 0..16 {
            text.push_str(&format!("{},{}\n", i as f64 * 0.5, (i as f64).sin()));
        }
        let traj = Trajectory::read_csv(text.as_bytes(), Window::Rectangular).unwrap();
        match traj {
            Trajectory::Sampled(s) => {
                assert_eq!(s.q.len(), 16);
                assert_eq!(s.dt, 0.5);
            }
            _ => unreachable!(),
        }
        let headless = "0,1\n1,2\n";
        assert!(Trajectory::read_csv(headless.as_bytes(), Window::Hann).is_err());
    }

    #[test]
    fn window_parsing() {
        assert_eq!("hann".parse::<Window>().unwrap(), Window::Hann);
        assert_eq!("tukey:0.25".parse::<Window>().unwrap(), Window::Tukey { alpha: 0.25 });
        assert!("blackman".parse::<Window>().is_err());
        assert_eq!(Window::Hann.weight(0, 9), 0.0);
        assert!((Window::Hann.weight(4, 9) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert!(Trajectory::gaussian_pulse(1.0, 0.0).is_err());
        assert!(Trajectory::enveloped_harmonic(1.0, -1.0, 1.0).is_err());
        assert!(pulse().derivative(6, 0.0).is_err());
    }
}
