//! Autocorrelation spectra `Omega~(k)` of the dipole layer.
//!
//! Models are isotropic and non-negative. `image_factor` multiplies the
//! spectrum by 4: a layer in front of a grounded conductor has its dipole
//! density doubled by the image layer.

use std::f64::consts::PI;
use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::ensemble::PatchField;
use crate::error::{Error, Result};

const IMAGE_MULTIPLIER: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationShape {
    /// `(pi/8) V_rms^2 l^2 exp(-k^2 l^2 / 16)`
    GaussianQuasilocal {
        v_rms: f64,
        ell: f64,
    },
    /// `4 pi V_rms^2 / (k_max^2 - k_min^2)` on `k_min <= k <= k_max`.
    SharpCutoff {
        v_rms: f64,
        k_min: f64,
        k_max: f64,
    },
    Tabulated(TabulatedSpectrum),
    Constant {
        omega0: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    pub shape: CorrelationShape,
    #[serde(default)]
    pub image_factor: bool,
}

impl CorrelationModel {
    pub fn gaussian(v_rms: f64, ell: f64) -> Result<Self> {
        non_negative("v_rms", v_rms)?;
        non_negative("ell", ell)?;
        Ok(Self::bare(CorrelationShape::GaussianQuasilocal { v_rms, ell }))
    }

    pub fn sharp_cutoff(v_rms: f64, k_min: f64, k_max: f64) -> Result<Self> {
        non_negative("v_rms", v_rms)?;
        non_negative("k_min", k_min)?;
        non_negative("k_max", k_max)?;
        if k_min >= k_max {
            return Err(Error::invalid("k_min", "must be strictly below k_max"));
        }
        Ok(Self::bare(CorrelationShape::SharpCutoff { v_rms, k_min, k_max }))
    }

    pub fn constant(omega0: f64) -> Result<Self> {
        non_negative("omega0", omega0)?;
        Ok(Self::bare(CorrelationShape::Constant { omega0 }))
    }

    pub fn tabulated(k: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Ok(Self::bare(CorrelationShape::Tabulated(TabulatedSpectrum::new(
            k, values,
        )?)))
    }

    fn bare(shape: CorrelationShape) -> Self {
        CorrelationModel {
            shape,
            image_factor: false,
        }
    }

    pub fn with_image(mut self, image_factor: bool) -> Self {
        self.image_factor = image_factor;
        self
    }

    pub fn multiplier(&self) -> f64 {
        if self.image_factor {
            IMAGE_MULTIPLIER
        } else {
            1.0
        }
    }

    /// `Omega~(k)` in erg cm, including the image factor when set.
    pub fn omega_tilde(&self, k: f64) -> Result<f64> {
        if k.is_nan() {
            return Err(Error::NonFinite("omega_tilde"));
        }
        if k < 0.0 {
            return Err(Error::invalid("k", "wavenumber must be non-negative"));
        }
        Ok(self.multiplier() * self.bare_value(k))
    }

    fn bare_value(&self, k: f64) -> f64 {
        match &self.shape {
            CorrelationShape::GaussianQuasilocal { v_rms, ell } => {
                PI / 8.0 * (v_rms * ell).powi(2) * (-(k * ell).powi(2) / 16.0).exp()
            }
            CorrelationShape::SharpCutoff { v_rms, k_min, k_max } => {
                if k >= *k_min && k <= *k_max {
                    4.0 * PI * v_rms * v_rms / (k_max * k_max - k_min * k_min)
                } else {
                    0.0
                }
            }
            CorrelationShape::Tabulated(t) => t.eval(k),
            CorrelationShape::Constant { omega0 } => *omega0,
        }
    }

    /// Wavenumbers where the spectrum is not smooth, or where a narrow
    /// Gaussian decays, so quadrature resolves it inside a wide light cone.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            CorrelationShape::GaussianQuasilocal { ell, .. } if *ell > 0.0 => {
                [0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|m| m * 4.0 / ell).collect()
            }
            CorrelationShape::SharpCutoff { k_min, k_max, .. } => vec![*k_min, *k_max],
            CorrelationShape::Tabulated(t) => t.k.clone(),
            _ => Vec::new(),
        }
    }

    /// Below this wavenumber the spectrum vanishes identically.
    pub fn support_start(&self) -> f64 {
        match &self.shape {
            CorrelationShape::SharpCutoff { k_min, .. } => *k_min,
            _ => 0.0,
        }
    }

    /// True when `Omega~` vanishes at every `k`.
    pub fn is_zero(&self) -> bool {
        match &self.shape {
            CorrelationShape::GaussianQuasilocal { v_rms, ell } => *v_rms == 0.0 || *ell == 0.0,
            CorrelationShape::SharpCutoff { v_rms, .. } => *v_rms == 0.0,
            CorrelationShape::Tabulated(t) => t.values.iter().all(|v| *v == 0.0),
            CorrelationShape::Constant { omega0 } => *omega0 == 0.0,
        }
    }

    pub fn descriptor(&self) -> String {
        let body = match &self.shape {
            CorrelationShape::GaussianQuasilocal { v_rms, ell } => {
                format!("gaussian_quasilocal(v_rms={v_rms:e} statvolt, ell={ell:e} cm)")
            }
            CorrelationShape::SharpCutoff { v_rms, k_min, k_max } => {
                format!("sharp_cutoff(v_rms={v_rms:e} statvolt, k_min={k_min:e} 1/cm, k_max={k_max:e} 1/cm)")
            }
            CorrelationShape::Tabulated(t) => format!("tabulated({} nodes)", t.k.len()),
            CorrelationShape::Constant { omega0 } => format!("constant(omega0={omega0:e} erg cm)"),
        };
        format!("{body}, image_factor={}", self.image_factor)
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, "must be finite and non-negative"))
    }
}

/// Monotone-cubic (Fritsch-Carlson) interpolant through `(k, values)`.
///
/// Flat below the first node, zero above the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedSpectrum {
    pub k: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
}

impl TabulatedSpectrum {
    pub fn new(k: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if k.len() != values.len() {
            return Err(Error::invalid("values", "length differs from k grid"));
        }
        if k.len() < 2 {
            return Err(Error::invalid("k", "need at least two nodes"));
        }
        if k.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("tabulated spectrum"));
        }
        if k[0] < 0.0 || k.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("k", "must be non-negative and strictly increasing"));
        }
        if values.iter().any(|v| *v < 0.0) {
            return Err(Error::invalid("values", "spectrum must be non-negative"));
        }
        let slopes = pchip_slopes(&k, &values);
        Ok(TabulatedSpectrum { k, values, slopes })
    }

    pub fn eval(&self, k: f64) -> f64 {
        let n = self.k.len();
        if k <= self.k[0] {
            return self.values[0];
        }
        if k > self.k[n - 1] {
            return 0.0;
        }
        // slopes are skipped by serde; rebuild lazily if absent
        let slopes;
        let d = if self.slopes.len() == n {
            &self.slopes
        } else {
            slopes = pchip_slopes(&self.k, &self.values);
            &slopes
        };
        let i = self.k.partition_point(|&x| x < k).clamp(1, n - 1) - 1;
        let h = self.k[i + 1] - self.k[i];
        let t = (k - self.k[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.values[i] + h10 * h * d[i] + h01 * self.values[i + 1] + h11 * h * d[i + 1];
        v.max(0.0)
    }

    /// Two-column CSV: `k_per_cm,omega_tilde_erg_cm`.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k_per_cm", "omega_tilde_erg_cm"])?;
        for (k, v) in self.k.iter().zip(&self.values) {
            w.write_record([format!("{k:.16e}"), format!("{v:.16e}")])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k_per_cm", "omega_tilde_erg_cm"] {
            return Err(Error::invalid("csv", "expected header `k_per_cm,omega_tilde_erg_cm`"));
        }
        let mut k = Vec::new();
        let mut values = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let num = |i: usize| {
                record
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| Error::invalid("csv", "malformed number"))
            };
            k.push(num(0)?);
            values.push(num(1)?);
        }
        Self::new(k, values)
    }

    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file)
    }
}

fn pchip_slopes(k: &[f64], v: &[f64]) -> Vec<f64> {
    let n = k.len();
    let h: Vec<f64> = k.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (v[i + 1] - v[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d
}

/// Temporal factor `g(w)` of a separable `Omega~(k, w) = Omega~(k) g(w)`,
/// normalised to `int dw/2pi g = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemporalProfile {
    /// `g = 2 pi delta(w)`; downstream code uses the static spectrum.
    Instantaneous,
    /// `g = 2 gamma / (w^2 + gamma^2)`
    Lorentzian { gamma: f64 },
}

impl TemporalProfile {
    /// Density value, `None` for the instantaneous delta.
    pub fn density(&self, omega: f64) -> Option<f64> {
        match *self {
            TemporalProfile::Instantaneous => None,
            TemporalProfile::Lorentzian { gamma } => Some(2.0 * gamma / (omega * omega + gamma * gamma)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeCorrelationModel {
    pub spatial: CorrelationModel,
    pub temporal: TemporalProfile,
}

/// `Omega~(k, w)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeCorrelationValue {
    /// `weight * 2 pi delta(w)`
    Delta {
        weight: f64,
    },
    Density(f64),
}

impl TimeCorrelationModel {
    pub fn new(spatial: CorrelationModel, temporal: TemporalProfile) -> Result<Self> {
        if let TemporalProfile::Lorentzian { gamma } = temporal {
            if !(gamma > 0.0 && gamma.is_finite()) {
                return Err(Error::invalid("gamma", "must be positive and finite"));
            }
        }
        Ok(TimeCorrelationModel { spatial, temporal })
    }

    pub fn omega_tilde_time(&self, k: f64, omega: f64) -> Result<TimeCorrelationValue> {
        let spatial = self.spatial.omega_tilde(k)?;
        Ok(match self.temporal.density(omega) {
            None => TimeCorrelationValue::Delta { weight: spatial },
            Some(g) => TimeCorrelationValue::Density(spatial * g),
        })
    }
}

/// Radially binned empirical spectrum of a patch field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    /// `|D~(0)|^2 / L^2`, excluded from the bins.
    pub zero_mode: f64,
    pub bins: Vec<RadialBin>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBin {
    /// Mean `|k|` of the modes in the bin, 1/cm.
    pub k: f64,
    /// Mean `|D~(k)|^2 / L^2` over the modes, erg cm.
    pub omega_tilde: f64,
    pub modes: usize,
}

impl RadialSpectrum {
    /// Tabulated model through the bin centres.
    pub fn to_model(&self) -> Result<CorrelationModel> {
        let k = self.bins.iter().map(|b| b.k).collect();
        let v = self.bins.iter().map(|b| b.omega_tilde).collect();
        CorrelationModel::tabulated(k, v)
    }
}

/// Signed frequency index of DFT bin `i` on an `n`-point grid.
pub(crate) fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Radial bin of mode `(i, j)`: nearest integer to the index radius.
/// Bins run 1..=n/2; corner modes beyond the Nyquist circle and the zero
/// mode return `None`.
pub(crate) fn radial_bin(i: usize, j: usize, n: usize) -> Option<(usize, f64)> {
    let (a, b) = (signed_index(i, n) as f64, signed_index(j, n) as f64);
    let r = (a * a + b * b).sqrt();
    let bin = r.round() as usize;
    (bin >= 1 && bin <= n / 2).then_some((bin, r))
}

/// 2-D forward DFT of a real `n x n` row-major grid.
pub(crate) fn fft2_forward(values: &[f64], n: usize) -> Vec<Complex<f64>> {
    let mut data: Vec<Complex<f64>> = values.iter().map(|v| Complex::new(*v, 0.0)).collect();
    fft2_in_place(&mut data, n, false);
    data
}

pub(crate) fn fft2_in_place(data: &mut [Complex<f64>], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    for row in data.chunks_exact_mut(n) {
        fft.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = data[r * n + c];
        }
        fft.process(&mut column);
        for r in 0..n {
            data[r * n + c] = column[r];
        }
    }
}

/// Radially averaged `|D~(k)|^2 / L^2`, with `D~ = cell^2 * DFT(D)`.
pub fn radial_spectrum(field: &PatchField) -> Result<RadialSpectrum> {
    let n = field.n;
    if n < 16 {
        return Err(Error::invalid("n", "grid must be at least 16 x 16"));
    }
    if field.values.len() != n * n {
        return Err(Error::invalid("values", "grid is not square"));
    }
    let area = field.side() * field.side();
    let cell2 = field.cell * field.cell;
    let spectrum = fft2_forward(&field.values, n);
    let dk = 2.0 * PI / field.side();

    let mut sum = vec![0.0; n / 2 + 1];
    let mut radius = vec![0.0; n / 2 + 1];
    let mut count = vec![0usize; n / 2 + 1];
    for i in 0..n {
        for j in 0..n {
            if let Some((bin, r)) = radial_bin(i, j, n) {
                let power = (spectrum[i * n + j] * cell2).norm_sqr() / area;
                sum[bin] += power;
                radius[bin] += r;
                count[bin] += 1;
            }
        }
    }
    let zero_mode = (spectrum[0] * cell2).norm_sqr() / area;
    let bins = (1..=n / 2)
        .filter(|&b| count[b] > 0)
        .map(|b| RadialBin {
            k: dk * radius[b] / count[b] as f64,
            omega_tilde: sum[b] / count[b] as f64,
            modes: count[b],
        })
        .collect();
    Ok(RadialSpectrum { zero_mode, bins })
}

/// Empirical tabulated model of a patch-field realization.
pub fn from_patch_field(field: &PatchField) -> Result<CorrelationModel> {
    radial_spectrum(field)?.to_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gaussian_at_origin() {
        let m = CorrelationModel::gaussian(2.0, 3.0).unwrap();
        assert!((m.omega_tilde(0.0).unwrap() - PI / 8.0 * 36.0).abs() < 1e-14);
    }

    #[test]
    fn sharp_cutoff_band() {
        let m = CorrelationModel::sharp_cutoff(1.5, 2.0, 5.0).unwrap();
        let inside = 4.0 * PI * 2.25 / 21.0;
        assert_eq!(m.omega_tilde(1.99).unwrap(), 0.0);
        assert_eq!(m.omega_tilde(5.01).unwrap(), 0.0);
        assert!((m.omega_tilde(3.0).unwrap() - inside).abs() < 1e-15);
    }

    #[test]
    fn invalid_models() {
        assert!(CorrelationModel::sharp_cutoff(1.0, 5.0, 2.0).is_err());
        assert!(CorrelationModel::sharp_cutoff(1.0, 2.0, 2.0).is_err());
        assert!(CorrelationModel::gaussian(-1.0, 1.0).is_err());
        let m = CorrelationModel::constant(1.0).unwrap();
        assert!(m.omega_tilde(-1.0).is_err());
        assert!(CorrelationModel::tabulated(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(CorrelationModel::tabulated(vec![1.0, 0.5], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn image_factor_is_four() {
        let models = [
            CorrelationModel::gaussian(1.0, 0.3).unwrap(),
            CorrelationModel::sharp_cutoff(1.0, 0.5, 4.0).unwrap(),
            CorrelationModel::constant(2.5).unwrap(),
            CorrelationModel::tabulated(vec![0.0, 1.0, 3.0], vec![2.0, 1.0, 0.5]).unwrap(),
        ];
        for m in models {
            let img = m.clone().with_image(true);
            for i in 0..60 {
                let k = i as f64 * 0.07;
                assert_eq!(img.omega_tilde(k).unwrap(), 4.0 * m.omega_tilde(k).unwrap());
            }
        }
    }

    #[test]
    fn gaussian_monotone_decreasing() {
        let m = CorrelationModel::gaussian(1.0, 2.0).unwrap();
        let mut prev = m.omega_tilde(0.0).unwrap();
        assert!(prev.is_finite());
        for i in 1..200 {
            let v = m.omega_tilde(i as f64 * 0.05).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn tabulated_csv_round_trip() {
        let t = TabulatedSpectrum::new(vec![0.5, 1.0, 2.0], vec![3.0, 1.0, 1e-30]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = TabulatedSpectrum::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn lorentzian_normalisation() {
        let g = TemporalProfile::Lorentzian { gamma: 0.5 };
        assert_eq!(g.density(0.0).unwrap(), 2.0 / 0.5);
        // int dw/2pi 2 gamma/(w^2+gamma^2) = 1, via w = gamma tan(phi).
        let n = 20000;
        let sum: f64 = (0..n)
            .map(|i| {
                let phi = -PI / 2.0 + PI * (i as f64 + 0.5) / n as f64;
                let w = 0.5 * phi.tan();
                g.density(w).unwrap() * 0.5 / phi.cos().powi(2)
            })
            .sum::<f64>()
            * (PI / n as f64)
            / (2.0 * PI);
        assert!((sum - 1.0).abs() < 1e-9);
        assert_eq!(TemporalProfile::Instantaneous.density(1.0), None);
    }

    #[test]
    fn instantaneous_is_symbolic() {
        let m = TimeCorrelationModel::new(CorrelationModel::constant(3.0).unwrap(), TemporalProfile::Instantaneous)
            .unwrap();
        assert_eq!(
            m.omega_tilde_time(1.0, 0.0).unwrap(),
            TimeCorrelationValue::Delta { weight: 3.0 }
        );
        assert!(TimeCorrelationModel::new(
            CorrelationModel::constant(3.0).unwrap(),
            TemporalProfile::Lorentzian { gamma: 0.0 }
        )
        .is_err());
    }

    #[test]
    fn nascent_delta() {
        // g_gamma * h -> 2 pi delta * h: int dnu/2pi g(nu) h(nu) -> h(0).
        let tau = 1.0;
        let gamma = 1e-3 / tau;
        let g = TemporalProfile::Lorentzian { gamma };
        let h = |w: f64| (-(w * tau).powi(2)).exp();
        let n = 200_000;
        let sum: f64 = (0..n)
            .map(|i| {
                let phi = -PI / 2.0 + PI * (i as f64 + 0.5) / n as f64;
                let w = gamma * phi.tan();
                g.density(w).unwrap() * h(w) * gamma / phi.cos().powi(2)
            })
            .sum::<f64>()
            * (PI / n as f64)
            / (2.0 * PI);
        assert!((sum - h(0.0)).abs() < 0.01);
    }

    proptest! {
        #[test]
        fn tabulated_exact_at_nodes_and_non_negative(
            raw in proptest::collection::vec((0.01f64..1.0, 0.0f64..5.0), 2..12),
            probe in 0.0f64..1.0,
        ) {
            let mut k = Vec::new();
            let mut acc = 0.0;
            for (dk, _) in &raw {
                acc += dk;
                k.push(acc);
            }
            let v: Vec<f64> = raw.iter().map(|(_, v)| *v).collect();
            let t = TabulatedSpectrum::new(k.clone(), v.clone()).unwrap();
            for (ki, vi) in k.iter().zip(&v) {
                prop_assert!((t.eval(*ki) - vi).abs() <= 1e-12 * (1.0 + vi));
            }
            let x = k[0] + probe * (k[k.len() - 1] - k[0]);
            let y = t.eval(x);
            prop_assert!(y >= 0.0);
            // monotone pieces stay within the bracketing node values
            let i = k.partition_point(|&kk| kk < x).clamp(1, k.len() - 1) - 1;
            let (lo, hi) = (v[i].min(v[i + 1]), v[i].max(v[i + 1]));
            prop_assert!(y >= lo - 1e-12 && y <= hi + 1e-12);
        }

        #[test]
        fn models_non_negative(v in 0.0f64..10.0, ell in 0.0f64..5.0, k in 0.0f64..100.0) {
            let g = CorrelationModel::gaussian(v, ell).unwrap();
            prop_assert!(g.omega_tilde(k).unwrap() >= 0.0);
            let s = CorrelationModel::sharp_cutoff(v, ell, ell + 1.0).unwrap();
            prop_assert!(s.omega_tilde(k).unwrap() >= 0.0);
        }
    }
}
