//! Strict JSON run configuration.
//!
//! Dimensioned fields accept either a bare number, taken in Gaussian-CGS
//! base units, or `{"value": x, "unit": "nm"}`. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::correlation::{CorrelationModel, TabulatedSpectrum, TemporalProfile, TimeCorrelationModel};
use crate::error::{Error, Result};
use crate::motion::{Trajectory, Window};
use crate::quad::QuadOptions;
use crate::spectrum::{self, Spacing, UnitColumns};
use crate::units::{self, Dimension};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Quantity {
    Bare(f64),
    Tagged(UnitValue),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitValue {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    /// Value in base units, checked against `dim`.
    pub fn resolve(&self, field: &str, dim: Dimension) -> Result<f64> {
        let v = match self {
            Quantity::Bare(v) => *v,
            Quantity::Tagged(UnitValue { value, unit }) => {
                let q = units::quantity(*value, unit).map_err(|e| e.context(field.to_string()))?;
                if q.dim != dim {
                    return Err(Error::invalid(
                        field,
                        format!("unit `{unit}` has dimension {}, expected {dim}", q.dim),
                    ));
                }
                q.value
            }
        };
        if !v.is_finite() {
            return Err(Error::invalid(field, "must be finite"));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    GaussianPulse {
        q0: Quantity,
        tau: Quantity,
    },
    EnvelopedHarmonic {
        q0: Quantity,
        omega0: Quantity,
        tau: Quantity,
    },
    /// Two-column CSV `t_seconds,q_centimeters`; relative paths resolve
    /// against the config file.
    Sampled {
        path: PathBuf,
        #[serde(default)]
        window: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationSpec {
    GaussianQuasilocal {
        v_rms: Quantity,
        ell: Quantity,
    },
    SharpCutoff {
        v_rms: Quantity,
        k_min: Quantity,
        k_max: Quantity,
    },
    /// `Omega~(0)` in erg cm.
    Constant {
        omega0: f64,
    },
    /// Two-column CSV `k_per_cm,omega_tilde_erg_cm`.
    Tabulated {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemporalSpec {
    Instantaneous,
    Lorentzian { gamma: Quantity },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaGridSpec {
    pub min: Quantity,
    pub max: Quantity,
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Log
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default)]
    pub rel_tol: Option<f64>,
    #[serde(default)]
    pub abs_tol: Option<f64>,
    #[serde(default)]
    pub max_evaluations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub ell_min: Quantity,
    pub ell_max: Quantity,
    #[serde(default = "default_sweep_count")]
    pub count: usize,
}

fn default_sweep_count() -> usize {
    25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub n: usize,
    pub cell: Quantity,
    pub realizations: usize,
    #[serde(default)]
    pub export_field: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiSpec {
    pub v_rms: Quantity,
    pub ell: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateSpec {
    #[serde(default)]
    pub ensemble_n: Option<usize>,
    #[serde(default)]
    pub ensemble_realizations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub trajectory: Option<TrajectorySpec>,
    #[serde(default)]
    pub correlation: Option<CorrelationSpec>,
    #[serde(default)]
    pub image_factor: bool,
    #[serde(default)]
    pub temporal: Option<TemporalSpec>,
    #[serde(default)]
    pub omega_grid: Option<OmegaGridSpec>,
    #[serde(default)]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub units: Option<UnitColumns>,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default)]
    pub xi: Option<XiSpec>,
    #[serde(default)]
    pub validate: Option<ValidateSpec>,
}

fn frequency() -> Dimension {
    Dimension::TIME.recip()
}

fn wavenumber() -> Dimension {
    Dimension::LENGTH.recip()
}

/// Prefixes the field named in a parameter error with its config section.
fn in_section(section: &'static str) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: format!("{section}.{field}"),
            reason,
        },
        other => other.context(section),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads and parses a config. Returns the config together with the
    /// directory its relative paths resolve against.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::parse(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_value(self).expect("config serializes");
        let bytes = serde_json::to_vec(&canonical).expect("value serializes");
        format!("{:x}", Sha256::digest(bytes))
    }

    pub fn trajectory(&self, base: &Path) -> Result<Trajectory> {
        let spec = self
            .trajectory
            .as_ref()
            .ok_or_else(|| Error::invalid("trajectory", "section is required"))?;
        let build = || -> Result<Trajectory> {
            match spec {
                TrajectorySpec::GaussianPulse { q0, tau } => Trajectory::gaussian_pulse(
                    q0.resolve("q0", Dimension::LENGTH)?,
                    tau.resolve("tau", Dimension::TIME)?,
                ),
                TrajectorySpec::EnvelopedHarmonic { q0, omega0, tau } => Trajectory::enveloped_harmonic(
                    q0.resolve("q0", Dimension::LENGTH)?,
                    omega0.resolve("omega0", frequency())?,
                    tau.resolve("tau", Dimension::TIME)?,
                ),
                TrajectorySpec::Sampled { path, window } => {
                    let window: Window = match window {
                        Some(w) => w.parse()?,
                        None => Window::default(),
                    };
                    Trajectory::from_csv(base.join(path), window)
                }
            }
        };
        build().map_err(in_section("trajectory"))
    }

    pub fn correlation(&self, base: &Path) -> Result<CorrelationModel> {
        let spec = self
            .correlation
            .as_ref()
            .ok_or_else(|| Error::invalid("correlation", "section is required"))?;
        let build = || -> Result<CorrelationModel> {
            match spec {
                CorrelationSpec::GaussianQuasilocal { v_rms, ell } => CorrelationModel::gaussian(
                    v_rms.resolve("v_rms", Dimension::POTENTIAL)?,
                    ell.resolve("ell", Dimension::LENGTH)?,
                ),
                CorrelationSpec::SharpCutoff { v_rms, k_min, k_max } => CorrelationModel::sharp_cutoff(
                    v_rms.resolve("v_rms", Dimension::POTENTIAL)?,
                    k_min.resolve("k_min", wavenumber())?,
                    k_max.resolve("k_max", wavenumber())?,
                ),
                CorrelationSpec::Constant { omega0 } => CorrelationModel::constant(*omega0),
                CorrelationSpec::Tabulated { path } => {
                    let t = TabulatedSpectrum::from_csv(base.join(path))?;
                    CorrelationModel::tabulated(t.k, t.values)
                }
            }
        };
        Ok(build()
            .map_err(in_section("correlation"))?
            .with_image(self.image_factor))
    }

    pub fn time_correlation(&self, base: &Path) -> Result<Option<TimeCorrelationModel>> {
        let temporal = match &self.temporal {
            None => return Ok(None),
            Some(TemporalSpec::Instantaneous) => TemporalProfile::Instantaneous,
            Some(TemporalSpec::Lorentzian { gamma }) => TemporalProfile::Lorentzian {
                gamma: gamma.resolve("gamma", frequency()).map_err(in_section("temporal"))?,
            },
        };
        TimeCorrelationModel::new(self.correlation(base)?, temporal)
            .map(Some)
            .map_err(in_section("temporal"))
    }

    pub fn omega_grid(&self) -> Result<Vec<f64>> {
        let g = self
            .omega_grid
            .as_ref()
            .ok_or_else(|| Error::invalid("omega_grid", "section is required"))?;
        let sec = in_section("omega_grid");
        let min = g.min.resolve("min", frequency()).map_err(&sec)?;
        let max = g.max.resolve("max", frequency()).map_err(&sec)?;
        spectrum::omega_grid(min, max, g.count, g.spacing)
    }

    /// Outer-integral tolerances, with an optional `--tol` override.
    pub fn quad_options(&self, rel_tol: Option<f64>) -> Result<QuadOptions> {
        let mut opts = QuadOptions::default();
        if let Some(t) = &self.tolerances {
            if let Some(v) = t.rel_tol {
                opts.rel_tol = v;
            }
            if let Some(v) = t.abs_tol {
                opts.abs_tol = v;
            }
            if let Some(v) = t.max_evaluations {
                opts.max_evaluations = v;
            }
        }
        if let Some(v) = rel_tol {
            opts.rel_tol = v;
        }
        if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) {
            return Err(Error::invalid("tolerances.rel_tol", "must lie in (0, 1)"));
        }
        if !(opts.abs_tol >= 0.0 && opts.abs_tol.is_finite()) {
            return Err(Error::invalid("tolerances.abs_tol", "must be finite and non-negative"));
        }
        if opts.max_evaluations < 15 {
            return Err(Error::invalid("tolerances.max_evaluations", "must be at least 15"));
        }
        Ok(opts)
    }

    /// `(l_min, l_max, count)` in cm.
    pub fn sweep(&self) -> Result<(f64, f64, usize)> {
        let s = self
            .sweep
            .as_ref()
            .ok_or_else(|| Error::invalid("sweep", "section is required"))?;
        let sec = in_section("sweep");
        let lo = s.ell_min.resolve("ell_min", Dimension::LENGTH).map_err(&sec)?;
        let hi = s.ell_max.resolve("ell_max", Dimension::LENGTH).map_err(&sec)?;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::invalid("sweep.ell_max", "need 0 < ell_min < ell_max"));
        }
        if s.count < 3 {
            return Err(Error::invalid("sweep.count", "need at least 3 points"));
        }
        Ok((lo, hi, s.count))
    }

    /// `(n, cell_cm, realizations, export_field)`.
    pub fn ensemble(&self) -> Result<(usize, f64, usize, bool)> {
        let e = self
            .ensemble
            .as_ref()
            .ok_or_else(|| Error::invalid("ensemble", "section is required"))?;
        let cell = e
            .cell
            .resolve("cell", Dimension::LENGTH)
            .map_err(in_section("ensemble"))?;
        if e.n < 16 || !e.n.is_power_of_two() {
            return Err(Error::invalid("ensemble.n", "must be a power of two, at least 16"));
        }
        if !(cell > 0.0) {
            return Err(Error::invalid("ensemble.cell", "must be positive"));
        }
        if e.realizations < 2 {
            return Err(Error::invalid("ensemble.realizations", "need at least 2"));
        }
        Ok((e.n, cell, e.realizations, e.export_field))
    }

    /// `(V_rms, l)` from the `xi` section, falling back to a Gaussian
    /// correlation model.
    pub fn xi(&self) -> Result<(f64, f64)> {
        if let Some(x) = &self.xi {
            let sec = in_section("xi");
            let v = x.v_rms.resolve("v_rms", Dimension::POTENTIAL).map_err(&sec)?;
            let ell = x.ell.resolve("ell", Dimension::LENGTH).map_err(&sec)?;
            if v < 0.0 || ell < 0.0 {
                return Err(Error::invalid("xi.v_rms", "v_rms and ell must be non-negative"));
            }
            return Ok((v, ell));
        }
        if let Some(CorrelationSpec::GaussianQuasilocal { v_rms, ell }) = &self.correlation {
            let sec = in_section("correlation");
            return Ok((
                v_rms.resolve("v_rms", Dimension::POTENTIAL).map_err(&sec)?,
                ell.resolve("ell", Dimension::LENGTH).map_err(&sec)?,
            ));
        }
        Err(Error::invalid(
            "xi",
            "section (or a gaussian_quasilocal correlation) is required",
        ))
    }

    /// `V_rms` for the length sweep: the Gaussian model's, else `xi.v_rms`.
    pub fn sweep_v_rms(&self) -> Result<f64> {
        match &self.correlation {
            Some(CorrelationSpec::GaussianQuasilocal { v_rms, .. }) => v_rms
                .resolve("v_rms", Dimension::POTENTIAL)
                .map_err(in_section("correlation")),
            _ => Err(Error::invalid(
                "correlation",
                "sweep needs a gaussian_quasilocal correlation (its ell is swept)",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities() {
        let cfg = RunConfig::parse(
            r#"{"trajectory": {"kind": "gaussian_pulse", "q0": {"value": 1, "unit": "nm"}, "tau": 1e-14},
                "correlation": {"kind": "sharp_cutoff", "v_rms": {"value": 0.04, "unit": "V"},
                                "k_min": {"value": 1, "unit": "1/m"}, "k_max": 1e3}}"#,
        )
        .unwrap();
        let t = cfg.trajectory(Path::new(".")).unwrap();
        assert_eq!(t, Trajectory::gaussian_pulse(1e-7, 1e-14).unwrap());
        let m = cfg.correlation(Path::new(".")).unwrap();
        match m.shape {
            crate::correlation::CorrelationShape::SharpCutoff { v_rms, k_min, .. } => {
                assert!((v_rms - 0.04 / 299.792458).abs() < 1e-18);
                assert!((k_min - 0.01).abs() < 1e-18);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rejects_unknown_keys_and_units() {
        assert!(RunConfig::parse(r#"{"bogus": 1}"#).is_err());
        assert!(RunConfig::parse(r#"{"xi": {"v_rms": {"value": 1, "unit": "V", "x": 0}, "ell": 1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"trajectory": {"kind": "gaussian_pulse", "q0": 1, "tau": 1, "x": 2}}"#).is_err());
        let cfg = RunConfig::parse(r#"{"xi": {"v_rms": {"value": 1, "unit": "furlong"}, "ell": 1}}"#).unwrap();
        assert!(matches!(cfg.xi().unwrap_err().root(), Error::UnknownUnit(_)));
    }

    #[test]
    fn wrong_dimension_named() {
        let cfg = RunConfig::parse(r#"{"xi": {"v_rms": {"value": 1, "unit": "nm"}, "ell": 1}}"#).unwrap();
        let err = cfg.xi().unwrap_err().to_string();
        assert!(err.contains("xi.v_rms"), "{err}");
    }

    #[test]
    fn inverted_band_names_field() {
        let cfg = RunConfig::parse(r#"{"correlation": {"kind": "sharp_cutoff", "v_rms": 1, "k_min": 5, "k_max": 2}}"#)
            .unwrap();
        let err = cfg.correlation(Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("correlation.k_min"), "{err}");
    }

    #[test]
    fn hash_is_stable() {
        let a = RunConfig::parse(r#"{"seed": 3, "image_factor": true}"#).unwrap();
        let b = RunConfig::parse(r#"{"image_factor": true, "seed": 3}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), RunConfig::default().hash());
    }
}
