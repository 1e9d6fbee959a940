//! `patchrad` command-line front end.
//!
//! Exit status: 0 success, 1 validation failure, 2 bad config or usage,
//! 3 numerical failure, 4 I/O failure. Errors are reported on stderr as a
//! single JSON object.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, ToleranceSpec};
use crate::ensemble;
use crate::error::{Error, Result};
use crate::spectrum::{self, fmt17, UnitColumns};
use crate::units::C;
use crate::validate::{self, Status, ValidationOptions};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "patchrad",
    version,
    about = "Radiation from a moving patch-potential dipole layer"
)]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Random seed, overriding the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative tolerance of the outer integrals, overriding the config.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Unit system of CSV columns.
    #[arg(long, global = true, value_enum)]
    pub units: Option<UnitsArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum UnitsArg {
    Si,
    Gauss,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral density P, kernel K and P/P_DCE on a frequency grid.
    Spectrum,
    /// Total radiated energy per unit area.
    Energy,
    /// Spectrum alongside the dynamical-Casimir spectrum of a perfect mirror.
    CompareDce,
    /// Classical-to-Casimir ratio xi in the small-correlation limit.
    Xi,
    /// Radiated energy versus correlation length, with its maximum.
    Sweep,
    /// Ensemble-averaged spectrum over synthesized patch fields.
    Ensemble,
    /// Runs every oracle cross-check and writes the validation report.
    Validate,
    /// Prints the config schema for a subcommand.
    Describe { subcommand: String },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Energy => "energy",
            Command::CompareDce => "compare-dce",
            Command::Xi => "xi",
            Command::Sweep => "sweep",
            Command::Ensemble => "ensemble",
            Command::Validate => "validate",
            Command::Describe { .. } => "describe",
        }
    }
}

/// Error category and exit status.
pub fn classify(err: &Error) -> (&'static str, i32) {
    match err.root() {
        Error::Io { .. } => ("io", EXIT_IO),
        Error::Csv(e) if e.is_io_error() => ("io", EXIT_IO),
        Error::Json(e) if e.is_io() => ("io", EXIT_IO),
        Error::NonConvergence { .. } | Error::TailNotReached { .. } | Error::NonFinite(_) => {
            ("numerical", EXIT_NUMERICAL)
        }
        _ => ("schema", EXIT_SCHEMA),
    }
}

fn error_json(kind: &str, code: i32, message: String, field: Option<String>) -> String {
    let mut body = json!({ "kind": kind, "exit_code": code, "message": message });
    if let Some(f) = field {
        body["field"] = Value::String(f);
    }
    json!({ "error": body }).to_string()
}

/// Parses `args`, runs, and returns the exit status.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let _ = writeln!(
                stderr,
                "{}",
                error_json("usage", EXIT_SCHEMA, e.to_string().trim().to_string(), None)
            );
            return EXIT_SCHEMA;
        }
    };
    match run(&cli, stdout) {
        Ok(code) => code,
        Err(err) => {
            let (kind, code) = classify(&err);
            let field = match err.root() {
                Error::InvalidParameter { field, .. } => Some(field.clone()),
                _ => None,
            };
            let _ = writeln!(stderr, "{}", error_json(kind, code, err.to_string(), field));
            code
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("PATCHRAD_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Error::invalid("PATCHRAD_THREADS", "must be a positive integer"))?;
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Effective config: file contents with command-line overrides applied.
struct Context {
    cfg: RunConfig,
    base: PathBuf,
    out: PathBuf,
    units: UnitColumns,
    hash: String,
    subcommand: &'static str,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self> {
        let (mut cfg, base) = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => (RunConfig::default(), PathBuf::new()),
        };
        if let Some(seed) = cli.seed {
            cfg.seed = Some(seed);
        }
        if let Some(tol) = cli.tol {
            cfg.tolerances
                .get_or_insert(ToleranceSpec {
                    rel_tol: None,
                    abs_tol: None,
                    max_evaluations: None,
                })
                .rel_tol = Some(tol);
        }
        if let Some(u) = cli.units {
            cfg.units = Some(match u {
                UnitsArg::Si => UnitColumns::Si,
                UnitsArg::Gauss => UnitColumns::Gauss,
            });
        }
        let units = cfg.units.unwrap_or_default();
        let out = cli
            .out
            .clone()
            .or_else(|| cfg.output.clone())
            .unwrap_or_else(|| PathBuf::from("."));
        let hash = cfg.hash();
        Ok(Context {
            cfg,
            base,
            out,
            units,
            hash,
            subcommand: cli.command.name(),
        })
    }

    fn header(&self) -> Vec<String> {
        vec![
            format!("patchrad {VERSION}"),
            format!("subcommand {}", self.subcommand),
            format!("config_sha256 {}", self.hash),
            format!("units {}", self.units.tag()),
        ]
    }

    fn document<T: Serialize>(&self, result: &T) -> Result<String> {
        let doc = json!({
            "tool": "patchrad",
            "version": VERSION,
            "subcommand": self.subcommand,
            "config_sha256": self.hash,
            "unit_system": spectrum::UNIT_SYSTEM,
            "result": serde_json::to_value(result)?,
        });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    fn path(&self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        Ok(self.out.join(name))
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name)?;
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf> {
        self.write(name, self.document(result)?.as_bytes())
    }

    fn opts(&self) -> Result<crate::quad::QuadOptions> {
        self.cfg.quad_options(None)
    }

    /// Inner `k`-integral tolerances: at least as tight as the outer ones.
    fn inner_opts(&self) -> Result<crate::quad::QuadOptions> {
        let outer = self.opts()?;
        let default = spectrum::default_options();
        Ok(outer.with_rel_tol(outer.rel_tol.min(default.rel_tol)))
    }

    fn seed(&self) -> u64 {
        self.cfg.seed.unwrap_or(0)
    }
}

fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    if let Command::Describe { subcommand } = &cli.command {
        let schema = crate::schema::describe(subcommand)?;
        writeln!(stdout, "{}", serde_json::to_string_pretty(&schema)?).map_err(|e| Error::io("<stdout>", e))?;
        return Ok(0);
    }
    configure_threads()?;
    let ctx = Context::new(cli)?;
    let say = |stdout: &mut dyn Write, v: Value| -> Result<()> {
        writeln!(stdout, "{v}").map_err(|e| Error::io("<stdout>", e))
    };
    match &cli.command {
        Command::Spectrum | Command::CompareDce => {
            let traj = ctx.cfg.trajectory(&ctx.base)?;
            let grid = ctx.cfg.omega_grid()?;
            let opts = ctx.inner_opts()?;
            let mut result = match ctx.cfg.time_correlation(&ctx.base)? {
                Some(tm) => spectrum::compute_spectrum_time_dependent(&tm, &traj, &grid, &opts)?,
                None => spectrum::compute_spectrum(&ctx.cfg.correlation(&ctx.base)?, &traj, &grid, &opts)?,
            };
            let stem = if matches!(cli.command, Command::CompareDce) {
                result.p_dce = Some(
                    grid.iter()
                        .map(|&w| spectrum::dce_spectral_density(&traj, w))
                        .collect::<Result<_>>()?,
                );
                "compare_dce"
            } else {
                "spectrum"
            };
            let mut csv = Vec::new();
            result.write_csv(&mut csv, &ctx.header(), ctx.units)?;
            let csv_path = ctx.write(&format!("{stem}.csv"), &csv)?;
            let json_path = ctx.write_json(&format!("{stem}.json"), &result)?;
            let peak = result
                .p
                .iter()
                .enumerate()
                .fold(0, |b, (i, p)| if *p > result.p[b] { i } else { b });
            say(
                stdout,
                json!({
                    "points": grid.len(),
                    "peak_omega_rad_per_s": result.omega[peak],
                    "peak_P_erg_s_per_cm2": result.p[peak],
                    "csv": csv_path,
                    "json": json_path,
                }),
            )?;
        }
        Command::Energy => {
            let traj = ctx.cfg.trajectory(&ctx.base)?;
            let model = ctx.cfg.correlation(&ctx.base)?;
            let opts = ctx.opts()?;
            let u = spectrum::total_energy(&model, &traj, &opts)?;
            let omega0 = model.omega_tilde(0.0)?;
            let mut result = json!({
                "U_rad_erg_per_cm2": u.value,
                "error_estimate": u.error_estimate,
                "evaluations": u.evaluations,
                "omega_tilde_0_erg_cm": omega0,
                "model": model.descriptor(),
                "trajectory": traj.descriptor(),
            });
            if traj.is_analytic() && omega0 > 0.0 {
                let jerk = omega0 * traj.jerk_energy()? / C.powi(5);
                result["small_l_jerk_term_erg_per_cm2"] = json!(jerk);
                result["U_over_jerk_term"] = json!(u.value / jerk);
            }
            let path = ctx.write_json("energy.json", &result)?;
            result["json"] = json!(path);
            say(stdout, result)?;
        }
        Command::Xi => {
            let (v, ell) = ctx.cfg.xi()?;
            let xi = spectrum::xi_ratio(v, ell)?;
            let norm = spectrum::xi_normalized(v, ell);
            // xi = A (V / 40 mV)^2 (l / 100 nm)^2 with A fixed by the constants
            let a = validate::XI_REFERENCE_VALUE;
            let result = json!({
                "xi": xi,
                "v_rms_statvolt": v,
                "ell_cm": ell,
                "normalized_scale": norm,
                "normalized_form": format!("{a} x (V/40 mV)^2 x (l/100 nm)^2"),
            });
            ctx.write_json("xi.json", &result)?;
            say(stdout, result)?;
        }
        Command::Sweep => {
            let traj = ctx.cfg.trajectory(&ctx.base)?;
            let v = ctx.cfg.sweep_v_rms()?;
            let (lo, hi, count) = ctx.cfg.sweep()?;
            let s = spectrum::sweep_correlation_length(v, &traj, lo, hi, count, ctx.cfg.image_factor, &ctx.opts()?)?;
            let (l_scale, u_scale, names) = match ctx.units {
                UnitColumns::Gauss => (1.0, 1.0, ["ell_cm", "U_erg_per_cm2"]),
                UnitColumns::Si => (1e-2, 1e-3, ["ell_m", "U_J_per_m2"]),
            };
            let mut csv = String::new();
            for line in ctx.header() {
                csv.push_str(&format!("# {line}\n"));
            }
            csv.push_str(&names.join(","));
            csv.push('\n');
            for (l, u) in &s.table {
                csv.push_str(&format!("{},{}\n", fmt17(l * l_scale), fmt17(u * u_scale)));
            }
            ctx.write("sweep.csv", csv.as_bytes())?;
            let w0 = traj.dominant_frequency();
            let mut result = json!({
                "ell_star_cm": s.ell_star,
                "U_star_erg_per_cm2": s.energy_star,
                "peak_on_boundary": s.peak_on_boundary,
                "table": s.table,
            });
            if let Some(w0) = w0.filter(|w| *w > 0.0) {
                result["ell_star_over_c_per_omega0"] = json!(s.ell_star * w0 / C);
            }
            ctx.write_json("sweep.json", &result)?;
            result.as_object_mut().expect("object").remove("table");
            say(stdout, result)?;
        }
        Command::Ensemble => {
            let traj = ctx.cfg.trajectory(&ctx.base)?;
            let model = ctx.cfg.correlation(&ctx.base)?;
            let grid = ctx.cfg.omega_grid()?;
            let (n, cell, realizations, export) = ctx.cfg.ensemble()?;
            let opts = ctx.inner_opts()?;
            let e = ensemble::ensemble_spectrum(&model, &traj, &grid, realizations, ctx.seed(), n, cell, &opts)?;
            let target = spectrum::compute_spectrum(&model, &traj, &grid, &opts)?;
            let p_scale = match ctx.units {
                UnitColumns::Gauss => 1.0,
                UnitColumns::Si => 1e-3,
            };
            let suffix = match ctx.units {
                UnitColumns::Gauss => "erg_s_per_cm2",
                UnitColumns::Si => "J_s_per_m2",
            };
            let mut csv = String::new();
            for line in ctx.header() {
                csv.push_str(&format!("# {line}\n"));
            }
            csv.push_str(&format!(
                "omega_rad_per_s,P_mean_{suffix},P_standard_error_{suffix},P_target_{suffix}\n"
            ));
            for (i, w) in grid.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt17(*w),
                    fmt17(e.mean[i] * p_scale),
                    fmt17(e.standard_error[i] * p_scale),
                    fmt17(target.p[i] * p_scale)
                ));
            }
            ctx.write("ensemble.csv", csv.as_bytes())?;
            ctx.write_json("ensemble.json", &json!({ "ensemble": e, "target": target }))?;
            if export {
                let field = ensemble::generate(&model, n, cell, ctx.seed())?;
                field.export(ctx.path("field")?)?;
            }
            say(
                stdout,
                json!({ "realizations": realizations, "n": n, "cell_cm": cell, "points": grid.len() }),
            )?;
        }
        Command::Validate => {
            let mut vopts = ValidationOptions {
                seed: ctx.seed(),
                ..ValidationOptions::default()
            };
            if let Some(v) = &ctx.cfg.validate {
                if let Some(n) = v.ensemble_n {
                    vopts.ensemble_n = n;
                }
                if let Some(m) = v.ensemble_realizations {
                    vopts.ensemble_realizations = m;
                }
            }
            let report = validate::run(&vopts)?;
            ctx.write_json("validation_report.json", &json!({ "options": vopts, "report": report }))?;
            for e in &report.entries {
                let tag = match e.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Informational => "INFO",
                };
                writeln!(
                    stdout,
                    "{tag} {} value={} oracle={} tol={:e}",
                    e.name,
                    fmt17(e.value),
                    fmt17(e.oracle),
                    e.tolerance
                )
                .map_err(|e| Error::io("<stdout>", e))?;
            }
            if !report.passed() {
                return Ok(EXIT_VALIDATION);
            }
        }
        Command::Describe { .. } => unreachable!("handled above"),
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = main_with_args(
            std::iter::once("patchrad").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn describe_known_and_unknown() {
        let (code, out, _) = run_args(&["describe", "spectrum"]);
        assert_eq!(code, 0);
        assert!(out.contains("omega_grid"));
        let (code, _, err) = run_args(&["describe", "nonsense"]);
        assert_eq!(code, EXIT_SCHEMA);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"]["exit_code"], 2);
    }

    #[test]
    fn usage_error_is_json() {
        let (code, _, err) = run_args(&["frobnicate"]);
        assert_eq!(code, EXIT_SCHEMA);
        assert!(serde_json::from_str::<Value>(err.trim()).is_ok());
    }

    #[test]
    fn missing_config_is_io() {
        let (code, _, err) = run_args(&["xi", "--config", "/nonexistent/patchrad.json"]);
        assert_eq!(code, EXIT_IO, "{err}");
    }

    #[test]
    fn classification() {
        assert_eq!(classify(&Error::invalid("a", "b")).1, EXIT_SCHEMA);
        assert_eq!(
            classify(
                &Error::TailNotReached {
                    omega_max: 1.0,
                    accumulated: 0.0
                }
                .context("x")
            )
            .1,
            EXIT_NUMERICAL
        );
        let io = Error::io(std::path::Path::new("x"), std::io::Error::other("boom"));
        assert_eq!(classify(&io).1, EXIT_IO);
    }
}
