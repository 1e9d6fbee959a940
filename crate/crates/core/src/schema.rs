//! JSON Schema (draft 2020-12) of the run configuration, per subcommand.

use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const SUBCOMMANDS: &[&str] = &[
    "spectrum",
    "energy",
    "compare-dce",
    "xi",
    "sweep",
    "ensemble",
    "validate",
];

fn quantity(unit: &str, example_units: &[&str]) -> Value {
    json!({
        "description": format!("bare number in {unit}, or {{\"value\", \"unit\"}}"),
        "oneOf": [
            { "type": "number" },
            {
                "type": "object",
                "properties": {
                    "value": { "type": "number" },
                    "unit": { "type": "string", "examples": example_units }
                },
                "required": ["value", "unit"],
                "additionalProperties": false
            }
        ]
    })
}

fn length() -> Value {
    quantity("cm", &["cm", "m", "um", "nm"])
}

fn time() -> Value {
    quantity("s", &["s", "fs"])
}

fn frequency() -> Value {
    quantity("rad/s", &["1/s", "1/fs"])
}

fn wavenumber() -> Value {
    quantity("1/cm", &["1/cm", "1/m", "1/nm"])
}

fn potential() -> Value {
    quantity("statvolt", &["statvolt", "V", "mV"])
}

fn variant(kind: &str, props: Value, required: &[&str]) -> Value {
    let mut properties = props.as_object().cloned().unwrap_or_default();
    properties.insert("kind".into(), json!({ "const": kind }));
    let mut req = vec!["kind"];
    req.extend_from_slice(required);
    json!({
        "type": "object",
        "properties": properties,
        "required": req,
        "additionalProperties": false
    })
}

fn sections() -> Vec<(&'static str, Value)> {
    vec![
        (
            "trajectory",
            json!({ "oneOf": [
                variant("gaussian_pulse", json!({ "q0": length(), "tau": time() }), &["q0", "tau"]),
                variant(
                    "enveloped_harmonic",
                    json!({ "q0": length(), "omega0": frequency(), "tau": time() }),
                    &["q0", "omega0", "tau"],
                ),
                variant(
                    "sampled",
                    json!({
                        "path": { "type": "string", "description": "CSV with header t_seconds,q_centimeters; relative to the config file" },
                        "window": { "type": "string", "examples": ["hann", "tukey:0.25", "rectangular"] }
                    }),
                    &["path"],
                ),
            ]}),
        ),
        (
            "correlation",
            json!({ "oneOf": [
                variant("gaussian_quasilocal", json!({ "v_rms": potential(), "ell": length() }), &["v_rms", "ell"]),
                variant(
                    "sharp_cutoff",
                    json!({ "v_rms": potential(), "k_min": wavenumber(), "k_max": wavenumber() }),
                    &["v_rms", "k_min", "k_max"],
                ),
                variant("constant", json!({ "omega0": { "type": "number", "description": "Omega~(0) in erg cm" } }), &["omega0"]),
                variant(
                    "tabulated",
                    json!({ "path": { "type": "string", "description": "CSV with header k_per_cm,omega_tilde_erg_cm" } }),
                    &["path"],
                ),
            ]}),
        ),
        (
            "image_factor",
            json!({ "type": "boolean", "default": false, "description": "multiply Omega~ by 4 (grounded-conductor image layer)" }),
        ),
        (
            "temporal",
            json!({ "oneOf": [
                variant("instantaneous", json!({}), &[]),
                variant("lorentzian", json!({ "gamma": frequency() }), &["gamma"]),
            ]}),
        ),
        (
            "omega_grid",
            json!({
                "type": "object",
                "properties": {
                    "min": frequency(),
                    "max": frequency(),
                    "count": { "type": "integer", "minimum": 2 },
                    "spacing": { "enum": ["linear", "log"], "default": "log" }
                },
                "required": ["min", "max", "count"],
                "additionalProperties": false
            }),
        ),
        (
            "tolerances",
            json!({
                "type": "object",
                "properties": {
                    "rel_tol": { "type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 1e-10 },
                    "abs_tol": { "type": "number", "minimum": 0, "default": 1e-300 },
                    "max_evaluations": { "type": "integer", "minimum": 15, "default": 1_000_000 }
                },
                "additionalProperties": false
            }),
        ),
        ("seed", json!({ "type": "integer", "minimum": 0 })),
        ("units", json!({ "enum": ["gauss", "si"], "default": "gauss" })),
        ("output", json!({ "type": "string", "description": "output directory" })),
        (
            "sweep",
            json!({
                "type": "object",
                "properties": {
                    "ell_min": length(),
                    "ell_max": length(),
                    "count": { "type": "integer", "minimum": 3, "default": 25 }
                },
                "required": ["ell_min", "ell_max"],
                "additionalProperties": false
            }),
        ),
        (
            "ensemble",
            json!({
                "type": "object",
                "properties": {
                    "n": { "type": "integer", "minimum": 16, "description": "grid side, a power of two" },
                    "cell": length(),
                    "realizations": { "type": "integer", "minimum": 2 },
                    "export_field": { "type": "boolean", "default": false }
                },
                "required": ["n", "cell", "realizations"],
                "additionalProperties": false
            }),
        ),
        (
            "xi",
            json!({
                "type": "object",
                "properties": { "v_rms": potential(), "ell": length() },
                "required": ["v_rms", "ell"],
                "additionalProperties": false
            }),
        ),
        (
            "validate",
            json!({
                "type": "object",
                "properties": {
                    "ensemble_n": { "type": "integer", "minimum": 16, "default": 256 },
                    "ensemble_realizations": { "type": "integer", "minimum": 2, "default": 200 }
                },
                "additionalProperties": false
            }),
        ),
    ]
}

/// Sections each subcommand reads, and the subset it requires.
pub fn sections_for(subcommand: &str) -> Option<(&'static [&'static str], &'static [&'static str])> {
    Some(match subcommand {
        "spectrum" | "compare-dce" => (
            &[
                "trajectory",
                "correlation",
                "image_factor",
                "temporal",
                "omega_grid",
                "tolerances",
                "units",
                "output",
            ],
            &["trajectory", "correlation", "omega_grid"],
        ),
        "energy" => (
            &[
                "trajectory",
                "correlation",
                "image_factor",
                "tolerances",
                "units",
                "output",
            ],
            &["trajectory", "correlation"],
        ),
        "xi" => (&["xi", "correlation", "output"], &[]),
        "sweep" => (
            &[
                "trajectory",
                "correlation",
                "image_factor",
                "sweep",
                "tolerances",
                "units",
                "output",
            ],
            &["trajectory", "correlation", "sweep"],
        ),
        "ensemble" => (
            &[
                "trajectory",
                "correlation",
                "image_factor",
                "omega_grid",
                "ensemble",
                "seed",
                "tolerances",
                "units",
                "output",
            ],
            &["trajectory", "correlation", "omega_grid", "ensemble"],
        ),
        "validate" => (&["seed", "validate", "output"], &[]),
        _ => return None,
    })
}

/// Schema for `subcommand`. Every section of the config is listed, since
/// one file may serve several subcommands; `required` and `x-reads` name
/// the ones this subcommand uses.
pub fn describe(subcommand: &str) -> Result<Value> {
    let (reads, required) = sections_for(subcommand).ok_or_else(|| {
        Error::invalid(
            "subcommand",
            format!(
                "unknown subcommand `{subcommand}`; expected one of {}",
                SUBCOMMANDS.join(", ")
            ),
        )
    })?;
    let properties: serde_json::Map<String, Value> = sections().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    Ok(json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": format!("patchrad {subcommand} configuration"),
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": false,
        "x-reads": reads,
        "x-units": {
            "internal": "Gaussian-CGS: cm, s, g, erg, statvolt; frequencies in rad/s",
            "bare_numbers": "interpreted in the internal unit of the field",
            "registered_units": crate::units::REGISTRY.iter().map(|(n, _, _)| *n).collect::<Vec<_>>(),
            "reciprocal": "any registered unit may be written 1/<unit>",
            "csv": "17 significant digits; --units si switches P to J s/m^2 and K to J/(m^4 s)"
        }
    }))
}
