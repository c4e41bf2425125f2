//! Run configuration: every tunable of every experiment, with defaults.
//!
//! Keys are the field names. Values given as text are parsed according to
//! the type of the default: numbers, `true`/`false`, comma-separated lists,
//! and `none` for optional fields.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ExperimentError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // schedule
    pub n0: u64,
    pub levels: u32,
    pub toy: bool,
    pub subdivision: Option<u64>,
    pub seed: u64,

    // metric and measure
    pub triples: usize,
    pub delta: f64,
    pub trials: usize,
    pub samples: usize,
    pub doubling_bound: f64,
    pub level0_trials: usize,
    pub level0_samples: usize,
    pub ball_centers: usize,
    pub ball_radius: f64,

    // paths
    pub eps: f64,
    pub radius: f64,
    pub centers: usize,
    pub pairs_per_center: usize,
    pub density_points: usize,
    pub stretch: f64,

    // solver and energy bounds
    pub grid_ladder: Vec<u32>,
    pub stabilization: f64,
    pub components: usize,
    pub cap: f64,
    pub solver_tol: f64,
    pub max_iter: usize,
    pub radial_tolerance: f64,

    // piecewise harmonic approximations
    pub gate_subdivision: u64,
    pub cell_ladder: Vec<u32>,
    pub functions: usize,
    pub anchors: usize,
    pub approx_levels: Vec<u32>,
    pub cells_per_level: usize,
    pub residual_tolerance: f64,

    // gate collapse
    pub collapse_eps: f64,
    pub collapse_levels: u32,
    pub collapse_budget: usize,
    pub collapse_bound: f64,
    pub face_resolution: u32,

    // differentiability decay
    pub decay_points: usize,
    pub decay_level: u32,
    pub decay_eps: f64,
    pub decay_gate_stage: u32,
    pub radii_exponents: Vec<u32>,
    pub decay_step: f64,
    pub zero_remainder_tolerance: f64,

    // tangent
    pub tangent_n0: u64,
    pub tangent_toy: bool,
    pub tangent_subdivision: Option<u64>,
    pub tangent_samples: usize,
    pub tangent_tolerance: f64,
    pub tangent_min_diameter: f64,

    // gate frequency
    pub gate_trials: usize,
    pub blocks: u32,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n0: 2,
            levels: 3,
            toy: true,
            subdivision: None,
            seed: 0,

            triples: 1000,
            delta: 0.02,
            trials: 200,
            samples: 8192,
            doubling_bound: 64.0,
            level0_trials: 40,
            level0_samples: 20_000,
            ball_centers: 4,
            ball_radius: 0.15,

            eps: 0.25,
            radius: 0.15,
            centers: 10,
            pairs_per_center: 200,
            density_points: 1000,
            stretch: 24.0,

            grid_ladder: vec![24, 48, 96],
            stabilization: 0.1,
            components: 8,
            cap: 4.0,
            solver_tol: 1e-8,
            max_iter: 20_000,
            radial_tolerance: 0.05,

            gate_subdivision: 9,
            cell_ladder: vec![2, 4, 8],
            functions: 5,
            anchors: 6,
            approx_levels: vec![1, 2],
            cells_per_level: 1,
            residual_tolerance: 0.05,

            collapse_eps: 0.5,
            collapse_levels: 3,
            collapse_budget: 2000,
            collapse_bound: 1.0,
            face_resolution: 4,

            decay_points: 200,
            decay_level: 4,
            decay_eps: 0.5,
            decay_gate_stage: 1,
            radii_exponents: vec![1, 2, 3, 4],
            decay_step: 1e-6,
            zero_remainder_tolerance: 1e-9,

            tangent_n0: 100,
            tangent_toy: false,
            tangent_subdivision: None,
            tangent_samples: 1000,
            tangent_tolerance: 0.05,
            tangent_min_diameter: 3.0,

            gate_trials: 20_000,
            blocks: 3,
        }
    }
}

fn parse_scalar(key: &str, like: &Value, text: &str) -> Result<Value, ExperimentError> {
    let bad = || ExperimentError::Usage(format!("cannot parse `{text}` for key `{key}`"));
    let t = text.trim();
    Ok(match like {
        Value::Bool(_) => Value::Bool(t.parse().map_err(|_| bad())?),
        Value::Number(n) if n.is_u64() => Value::from(t.parse::<u64>().map_err(|_| bad())?),
        Value::Number(_) => {
            let v: f64 = t.parse().map_err(|_| bad())?;
            serde_json::Number::from_f64(v).map(Value::Number).ok_or_else(bad)?
        }
        Value::String(_) => Value::String(t.to_string()),
        // optional integers are the only nullable fields
        Value::Null if t == "none" => Value::Null,
        Value::Null => Value::from(t.parse::<u64>().map_err(|_| bad())?),
        _ => return Err(bad()),
    })
}

impl RunConfig {
    pub fn keys() -> Vec<String> {
        match serde_json::to_value(RunConfig::default()) {
            Ok(Value::Object(m)) => m.keys().cloned().collect(),
            _ => unreachable!(),
        }
    }

    /// Set one field from its text form.
    pub fn set(&mut self, key: &str, text: &str) -> Result<(), ExperimentError> {
        let Value::Object(mut map) = serde_json::to_value(&*self).expect("config serializes") else { unreachable!() };
        let Value::Object(defaults) = serde_json::to_value(RunConfig::default()).expect("config serializes") else { unreachable!() };
        // the default decides the type, so optional keys stay optional
        let like = defaults.get(key).ok_or_else(|| ExperimentError::Usage(format!("unknown configuration key `{key}`")))?;
        let new = match like {
            Value::Array(items) => {
                let like = items.first().cloned().unwrap_or(Value::from(0u64));
                let parts = text.split(',').map(str::trim).filter(|s| !s.is_empty());
                Value::Array(parts.map(|p| parse_scalar(key, &like, p)).collect::<Result<_, _>>()?)
            }
            Value::Null => parse_scalar(key, &Value::Null, text)?,
            other => parse_scalar(key, other, text)?,
        };
        map.insert(key.to_string(), new);
        *self = serde_json::from_value(Value::Object(map)).map_err(|e| ExperimentError::Usage(format!("key `{key}`: {e}")))?;
        Ok(())
    }

    /// Apply a `key = value` text: one pair per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ExperimentError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ExperimentError::Usage(format!("line {}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    /// Canonical text form; keys in declaration order.
    pub fn to_text(&self) -> String {
        let Value::Object(map) = serde_json::to_value(self).expect("config serializes") else { unreachable!() };
        let mut out = String::new();
        for key in Self::keys_in_order() {
            let v = &map[*key];
            let s = match v {
                Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                Value::Null => "none".into(),
                Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            out.push_str(&format!("{key} = {s}\n"));
        }
        out
    }

    fn keys_in_order() -> &'static [&'static str] {
        &[
            "n0", "levels", "toy", "subdivision", "seed", "triples", "delta", "trials", "samples", "doubling_bound", "level0_trials",
            "level0_samples", "ball_centers", "ball_radius", "eps", "radius", "centers", "pairs_per_center", "density_points", "stretch",
            "grid_ladder", "stabilization", "components", "cap", "solver_tol", "max_iter", "radial_tolerance", "gate_subdivision",
            "cell_ladder", "functions", "anchors", "approx_levels", "cells_per_level", "residual_tolerance", "collapse_eps",
            "collapse_levels", "collapse_budget", "collapse_bound", "face_resolution", "decay_points", "decay_level", "decay_eps", "decay_gate_stage",
            "radii_exponents", "decay_step", "zero_remainder_tolerance", "tangent_n0", "tangent_toy", "tangent_subdivision",
            "tangent_samples", "tangent_tolerance", "tangent_min_diameter", "gate_trials", "blocks",
        ]
    }
}
