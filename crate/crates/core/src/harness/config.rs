//! Experiment configuration: a flat TOML document, optionally seeded by a
//! preset.
//!
//! ```toml
//! objective = "ackley"
//! dim = 15
//! preset = "isotropic-table2"
//! N = 300
//! M = 1            # number or "inf"
//!
//! [[sweep]]        # optional; axes are crossed in the order given
//! param = "sigma"  # sigma | M | N | K
//! values = [0.5, 1.0, 2.0]
//! ```
//!
//! Without a preset, `dim`, `N`, `K` and `sigma` are required. Other keys
//! default to `lambda = 1`, `alpha = 1e5`, `dt = 0.02`, isotropic noise,
//! `init_mean = 0`, `init_variance = 1`, `repetitions = 100`,
//! `tolerance = 0.1`, `seed = 0`, `M = R = inf`, `v_b = 0`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::presets::Preset;
use crate::ensemble::InitLaw;
use crate::error::{CboError, Result};
use crate::objectives::{make_objective, ObjectiveSpec};
use crate::params::{CboParams, NoiseMode};
use crate::solver::DEFAULT_TOLERANCE;

const KNOWN_KEYS: &[&str] = &[
    "objective", "dim", "shift", "preset", "noise", "N", "M", "K", "R", "v_b", "lambda", "sigma",
    "alpha", "dt", "init_mean", "init_variance", "repetitions", "tolerance", "seed", "sweep",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRef {
    pub name: String,
    pub dim: usize,
    pub shift: Option<Vec<f64>>,
}

impl ObjectiveRef {
    pub fn build(&self) -> Result<ObjectiveSpec> {
        make_objective(&self.name, self.dim, self.shift.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "sigma")]
    Sigma,
    M,
    N,
    K,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Sigma => "sigma",
            SweepParam::M => "M",
            SweepParam::N => "N",
            SweepParam::K => "K",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(SweepParam::Sigma),
            "M" => Ok(SweepParam::M),
            "N" => Ok(SweepParam::N),
            "K" => Ok(SweepParam::K),
            other => Err(CboError::config(format!(
                "sweep.param: unknown parameter `{other}` (valid: sigma, M, N, K)"
            ))),
        }
    }

    /// Writes `value` into the matching field of `params`.
    pub fn apply(self, params: &mut CboParams, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v.is_finite() {
                Ok(v as usize)
            } else {
                Err(CboError::config(format!("sweep.values: `{v}` is not a valid count")))
            }
        };
        match self {
            SweepParam::Sigma => params.sigma = value,
            SweepParam::M => params.trunc_m = value,
            SweepParam::N => params.n_particles = count(value)?,
            SweepParam::K => params.n_steps = count(value)?,
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    #[serde(with = "crate::serde_inf::vec")]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub objective: ObjectiveRef,
    pub cbo: CboParams,
    pub repetitions: usize,
    #[serde(with = "crate::serde_inf")]
    pub tolerance: f64,
    pub root_seed: u64,
    pub sweep: Option<Vec<SweepAxis>>,
}

impl ExperimentConfig {
    /// Expands a preset with no overrides.
    pub fn from_preset(preset: Preset, objective: &str, dim: Option<usize>) -> Result<Self> {
        let mut table = Table::new();
        table.insert("objective".into(), Value::String(objective.into()));
        table.insert("preset".into(), Value::String(preset.name().into()));
        if let Some(d) = dim {
            table.insert("dim".into(), Value::Integer(d as i64));
        }
        Self::from_table(&table)
    }

    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(CboError::config("repetitions: must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(CboError::config("tolerance: must be positive"));
        }
        let objective = self.objective.build()?;
        if objective.dim != self.cbo.dim() {
            return Err(CboError::DimensionMismatch { expected: objective.dim, actual: self.cbo.dim() });
        }
        self.cbo.validate()?;
        if let Some(axes) = &self.sweep {
            if axes.is_empty() {
                return Err(CboError::config("sweep: at least one axis required"));
            }
            for (i, axis) in axes.iter().enumerate() {
                if axis.values.is_empty() {
                    return Err(CboError::config(format!("sweep.{}: values must be nonempty", axis.param.name())));
                }
                if axes[..i].iter().any(|a| a.param == axis.param) {
                    return Err(CboError::config(format!("sweep.{}: axis listed twice", axis.param.name())));
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| CboError::config(e.to_string()))?;
        Self::from_table(&table)
    }

    fn from_table(t: &Table) -> Result<Self> {
        if let Some(key) = t.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(CboError::config(format!("{key}: unknown key")));
        }

        let preset = opt_str(t, "preset")?.map(|s| s.parse::<Preset>()).transpose()?;
        let defaults = preset.map(Preset::defaults);

        let objective = match opt_str(t, "objective")? {
            Some(name) => name.to_string(),
            None => return Err(CboError::config("objective: required")),
        };
        let dim = match (opt_count(t, "dim")?, &defaults) {
            (Some(d), _) => d,
            (None, Some(d)) => d.dim,
            (None, None) => return Err(CboError::config("dim: required")),
        };
        if dim == 0 {
            return Err(CboError::config("dim: must be at least 1"));
        }
        let required = |key: &str| CboError::config(format!("{key}: required"));

        let noise_mode = match opt_str(t, "noise")? {
            Some(s) => s.parse::<NoiseMode>().map_err(|_| {
                CboError::config(format!("noise: expected `isotropic` or `anisotropic`, got `{s}`"))
            })?,
            None => defaults.as_ref().map_or(NoiseMode::Isotropic, |d| d.noise_mode),
        };
        let n_particles = match (opt_count(t, "N")?, &defaults) {
            (Some(n), _) => n,
            (None, Some(d)) => d.n_particles,
            (None, None) => return Err(required("N")),
        };
        let n_steps = match (opt_count(t, "K")?, &defaults) {
            (Some(k), _) => k,
            (None, Some(d)) => d.n_steps,
            (None, None) => return Err(required("K")),
        };
        let sigma = match (opt_num(t, "sigma")?, &defaults) {
            (Some(s), _) => s,
            (None, Some(d)) => d.sigma,
            (None, None) => return Err(required("sigma")),
        };
        let pick = |key: &str, fallback: f64, from: fn(&super::presets::PresetDefaults) -> f64| -> Result<f64> {
            Ok(match opt_num(t, key)? {
                Some(v) => v,
                None => defaults.as_ref().map_or(fallback, from),
            })
        };
        let lambda = pick("lambda", 1.0, |d| d.lambda)?;
        let alpha = pick("alpha", 1e5, |d| d.alpha)?;
        let dt = pick("dt", 0.02, |d| d.dt)?;
        let init_variance = pick("init_variance", 1.0, |d| d.init_variance)?;
        let init_mean_scalar = defaults.as_ref().map_or(0.0, |d| d.init_mean);
        let init_mean = opt_vector(t, "init_mean", dim)?.unwrap_or_else(|| vec![init_mean_scalar; dim]);
        let proj_center = opt_vector(t, "v_b", dim)?.unwrap_or_else(|| vec![0.0; dim]);
        let shift = opt_vector(t, "shift", dim)?;

        let cbo = CboParams {
            lambda,
            sigma,
            alpha,
            dt,
            trunc_m: opt_num(t, "M")?.unwrap_or(f64::INFINITY),
            proj_r: opt_num(t, "R")?.unwrap_or(f64::INFINITY),
            proj_center,
            noise_mode,
            n_particles,
            n_steps,
            init: InitLaw::gaussian(init_mean, init_variance),
        };

        let repetitions = match opt_count(t, "repetitions")? {
            Some(r) => r,
            None => defaults.as_ref().map_or(100, |d| d.repetitions),
        };
        let root_seed = match t.get("seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => return Err(CboError::config("seed: expected a nonnegative integer")),
        };
        let sweep = match t.get("sweep") {
            None => None,
            Some(v) => Some(parse_sweep(v)?),
        };

        let config = ExperimentConfig {
            objective: ObjectiveRef { name: objective, dim, shift },
            cbo,
            repetitions,
            tolerance: opt_num(t, "tolerance")?.unwrap_or(DEFAULT_TOLERANCE),
            root_seed,
            sweep,
        };
        config.validate()?;
        Ok(config)
    }
}

/// Reads and validates a config file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CboError::Io { path: path.to_path_buf(), source })?;
    ExperimentConfig::parse(&text).map_err(|e| match e {
        CboError::Config(msg) => CboError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn opt_str<'a>(t: &'a Table, key: &str) -> Result<Option<&'a str>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(CboError::config(format!("{key}: expected a string"))),
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Float(f) => Some(*f),
        Value::String(s) => crate::serde_inf::parse_str(s),
        _ => None,
    }
}

fn opt_num(t: &Table, key: &str) -> Result<Option<f64>> {
    t.get(key)
        .map(|v| number(v).ok_or_else(|| CboError::config(format!("{key}: expected a number"))))
        .transpose()
}

fn opt_count(t: &Table, key: &str) -> Result<Option<usize>> {
    match t.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
        Some(_) => Err(CboError::config(format!("{key}: expected a nonnegative integer"))),
    }
}

/// A scalar is broadcast to all `dim` coordinates.
fn opt_vector(t: &Table, key: &str, dim: usize) -> Result<Option<Vec<f64>>> {
    let Some(v) = t.get(key) else { return Ok(None) };
    if let Value::Array(items) = v {
        if items.len() != dim {
            return Err(CboError::config(format!("{key}: expected {dim} entries, got {}", items.len())));
        }
        let out = items
            .iter()
            .map(|x| number(x).ok_or_else(|| CboError::config(format!("{key}: expected numbers"))))
            .collect::<Result<Vec<_>>>()?;
        return Ok(Some(out));
    }
    let x = number(v).ok_or_else(|| CboError::config(format!("{key}: expected a number or array")))?;
    Ok(Some(vec![x; dim]))
}

fn parse_sweep(v: &Value) -> Result<Vec<SweepAxis>> {
    let Value::Array(entries) = v else {
        return Err(CboError::config("sweep: expected an array of tables ([[sweep]])"));
    };
    entries
        .iter()
        .map(|entry| {
            let Value::Table(t) = entry else {
                return Err(CboError::config("sweep: expected an array of tables ([[sweep]])"));
            };
            if let Some(key) = t.keys().find(|k| *k != "param" && *k != "values") {
                return Err(CboError::config(format!("sweep.{key}: unknown key")));
            }
            let param = match t.get("param") {
                Some(Value::String(s)) => SweepParam::parse(s)?,
                _ => return Err(CboError::config("sweep.param: required")),
            };
            let values = match t.get("values") {
                Some(Value::Array(xs)) => xs
                    .iter()
                    .map(|x| {
                        number(x).ok_or_else(|| {
                            CboError::config(format!("sweep.{}: values must be numbers", param.name()))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
                _ => return Err(CboError::config(format!("sweep.{}: values required", param.name()))),
            };
            Ok(SweepAxis { param, values })
        })
        .collect()
}
