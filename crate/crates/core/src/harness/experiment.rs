//! Batch execution: success rates over repeated runs and parameter sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, SweepAxis};
use super::presets::TableSpec;
use crate::error::{CboError, Result};
use crate::noise::derive_seed;
use crate::objectives::ObjectiveSpec;
use crate::params::CboParams;
use crate::solver::{run_with, RunOptions};

/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub rate: f64,
    pub runs: usize,
    pub successes: usize,
    pub wilson_ci_95: (f64, f64),
}

impl SuccessEstimate {
    pub fn from_counts(successes: usize, runs: usize) -> Self {
        assert!(runs > 0 && successes <= runs);
        let rate = successes as f64 / runs as f64;
        Self { rate, runs, successes, wilson_ci_95: wilson_interval(successes, runs, Z_95) }
    }
}

/// Wilson score interval, clamped so that it always contains the point rate.
pub fn wilson_interval(successes: usize, runs: usize, z: f64) -> (f64, f64) {
    let n = runs as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).clamp(0.0, p), (center + half).clamp(p, 1.0))
}

/// Seed of repetition `rep`. Every sweep cell reuses the same sequence
/// (common random numbers), so an estimate depends only on the cell's
/// parameters and the root seed, never on its position in the grid.
pub fn repetition_seed(root_seed: u64, rep: usize) -> u64 {
    derive_seed(root_seed, rep as u64)
}

fn count_successes(
    params: &CboParams,
    objective: &ObjectiveSpec,
    options: &RunOptions,
    root_seed: u64,
    repetitions: usize,
) -> Result<usize> {
    let outcomes: Vec<Result<bool>> = (0..repetitions)
        .into_par_iter()
        .map(|rep| {
            run_with(params, objective, repetition_seed(root_seed, rep), options)
                .map(|o| o.success)
                .map_err(|e| CboError::AtRun { run: rep, source: Box::new(e) })
        })
        .collect();
    let mut successes = 0;
    for outcome in outcomes {
        successes += outcome? as usize;
    }
    Ok(successes)
}

/// Runs `config.repetitions` independent optimizations and reports the
/// fraction whose final ensemble mean lies within `config.tolerance` of the
/// minimizer.
pub fn success_rate(config: &ExperimentConfig) -> Result<SuccessEstimate> {
    config.validate()?;
    let objective = config.objective.build()?;
    let options = RunOptions { tolerance: config.tolerance, record_trace: false };
    let successes =
        count_successes(&config.cbo, &objective, &options, config.root_seed, config.repetitions)?;
    Ok(SuccessEstimate::from_counts(successes, config.repetitions))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    /// One value per axis, in axis order.
    #[serde(with = "crate::serde_inf::vec")]
    pub coords: Vec<f64>,
    pub estimate: Option<SuccessEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub cell: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    /// SHA-256 of the canonical JSON form of the configuration.
    pub config_hash: String,
    pub root_seed: u64,
    pub objective: String,
    pub dim: usize,
    pub repetitions: usize,
    #[serde(with = "crate::serde_inf")]
    pub tolerance: f64,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axes: Vec<SweepAxis>,
    /// Row-major over `axes`: the last axis varies fastest.
    pub cells: Vec<SweepCell>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    /// Estimate at the given coordinates, if that cell exists and succeeded.
    pub fn get(&self, coords: &[f64]) -> Option<&SuccessEstimate> {
        self.cells
            .iter()
            .find(|c| c.coords.len() == coords.len() && c.coords.iter().zip(coords).all(|(a, b)| a == b))
            .and_then(|c| c.estimate.as_ref())
    }
}

pub fn config_hash(config: &ExperimentConfig) -> Result<String> {
    let json = serde_json::to_vec(config).map_err(|e| CboError::Serialization(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&json)))
}

fn grid(axes: &[SweepAxis]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut c = prefix.clone();
                    c.push(v);
                    c
                })
            })
            .collect()
    })
}

/// Evaluates [`success_rate`] on every cell of the sweep grid. A cell whose
/// parameters are invalid, or whose runs fail, is reported in
/// `metadata.errors` and the remaining cells are still computed.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let axes = config
        .sweep
        .clone()
        .ok_or_else(|| CboError::config("sweep: required for a sweep run"))?;
    let objective = config.objective.build()?;
    let options = RunOptions { tolerance: config.tolerance, record_trace: false };
    let coords = grid(&axes);

    let cell_params: Vec<Result<CboParams>> = coords
        .iter()
        .map(|c| {
            let mut params = config.cbo.clone();
            for (axis, &v) in axes.iter().zip(c) {
                axis.param.apply(&mut params, v)?;
            }
            params.validate()?;
            Ok(params)
        })
        .collect();

    let reps = config.repetitions;
    let tasks: Vec<(usize, usize)> = cell_params
        .iter()
        .enumerate()
        .filter(|(_, p)| p.is_ok())
        .flat_map(|(cell, _)| (0..reps).map(move |rep| (cell, rep)))
        .collect();
    let outcomes: Vec<Result<bool>> = tasks
        .par_iter()
        .map(|&(cell, rep)| {
            let params = cell_params[cell].as_ref().expect("filtered");
            run_with(params, &objective, repetition_seed(config.root_seed, rep), &options)
                .map(|o| o.success)
                .map_err(|e| CboError::AtRun { run: rep, source: Box::new(e) })
        })
        .collect();

    let mut results: Vec<std::result::Result<usize, String>> = cell_params
        .iter()
        .map(|p| match p {
            Ok(_) => Ok(0),
            Err(e) => Err(e.to_string()),
        })
        .collect();
    for (&(cell, _), outcome) in tasks.iter().zip(outcomes) {
        if let Ok(count) = &mut results[cell] {
            match outcome {
                Ok(success) => *count += success as usize,
                Err(e) => results[cell] = Err(e.to_string()),
            }
        }
    }

    let mut errors = Vec::new();
    let cells = coords
        .into_iter()
        .zip(results)
        .enumerate()
        .map(|(i, (coords, res))| {
            let estimate = match res {
                Ok(successes) => Some(SuccessEstimate::from_counts(successes, reps)),
                Err(message) => {
                    errors.push(CellError { cell: i, message });
                    None
                }
            };
            SweepCell { coords, estimate }
        })
        .collect();

    Ok(SweepResult {
        axes,
        cells,
        metadata: SweepMetadata {
            config_hash: config_hash(config)?,
            root_seed: config.root_seed,
            objective: config.objective.name.clone(),
            dim: config.objective.dim,
            repetitions: reps,
            tolerance: config.tolerance,
            errors,
        },
    })
}

/// A full benchmark table: one `K × M × N` sweep per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableResult {
    pub table: String,
    pub sweeps: Vec<SweepResult>,
}

pub fn run_table(spec: &TableSpec, repetitions: usize, root_seed: u64) -> Result<TableResult> {
    use super::config::SweepParam;

    let sweeps = spec
        .objectives
        .iter()
        .map(|name| {
            let mut config = ExperimentConfig::from_preset(spec.preset, name, None)?;
            config.repetitions = repetitions;
            config.root_seed = root_seed;
            config.sweep = Some(vec![
                SweepAxis { param: SweepParam::K, values: spec.k_values.iter().map(|&k| k as f64).collect() },
                SweepAxis { param: SweepParam::M, values: spec.m_values.to_vec() },
                SweepAxis { param: SweepParam::N, values: spec.n_values.iter().map(|&n| n as f64).collect() },
            ]);
            run_sweep(&config)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TableResult { table: spec.name.to_string(), sweeps })
}
