//! Python bindings. Configuration errors raise `ValueError`; failures during
//! a run raise `RuntimeError`.

use cbo_core::harness::{self, ExperimentConfig, ReportFormat};
use cbo_core::meanfield::{self, LimitInit, LimitParams};
use cbo_core::{CboError, CboParams, Ensemble, InitLaw, NoiseMode, ObjectiveSpec, RunOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: CboError) -> PyErr {
    if e.is_config_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn ensemble(positions: Vec<Vec<f64>>) -> PyResult<Ensemble> {
    Ensemble::from_rows(&positions).map_err(to_py)
}

/// A benchmark objective with known minimizer.
#[pyclass(name = "Objective", frozen)]
struct PyObjective {
    inner: ObjectiveSpec,
}

#[pymethods]
impl PyObjective {
    #[new]
    #[pyo3(signature = (name, dim, shift=None))]
    fn new(name: &str, dim: usize, shift: Option<Vec<f64>>) -> PyResult<Self> {
        Ok(Self { inner: cbo_core::make_objective(name, dim, shift).map_err(to_py)? })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    #[getter]
    fn minimizer(&self) -> Vec<f64> {
        self.inner.minimizer.clone()
    }

    #[getter]
    fn min_value(&self) -> f64 {
        self.inner.min_value
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim {
            return Err(to_py(CboError::DimensionMismatch { expected: self.inner.dim, actual: x.len() }));
        }
        Ok(cbo_core::Objective::eval(&self.inner, &x))
    }

    fn eval_batch(&self, positions: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        cbo_core::eval_batch(&self.inner, &ensemble(positions)?).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Objective({:?}, dim={})", self.inner.name, self.inner.dim)
    }
}

/// Returns `(point, argmin_index)`.
#[pyfunction]
fn consensus_point(positions: Vec<Vec<f64>>, values: Vec<f64>, alpha: f64) -> PyResult<(Vec<f64>, usize)> {
    let c = cbo_core::consensus_point(&ensemble(positions)?, &values, alpha).map_err(to_py)?;
    Ok((c.point, c.argmin_index))
}

#[pyfunction]
fn project_ball(v: Vec<f64>, center: Vec<f64>, radius: f64) -> PyResult<Vec<f64>> {
    if v.len() != center.len() {
        return Err(to_py(CboError::DimensionMismatch { expected: v.len(), actual: center.len() }));
    }
    Ok(cbo_core::project_ball(&v, &center, radius))
}

/// One optimizer run. Returns a dict with `final_mean`, `distance`,
/// `success` and `diverged_at_step`.
#[pyfunction]
#[pyo3(signature = (
    objective, *, sigma, n_particles, n_steps, lambda_=1.0, alpha=1e5, dt=0.02,
    trunc_m=f64::INFINITY, proj_r=f64::INFINITY, noise="isotropic", init_mean=None,
    init_variance=1.0, seed=0, tolerance=0.1,
))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    objective: &PyObjective,
    sigma: f64,
    n_particles: usize,
    n_steps: usize,
    lambda_: f64,
    alpha: f64,
    dt: f64,
    trunc_m: f64,
    proj_r: f64,
    noise: &str,
    init_mean: Option<Vec<f64>>,
    init_variance: f64,
    seed: u64,
    tolerance: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let dim = objective.inner.dim;
    let params = CboParams {
        lambda: lambda_,
        sigma,
        alpha,
        dt,
        trunc_m,
        proj_r,
        proj_center: vec![0.0; dim],
        noise_mode: noise.parse::<NoiseMode>().map_err(to_py)?,
        n_particles,
        n_steps,
        init: InitLaw::gaussian(init_mean.unwrap_or_else(|| vec![0.0; dim]), init_variance),
    };
    let options = RunOptions { tolerance, record_trace: false };
    let spec = &objective.inner;
    let outcome = py
        .detach(|| cbo_core::run_with(&params, spec, seed, &options))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("final_mean", outcome.final_mean)?;
    d.set_item("distance", outcome.distance_to_minimizer)?;
    d.set_item("success", outcome.success)?;
    d.set_item("diverged_at_step", outcome.diverged_at_step)?;
    Ok(d)
}

fn parse_config(text: &str) -> PyResult<ExperimentConfig> {
    ExperimentConfig::parse(text).map_err(to_py)
}

/// Success rate of a TOML experiment config. Returns a dict with `rate`,
/// `runs`, `successes` and `ci` (Wilson 95%).
#[pyfunction]
fn success_rate<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let config = parse_config(config)?;
    let est = py
        .detach(|| harness::with_worker_pool(|| harness::success_rate(&config)))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("rate", est.rate)?;
    d.set_item("runs", est.runs)?;
    d.set_item("successes", est.successes)?;
    d.set_item("ci", est.wilson_ci_95)?;
    Ok(d)
}

/// Runs the `[[sweep]]` grid of a TOML config and returns the report text.
#[pyfunction]
#[pyo3(signature = (config, format="csv"))]
fn sweep(py: Python<'_>, config: &str, format: &str) -> PyResult<String> {
    let format: ReportFormat = format.parse().map_err(to_py)?;
    let config = parse_config(config)?;
    let result = py
        .detach(|| harness::with_worker_pool(|| harness::run_sweep(&config)))
        .map_err(to_py)?;
    harness::render_report(&result, format).map_err(to_py)
}

/// Monte Carlo moment trajectory of the mean-field limit. `trunc_m = None`
/// simulates the untruncated dynamics. `start` fixes a common initial point;
/// otherwise trajectories start from `N(e₁, 0.1 I)`. Returns
/// `(times, moments, stderr)`.
#[pyfunction]
#[pyo3(signature = (
    p, *, lambda_=1.0, sigma=1.0, dim=4, dt=1e-3, horizon=2.0, samples=10_000,
    trunc_m=None, start=None, record_every=1, seed=0,
))]
#[allow(clippy::too_many_arguments)]
fn simulate_limit(
    py: Python<'_>,
    p: f64,
    lambda_: f64,
    sigma: f64,
    dim: usize,
    dt: f64,
    horizon: f64,
    samples: usize,
    trunc_m: Option<f64>,
    start: Option<Vec<f64>>,
    record_every: usize,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut params = LimitParams::new(lambda_, sigma, dim, dt, horizon, samples);
    params.record_every = record_every;
    if let Some(x) = start {
        params.init = LimitInit::Point(x);
    }
    let traj = py
        .detach(|| match trunc_m {
            None => meanfield::simulate_limit_standard(&params, p, seed),
            Some(m) => {
                params.trunc_m = m;
                meanfield::simulate_limit_truncated(&params, p, seed)
            }
        })
        .map_err(to_py)?;
    Ok((traj.times, traj.moments, traj.stderr))
}

#[pyfunction]
fn rate_standard(lambda_: f64, sigma: f64, dim: usize, p: f64) -> f64 {
    meanfield::rate_standard(lambda_, sigma, dim, p)
}

#[pyfunction]
fn bound_truncated(lambda_: f64, sigma: f64, trunc_m: f64, dim: usize, p: f64, t: f64, initial_moment: f64) -> f64 {
    meanfield::bound_truncated(lambda_, sigma, trunc_m, dim, p, t, initial_moment)
}

#[pyfunction]
fn threshold_exponent(lambda_: f64, sigma: f64, dim: usize) -> PyResult<f64> {
    meanfield::threshold_exponent(lambda_, sigma, dim).map_err(to_py)
}

#[pymodule]
fn cbo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyObjective>()?;
    m.add_function(wrap_pyfunction!(consensus_point, m)?)?;
    m.add_function(wrap_pyfunction!(project_ball, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(success_rate, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_limit, m)?)?;
    m.add_function(wrap_pyfunction!(rate_standard, m)?)?;
    m.add_function(wrap_pyfunction!(bound_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_exponent, m)?)?;
    Ok(())
}
