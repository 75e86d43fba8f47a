//! Full optimizer runs: sample `ρ₀`, iterate K steps, score the final mean.

use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{CboError, Result};
use crate::noise::{fill_gaussian_increments, CboRng};
use crate::objectives::{eval_batch, Objective};
use crate::params::CboParams;
use crate::step::step;

/// Success radius used when none is given.
pub const DEFAULT_TOLERANCE: f64 = 0.1;

/// A run whose particles leave `[-1e150, 1e150]^d` is stopped and counted as
/// diverged; beyond this, objective evaluations start to overflow.
pub const DIVERGENCE_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub tolerance: f64,
    pub record_trace: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { tolerance: DEFAULT_TOLERANCE, record_trace: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Consensus point used in this step.
    pub consensus: Vec<f64>,
    /// `‖(1/N)Σ Vⁱ − v*‖₂` after the step.
    pub mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub final_mean: Vec<f64>,
    pub distance_to_minimizer: f64,
    pub success: bool,
    /// Step after which the ensemble exceeded [`DIVERGENCE_LIMIT`].
    pub diverged_at_step: Option<usize>,
    pub trace: Option<Vec<TraceEntry>>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Runs the optimizer with the default tolerance and no trace.
pub fn run<O: Objective + ?Sized>(params: &CboParams, objective: &O, seed: u64) -> Result<RunOutcome> {
    run_with(params, objective, seed, &RunOptions::default())
}

pub fn run_with<O: Objective + ?Sized>(
    params: &CboParams,
    objective: &O,
    seed: u64,
    options: &RunOptions,
) -> Result<RunOutcome> {
    params.validate()?;
    if objective.dim() != params.dim() {
        return Err(CboError::DimensionMismatch { expected: objective.dim(), actual: params.dim() });
    }
    if !(options.tolerance >= 0.0) {
        return Err(CboError::invalid("tolerance", "must be nonnegative"));
    }

    let mut rng = CboRng::seed_from_u64(seed);
    let mut ensemble = Ensemble::sample(&params.init, params.n_particles, &mut rng)?;
    let mut noise = vec![0.0; ensemble.as_flat().len()];
    let mut trace = options.record_trace.then(|| Vec::with_capacity(params.n_steps));
    let v_star = objective.minimizer();
    let mut diverged_at_step = None;

    for k in 0..params.n_steps {
        let at_step = |e: CboError| CboError::AtStep { step: k, source: Box::new(e) };
        let values = eval_batch(objective, &ensemble).map_err(at_step)?;
        fill_gaussian_increments(&mut rng, &mut noise, params.dt);
        let (next, consensus) = step(&ensemble, &values, params, &noise).map_err(at_step)?;
        ensemble = next;
        if let Some(trace) = trace.as_mut() {
            trace.push(TraceEntry {
                consensus: consensus.point,
                mean_distance: distance(&ensemble.mean(), v_star),
            });
        }
        if ensemble.as_flat().iter().any(|x| x.abs() > DIVERGENCE_LIMIT) {
            diverged_at_step = Some(k);
            break;
        }
    }

    let final_mean = ensemble.mean();
    let distance_to_minimizer = match diverged_at_step {
        Some(_) => f64::INFINITY,
        None => distance(&final_mean, v_star),
    };
    Ok(RunOutcome {
        success: diverged_at_step.is_none() && distance_to_minimizer <= options.tolerance,
        diverged_at_step,
        final_mean,
        distance_to_minimizer,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::InitLaw;
    use crate::objectives::make_objective;
    use crate::params::NoiseMode;

    fn params(dim: usize) -> CboParams {
        CboParams {
            lambda: 1.0,
            sigma: 0.3,
            alpha: 1e5,
            dt: 0.02,
            trunc_m: 1.0,
            proj_r: f64::INFINITY,
            proj_center: vec![0.0; dim],
            noise_mode: NoiseMode::Isotropic,
            n_particles: 50,
            n_steps: 50,
            init: InitLaw::gaussian(vec![0.0; dim], 1.0),
        }
    }

    struct Sphere(usize, Vec<f64>);

    impl Objective for Sphere {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval(&self, v: &[f64]) -> f64 {
            v.iter().map(|x| x * x).sum()
        }
        fn minimizer(&self) -> &[f64] {
            &self.1
        }
        fn min_value(&self) -> f64 {
            0.0
        }
    }

    struct Exploding;

    impl Objective for Exploding {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, v: &[f64]) -> f64 {
            if v[0] > 0.0 { f64::NAN } else { 0.0 }
        }
        fn minimizer(&self) -> &[f64] {
            &[0.0]
        }
        fn min_value(&self) -> f64 {
            0.0
        }
    }

    #[test]
    fn zero_steps_returns_initial_mean() {
        let mut p = params(3);
        p.n_steps = 0;
        let f = make_objective("ackley", 3, None).unwrap();
        let out = run(&p, &f, 5).unwrap();
        let mut rng = CboRng::seed_from_u64(5);
        let e = Ensemble::sample(&p.init, p.n_particles, &mut rng).unwrap();
        assert_eq!(out.final_mean, e.mean());
    }

    #[test]
    fn deterministic_quadratic_contracts() {
        let mut p = params(2);
        p.sigma = 0.0;
        p.alpha = 1.0;
        p.n_steps = 400;
        p.init = InitLaw::gaussian(vec![0.0; 2], 0.01);
        let f = Sphere(2, vec![0.0, 0.0]);
        let opts = RunOptions { tolerance: 0.1, record_trace: true };
        let out = run_with(&p, &f, 9, &opts).unwrap();
        assert!(out.success);
        let trace = out.trace.unwrap();
        assert_eq!(trace.len(), 400);
        assert!(trace.last().unwrap().mean_distance <= trace[0].mean_distance);
    }

    #[test]
    fn reproducible() {
        let p = params(4);
        let f = make_objective("rastrigin", 4, None).unwrap();
        assert_eq!(run(&p, &f, 1).unwrap(), run(&p, &f, 1).unwrap());
        assert_ne!(run(&p, &f, 1).unwrap(), run(&p, &f, 2).unwrap());
    }

    #[test]
    fn non_finite_objective_reports_step() {
        let mut p = params(1);
        p.init = InitLaw::gaussian(vec![-50.0], 1.0);
        p.sigma = 0.0;
        p.n_steps = 5;
        assert!(run(&p, &Exploding, 0).is_ok());
        p.init = InitLaw::gaussian(vec![0.0], 1.0);
        let err = run(&p, &Exploding, 0).unwrap_err();
        assert!(matches!(err, CboError::AtStep { step: 0, .. }), "{err}");
    }

    #[test]
    fn dimension_mismatch() {
        let f = make_objective("ackley", 3, None).unwrap();
        assert!(run(&params(2), &f, 0).is_err());
    }

    #[test]
    fn infinite_tolerance_always_succeeds() {
        let mut p = params(2);
        p.sigma = 2.0;
        p.trunc_m = f64::INFINITY;
        let f = make_objective("rastrigin", 2, None).unwrap();
        let opts = RunOptions { tolerance: f64::INFINITY, record_trace: false };
        assert!(run_with(&p, &f, 3, &opts).unwrap().success);
    }

    #[test]
    fn blow_up_is_a_failed_run() {
        let mut p = params(4);
        p.sigma = 30.0;
        p.dt = 0.01;
        p.trunc_m = f64::INFINITY;
        p.n_steps = 5000;
        let f = make_objective("ackley", 4, None).unwrap();
        let out = run(&p, &f, 3).unwrap();
        assert!(out.diverged_at_step.is_some());
        assert!(!out.success);
        assert!(out.distance_to_minimizer.is_infinite());
    }
}
