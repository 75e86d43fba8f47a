//! One Euler–Maruyama step of the projected, noise-truncated particle system.

use crate::consensus::{consensus_point, ConsensusResult};
use crate::ensemble::Ensemble;
use crate::error::{CboError, Result};
use crate::params::{CboParams, NoiseMode};
use crate::projection::project_ball;

/// Isotropic update
/// `Vⁱ ← Vⁱ − Δtλ(Vⁱ − P(v_α)) + σ(‖Vⁱ − v_α‖₂ ∧ M) Bⁱ`.
///
/// `noise` holds the `N × d` increments `Bⁱ ~ N(0, Δt I)`, row-major.
pub fn step_isotropic(
    ensemble: &Ensemble,
    values: &[f64],
    params: &CboParams,
    noise: &[f64],
) -> Result<Ensemble> {
    step_with(ensemble, values, params, noise, NoiseMode::Isotropic).map(|(e, _)| e)
}

/// Anisotropic update
/// `Vⁱ ← Vⁱ − Δtλ(Vⁱ − P(v_α)) + σ D_M(Vⁱ − v_α) Bⁱ` with
/// `D_M(z) = diag(|z_j| ∧ M)`.
pub fn step_anisotropic(
    ensemble: &Ensemble,
    values: &[f64],
    params: &CboParams,
    noise: &[f64],
) -> Result<Ensemble> {
    step_with(ensemble, values, params, noise, NoiseMode::Anisotropic).map(|(e, _)| e)
}

/// Dispatches on `params.noise_mode` and also returns the consensus used.
pub fn step(
    ensemble: &Ensemble,
    values: &[f64],
    params: &CboParams,
    noise: &[f64],
) -> Result<(Ensemble, ConsensusResult)> {
    step_with(ensemble, values, params, noise, params.noise_mode)
}

fn step_with(
    ensemble: &Ensemble,
    values: &[f64],
    params: &CboParams,
    noise: &[f64],
    mode: NoiseMode,
) -> Result<(Ensemble, ConsensusResult)> {
    let dim = ensemble.dim();
    if noise.len() != ensemble.as_flat().len() {
        return Err(CboError::DimensionMismatch {
            expected: ensemble.as_flat().len(),
            actual: noise.len(),
        });
    }
    if params.proj_center.len() != dim {
        return Err(CboError::DimensionMismatch { expected: dim, actual: params.proj_center.len() });
    }

    let consensus = consensus_point(ensemble, values, params.alpha)?;
    let v_alpha = &consensus.point;
    let target = project_ball(v_alpha, &params.proj_center, params.proj_r);
    let drift = params.dt * params.lambda;
    let (sigma, m) = (params.sigma, params.trunc_m);

    let mut next = Vec::with_capacity(ensemble.as_flat().len());
    for (row, b) in ensemble.rows().zip(noise.chunks_exact(dim)) {
        match mode {
            NoiseMode::Isotropic => {
                let dist = row
                    .iter()
                    .zip(v_alpha)
                    .map(|(x, c)| (x - c).powi(2))
                    .sum::<f64>()
                    .sqrt();
                let amp = sigma * dist.min(m);
                for j in 0..dim {
                    next.push(row[j] - drift * (row[j] - target[j]) + amp * b[j]);
                }
            }
            NoiseMode::Anisotropic => {
                for j in 0..dim {
                    let amp = sigma * (row[j] - v_alpha[j]).abs().min(m);
                    next.push(row[j] - drift * (row[j] - target[j]) + amp * b[j]);
                }
            }
        }
    }
    Ok((ensemble.with_positions(next)?, consensus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::InitLaw;

    fn params(dim: usize) -> CboParams {
        CboParams {
            lambda: 1.0,
            sigma: 0.0,
            alpha: 1.0,
            dt: 0.5,
            trunc_m: f64::INFINITY,
            proj_r: f64::INFINITY,
            proj_center: vec![0.0; dim],
            noise_mode: NoiseMode::Isotropic,
            n_particles: 2,
            n_steps: 1,
            init: InitLaw::gaussian(vec![0.0; dim], 1.0),
        }
    }

    #[test]
    fn deterministic_drift_example() {
        let e = Ensemble::from_rows(&[[0.0], [1.0]]).unwrap();
        let next = step_isotropic(&e, &[0.0, 0.0], &params(1), &[0.3, -0.7]).unwrap();
        assert_eq!(next.as_flat(), &[0.25, 0.75]);
    }

    #[test]
    fn coincident_particles_unchanged() {
        let e = Ensemble::from_rows(&[[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]]).unwrap();
        let mut p = params(2);
        p.sigma = 3.0;
        let noise = [0.1, 0.2, -0.3, 0.4, 0.5, -0.6];
        let next = step_isotropic(&e, &[1.0, 2.0, 3.0], &p, &noise).unwrap();
        assert_eq!(next, e);
        let next = step_anisotropic(&e, &[1.0, 2.0, 3.0], &p, &noise).unwrap();
        assert_eq!(next, e);
    }

    #[test]
    fn single_particle_inside_ball_is_fixed() {
        let e = Ensemble::from_rows(&[[0.4, -0.2, 0.1]]).unwrap();
        let mut p = params(3);
        p.sigma = 2.0;
        p.trunc_m = 0.5;
        p.proj_r = 1.0;
        p.dt = 0.1;
        let noise = [1.0, -2.0, 0.5];
        assert_eq!(step_isotropic(&e, &[3.0], &p, &noise).unwrap(), e);
        assert_eq!(step_anisotropic(&e, &[3.0], &p, &noise).unwrap(), e);
    }

    #[test]
    fn single_particle_outside_ball_is_pulled_in() {
        let e = Ensemble::from_rows(&[[3.0, 4.0]]).unwrap();
        let mut p = params(2);
        p.proj_r = 1.0;
        let next = step_isotropic(&e, &[0.0], &p, &[0.0, 0.0]).unwrap();
        // target (0.6, 0.8), half-way step
        assert!((next.as_flat()[0] - 1.8).abs() < 1e-15);
        assert!((next.as_flat()[1] - 2.4).abs() < 1e-15);
    }

    #[test]
    fn anisotropic_coordinatewise_truncation() {
        // V¹ − v_α = (3, 0.5) with M = 1 gives diagonal factors (1, 0.5).
        let e = Ensemble::from_rows(&[[3.0, 0.5], [0.0, 0.0]]).unwrap();
        let mut p = params(2);
        p.alpha = 1e5;
        p.sigma = 1.0;
        p.trunc_m = 1.0;
        p.dt = 0.01;
        p.lambda = 1e-12;
        let noise = [1.0, 1.0, 0.0, 0.0];
        let next = step_anisotropic(&e, &[10.0, 0.0], &p, &noise).unwrap();
        let row = next.particle(0);
        assert!((row[0] - 3.0 - 1.0).abs() < 1e-9, "{row:?}");
        assert!((row[1] - 0.5 - 0.5).abs() < 1e-9, "{row:?}");
    }

    #[test]
    fn isotropic_norm_truncation() {
        let e = Ensemble::from_rows(&[[3.0, 4.0], [0.0, 0.0]]).unwrap();
        let mut p = params(2);
        p.alpha = 1e5;
        p.sigma = 2.0;
        p.lambda = 1e-12;
        p.dt = 0.01;
        p.trunc_m = 1.0;
        let next = step_isotropic(&e, &[10.0, 0.0], &p, &[1.0, -1.0, 0.0, 0.0]).unwrap();
        let row = next.particle(0);
        assert!((row[0] - 5.0).abs() < 1e-9 && (row[1] - 2.0).abs() < 1e-9, "{row:?}");
        p.trunc_m = f64::INFINITY;
        let next = step_isotropic(&e, &[10.0, 0.0], &p, &[1.0, -1.0, 0.0, 0.0]).unwrap();
        let row = next.particle(0);
        assert!((row[0] - 13.0).abs() < 1e-9 && (row[1] + 6.0).abs() < 1e-9, "{row:?}");
    }

    #[test]
    fn noise_shape_checked() {
        let e = Ensemble::from_rows(&[[0.0], [1.0]]).unwrap();
        assert!(step_isotropic(&e, &[0.0, 0.0], &params(1), &[0.0]).is_err());
    }
}
