//! Invariant checks shared by the property suite and the acceptance gate.
#![allow(dead_code)]

use cbo_core::{
    consensus_point, gaussian_increments, make_objective, project_ball, run, step_anisotropic,
    step_isotropic, CboParams, CboRng, Ensemble, InitLaw, NoiseMode,
};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::SeedableRng;

pub const CASES: u32 = 256;

pub fn config() -> ProptestConfig {
    ProptestConfig { cases: CASES, ..ProptestConfig::default() }
}

/// `(n, d, positions, values)` with finite entries.
pub fn ensemble_and_values() -> impl Strategy<Value = (Ensemble, Vec<f64>)> {
    (1usize..24, 1usize..6).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(-50.0..50.0f64, n * d),
            prop::collection::vec(-20.0..20.0f64, n),
        )
            .prop_map(move |(pos, vals)| (Ensemble::from_flat(pos, n, d).unwrap(), vals))
    })
}

pub fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

pub fn params(dim: usize, sigma: f64, trunc_m: f64, mode: NoiseMode) -> CboParams {
    CboParams {
        lambda: 1.0,
        sigma,
        alpha: 10.0,
        dt: 0.05,
        trunc_m,
        proj_r: f64::INFINITY,
        proj_center: vec![0.0; dim],
        noise_mode: mode,
        n_particles: 1,
        n_steps: 1,
        init: InitLaw::gaussian(vec![0.0; dim], 1.0),
    }
}

pub fn check_convex_hull(e: &Ensemble, values: &[f64], alpha: f64) -> Result<(), TestCaseError> {
    let c = consensus_point(e, values, alpha).unwrap();
    for j in 0..e.dim() {
        let col: Vec<f64> = e.rows().map(|r| r[j]).collect();
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lo <= c.point[j] && c.point[j] <= hi, "coord {j}: {} not in [{lo}, {hi}]", c.point[j]);
    }
    Ok(())
}

/// Values are multiples of 1/8 and `shift` is an integer, so every
/// difference `f − min f` is exact before and after the shift.
pub fn check_offset_invariance(
    e: &Ensemble,
    eighths: &[i32],
    shift: i32,
    alpha: f64,
) -> Result<(), TestCaseError> {
    let values: Vec<f64> = eighths.iter().map(|&k| k as f64 / 8.0).collect();
    let shifted: Vec<f64> = values.iter().map(|v| v + shift as f64).collect();
    let a = consensus_point(e, &values, alpha).unwrap();
    let b = consensus_point(e, &shifted, alpha).unwrap();
    let bits = |p: &[f64]| p.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    prop_assert_eq!(bits(&a.point), bits(&b.point));
    Ok(())
}

/// The minimizing particle `best` beats every other value by at least `1e-3`.
pub fn check_laplace_limit(e: &Ensemble, best: usize, gaps: &[f64]) -> Result<(), TestCaseError> {
    let n = e.n_particles();
    let best = best % n;
    let values: Vec<f64> = (0..n).map(|i| if i == best { 0.5 } else { 0.5 + gaps[i % gaps.len()] }).collect();
    let c = consensus_point(e, &values, 1e6).unwrap();
    prop_assert_eq!(c.argmin_index, best);
    for (x, y) in c.point.iter().zip(e.particle(best)) {
        prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
    }
    Ok(())
}

pub fn check_projection(v: &[f64], center: &[f64], radius: f64) -> Result<(), TestCaseError> {
    let p = project_ball(v, center, radius);
    let dist = p.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    prop_assert!(dist <= radius, "{dist} > {radius}");
    let q = project_ball(&p, center, radius);
    prop_assert_eq!(p, q);
    Ok(())
}

pub fn check_single_particle(
    x: &[f64],
    value: f64,
    sigma: f64,
    trunc_m: f64,
    noise: &[f64],
) -> Result<(), TestCaseError> {
    let e = Ensemble::from_flat(x.to_vec(), 1, x.len()).unwrap();
    for mode in [NoiseMode::Isotropic, NoiseMode::Anisotropic] {
        let p = params(x.len(), sigma, trunc_m, mode);
        let next = match mode {
            NoiseMode::Isotropic => step_isotropic(&e, &[value], &p, noise).unwrap(),
            NoiseMode::Anisotropic => step_anisotropic(&e, &[value], &p, noise).unwrap(),
        };
        prop_assert_eq!(next.as_flat(), e.as_flat());
    }
    Ok(())
}

/// The diffusive part of each particle's displacement is at most
/// `σM‖Bⁱ‖` (isotropic) or `σM|Bⁱ_j|` per coordinate (anisotropic).
pub fn check_truncation_bound(
    e: &Ensemble,
    values: &[f64],
    sigma: f64,
    trunc_m: f64,
    noise_seed: u64,
) -> Result<(), TestCaseError> {
    let d = e.dim();
    let mut rng = CboRng::seed_from_u64(noise_seed);
    let noise = gaussian_increments(&mut rng, e.n_particles(), d, 0.05);
    for mode in [NoiseMode::Isotropic, NoiseMode::Anisotropic] {
        let p = params(d, sigma, trunc_m, mode);
        let target = consensus_point(e, values, p.alpha).unwrap().point;
        let next = match mode {
            NoiseMode::Isotropic => step_isotropic(e, values, &p, &noise).unwrap(),
            NoiseMode::Anisotropic => step_anisotropic(e, values, &p, &noise).unwrap(),
        };
        for ((x, y), b) in e.rows().zip(next.rows()).zip(noise.chunks_exact(d)) {
            let diffusion: Vec<f64> = (0..d)
                .map(|j| y[j] - (x[j] - p.dt * p.lambda * (x[j] - target[j])))
                .collect();
            match mode {
                NoiseMode::Isotropic => {
                    let norm = |v: &[f64]| v.iter().map(|z| z * z).sum::<f64>().sqrt();
                    let bound = sigma * trunc_m * norm(b);
                    prop_assert!(norm(&diffusion) <= bound * (1.0 + 1e-9) + 1e-9);
                }
                NoiseMode::Anisotropic => {
                    for j in 0..d {
                        let bound = sigma * trunc_m * b[j].abs();
                        prop_assert!(diffusion[j].abs() <= bound * (1.0 + 1e-9) + 1e-9);
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn check_determinism(seed: u64, dim: usize, sigma: f64, trunc_m: f64) -> Result<(), TestCaseError> {
    let objective = make_objective("rastrigin", dim, None).unwrap();
    let mut p = params(dim, sigma, trunc_m, NoiseMode::Isotropic);
    p.n_particles = 12;
    p.n_steps = 15;
    let a = run(&p, &objective, seed).unwrap();
    let b = run(&p, &objective, seed).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}
