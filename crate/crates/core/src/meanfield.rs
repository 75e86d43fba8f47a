//! Monte Carlo diagnostics for the large-`α` single-particle limits.
//!
//! Replacing the consensus point by the minimizer `v*` turns the mean-field
//! dynamics into a single SDE. Without truncation,
//!
//! ```text
//! dY = −λ(Y − v*) dt + σ‖Y − v*‖₂ dB,    E‖Y_t − v*‖^p = exp(p(−λ + σ²(p+d−2)/2) t) E‖Y_0 − v*‖^p
//! ```
//!
//! so moments of order above `p* = 2λ/σ² − d + 2` blow up. With the diffusion
//! capped at `σM`, every moment of order `p ≥ 2` stays below
//! `e^{−λt} E‖Y_0 − v*‖^p + σ^p M^p (d+p−2)^{p/2} / λ^{p/2}`.
//!
//! The simulators below integrate both SDEs with Euler–Maruyama and report
//! the empirical `p`-th moment about `v*` over time.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ensemble::InitLaw;
use crate::error::{CboError, Result};
use crate::noise::rng_for;

/// Trajectories whose distance to `v*` exceeds this are stopped.
pub const ESCAPE_RADIUS: f64 = 1e150;

/// Trajectories per reduction block. Fixed so that the summation order, and
/// hence every output bit, is independent of the thread count.
const BLOCK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitInit {
    /// Every trajectory starts at the same point.
    Point(Vec<f64>),
    Gaussian(InitLaw),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitParams {
    pub lambda: f64,
    pub sigma: f64,
    #[serde(with = "crate::serde_inf")]
    pub trunc_m: f64,
    pub dim: usize,
    pub dt: f64,
    pub horizon: f64,
    pub samples: usize,
    pub init: LimitInit,
    pub minimizer: Vec<f64>,
    /// Record the moment every `record_every` steps (and at `t = 0`).
    pub record_every: usize,
}

impl LimitParams {
    /// Gaussian start `N(v* + e₁, variance·I)` around the origin minimizer.
    pub fn new(lambda: f64, sigma: f64, dim: usize, dt: f64, horizon: f64, samples: usize) -> Self {
        let mut mean = vec![0.0; dim];
        if let Some(m) = mean.first_mut() {
            *m = 1.0;
        }
        Self {
            lambda,
            sigma,
            trunc_m: f64::INFINITY,
            dim,
            dt,
            horizon,
            samples,
            init: LimitInit::Gaussian(InitLaw::gaussian(mean, 0.1)),
            minimizer: vec![0.0; dim],
            record_every: 1,
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(CboError::invalid("lambda", "must be positive"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(CboError::invalid("sigma", "must be nonnegative"));
        }
        if !(self.trunc_m > 0.0) {
            return Err(CboError::invalid("M", "must be positive or inf"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CboError::invalid("dt", "must be positive"));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(CboError::invalid("horizon", "must be at least dt"));
        }
        if self.samples == 0 {
            return Err(CboError::invalid("samples", "must be at least 1"));
        }
        if self.record_every == 0 {
            return Err(CboError::invalid("record_every", "must be at least 1"));
        }
        if self.dim == 0 {
            return Err(CboError::invalid("dim", "must be at least 1"));
        }
        let init_dim = match &self.init {
            LimitInit::Point(y) => y.len(),
            LimitInit::Gaussian(law) => {
                law.validate()?;
                law.mean.len()
            }
        };
        for len in [init_dim, self.minimizer.len()] {
            if len != self.dim {
                return Err(CboError::DimensionMismatch { expected: self.dim, actual: len });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentTrajectory {
    pub p: f64,
    pub times: Vec<f64>,
    /// Sample mean of `‖Y_t − v*‖^p` over trajectories.
    pub moments: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Fraction of trajectories that escaped past [`ESCAPE_RADIUS`].
    pub stopped_fraction: f64,
    /// True when the series ends before the horizon because a trajectory
    /// escaped or a moment overflowed.
    pub truncated: bool,
}

impl MomentTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Writes `t,moment,stderr` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,moment,stderr")?;
        for ((t, m), s) in self.times.iter().zip(&self.moments).zip(&self.stderr) {
            writeln!(w, "{t},{m},{s}")?;
        }
        Ok(())
    }

    /// Least-squares slope of `log moment` against `t`, using only the points
    /// within the central `fraction` of the recorded time span.
    pub fn fit_log_slope(&self, fraction: f64) -> Result<f64> {
        let (Some(&t0), Some(&t1)) = (self.times.first(), self.times.last()) else {
            return Err(CboError::invalid("trajectory", "empty"));
        };
        let margin = (1.0 - fraction) / 2.0 * (t1 - t0);
        let (lo, hi) = (t0 + margin, t1 - margin);
        let pts: Vec<(f64, f64)> = self
            .times
            .iter()
            .zip(&self.moments)
            .filter(|(t, m)| **t >= lo && **t <= hi && **m > 0.0)
            .map(|(t, m)| (*t, m.ln()))
            .collect();
        if pts.len() < 2 {
            return Err(CboError::invalid("trajectory", "fewer than two points in fit window"));
        }
        let n = pts.len() as f64;
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
        let sxx: f64 = pts.iter().map(|(t, _)| (t - mt).powi(2)).sum();
        Ok(sxy / sxx)
    }
}

/// Exponent `p(−λ + σ²(p+d−2)/2)` of the exact moment evolution without
/// truncation.
pub fn rate_standard(lambda: f64, sigma: f64, dim: usize, p: f64) -> f64 {
    p * (-lambda + sigma * sigma * (p + dim as f64 - 2.0) / 2.0)
}

/// Grönwall bound `e^{−λt} m₀ + σ^p M^p (d+p−2)^{p/2} / λ^{p/2}` on the
/// `p`-th moment of the truncated limit.
pub fn bound_truncated(
    lambda: f64,
    sigma: f64,
    trunc_m: f64,
    dim: usize,
    p: f64,
    t: f64,
    initial_moment: f64,
) -> f64 {
    let floor = (sigma * trunc_m).powf(p) * (dim as f64 + p - 2.0).powf(p / 2.0)
        / lambda.powf(p / 2.0);
    (-lambda * t).exp() * initial_moment + floor
}

/// Moment order `p* = 2λ/σ² − d + 2` at which the untruncated limit switches
/// from decay to blow-up.
pub fn threshold_exponent(lambda: f64, sigma: f64, dim: usize) -> Result<f64> {
    if sigma == 0.0 {
        return Err(CboError::NoFiniteThreshold);
    }
    Ok(2.0 * lambda / (sigma * sigma) - dim as f64 + 2.0)
}

/// Simulates `dY = −λ(Y − v*)dt + σ‖Y − v*‖₂ dB`; `params.trunc_m` is ignored.
pub fn simulate_limit_standard(params: &LimitParams, p: f64, seed: u64) -> Result<MomentTrajectory> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(CboError::invalid("p", "must be at least 1"));
    }
    simulate(params, f64::INFINITY, p, seed)
}

/// Simulates `dY = −λ(Y − v*)dt + σ(‖Y − v*‖₂ ∧ M) dB` with finite `M`.
pub fn simulate_limit_truncated(params: &LimitParams, p: f64, seed: u64) -> Result<MomentTrajectory> {
    if !(p >= 2.0 && p.is_finite()) {
        return Err(CboError::invalid("p", "must be at least 2"));
    }
    if !params.trunc_m.is_finite() {
        return Err(CboError::invalid("M", "must be finite for the truncated limit"));
    }
    simulate(params, params.trunc_m, p, seed)
}

/// Per-time running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(a: Welford, b: Welford) -> Welford {
        if a.n == 0 {
            return b;
        }
        if b.n == 0 {
            return a;
        }
        let n = a.n + b.n;
        let delta = b.mean - a.mean;
        let (na, nb, nf) = (a.n as f64, b.n as f64, n as f64);
        Welford {
            n,
            mean: a.mean + delta * nb / nf,
            m2: a.m2 + b.m2 + delta * delta * na * nb / nf,
        }
    }
}

struct BlockStats {
    slots: Vec<Welford>,
    /// First slot at which some trajectory of the block stopped contributing.
    first_stop: Option<usize>,
    stopped: usize,
}

fn merge_blocks(a: BlockStats, b: BlockStats) -> BlockStats {
    let slots = a.slots.iter().zip(&b.slots).map(|(x, y)| Welford::merge(*x, *y)).collect();
    let first_stop = match (a.first_stop, b.first_stop) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    BlockStats { slots, first_stop, stopped: a.stopped + b.stopped }
}

/// Deterministic pairwise reduction in index order.
fn tree_reduce(mut items: Vec<BlockStats>) -> Option<BlockStats> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => merge_blocks(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop()
}

fn simulate(params: &LimitParams, cap: f64, p: f64, seed: u64) -> Result<MomentTrajectory> {
    params.validate()?;
    let n_steps = params.n_steps();
    let n_slots = n_steps / params.record_every + 1;
    let n_blocks = params.samples.div_ceil(BLOCK);

    let blocks: Vec<BlockStats> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * BLOCK;
            let end = (start + BLOCK).min(params.samples);
            let mut stats = BlockStats {
                slots: vec![Welford::default(); n_slots],
                first_stop: None,
                stopped: 0,
            };
            for traj in start..end {
                if let Some(slot) = simulate_one(params, cap, p, seed, traj as u64, n_steps, &mut stats.slots) {
                    stats.first_stop = Some(stats.first_stop.map_or(slot, |s| s.min(slot)));
                    stats.stopped += 1;
                }
            }
            stats
        })
        .collect();
    let total = tree_reduce(blocks).expect("at least one block");

    let kept = total.first_stop.unwrap_or(n_slots);
    let mut out = MomentTrajectory {
        p,
        times: Vec::with_capacity(kept),
        moments: Vec::with_capacity(kept),
        stderr: Vec::with_capacity(kept),
        stopped_fraction: total.stopped as f64 / params.samples as f64,
        truncated: kept < n_slots,
    };
    for (slot, w) in total.slots.iter().take(kept).enumerate() {
        let n = w.n as f64;
        let se = if w.n > 1 { (w.m2 / (n - 1.0)).sqrt() / n.sqrt() } else { 0.0 };
        out.times.push((slot * params.record_every) as f64 * params.dt);
        out.moments.push(w.mean);
        out.stderr.push(se);
    }
    Ok(out)
}

/// Integrates one trajectory, pushing `‖Y − v*‖^p` into `slots`. Returns the
/// slot from which the trajectory stopped contributing, if it escaped.
fn simulate_one(
    params: &LimitParams,
    cap: f64,
    p: f64,
    seed: u64,
    traj: u64,
    n_steps: usize,
    slots: &mut [Welford],
) -> Option<usize> {
    let mut rng = rng_for(seed, traj);
    let dim = params.dim;
    // Work in coordinates centred at v*.
    let mut z: Vec<f64> = match &params.init {
        LimitInit::Point(y) => y.iter().zip(&params.minimizer).map(|(a, b)| a - b).collect(),
        LimitInit::Gaussian(law) => {
            let std = law.variance_per_coord.sqrt();
            law.mean
                .iter()
                .zip(&params.minimizer)
                .map(|(m, v)| {
                    let g: f64 = rng.sample(StandardNormal);
                    m + std * g - v
                })
                .collect()
        }
    };
    let norm = |z: &[f64]| z.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sqrt_dt = params.dt.sqrt();
    let contraction = params.lambda * params.dt;

    let mut r = norm(&z);
    let record = |slot: usize, r: f64, slots: &mut [Welford]| -> bool {
        let m = r.powf(p);
        if m.is_finite() {
            slots[slot].push(m);
            true
        } else {
            false
        }
    };
    if !record(0, r, slots) {
        return Some(0);
    }
    for k in 1..=n_steps {
        let amp = params.sigma * r.min(cap) * sqrt_dt;
        for zj in z.iter_mut().take(dim) {
            let g: f64 = rng.sample(StandardNormal);
            *zj += -contraction * *zj + amp * g;
        }
        r = norm(&z);
        let slot = k / params.record_every;
        if !(r <= ESCAPE_RADIUS) {
            return Some(slot);
        }
        if k % params.record_every == 0 && !record(slot, r, slots) {
            return Some(slot);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_formula() {
        assert_eq!(rate_standard(1.0, 0.0, 7, 3.0), -3.0);
        assert_eq!(rate_standard(1.0, 1.0, 2, 2.0), 0.0);
        assert_eq!(rate_standard(1.0, 1.0, 4, 2.0), 2.0);
    }

    #[test]
    fn bound_formula() {
        assert_eq!(bound_truncated(1.0, 1.0, 1.0, 4, 2.0, 0.0, 0.0), 4.0);
        let t = 0.7;
        let b = bound_truncated(1.0, 1.0, 1.0, 4, 2.0, t, 3.0);
        assert!((b - ((-t).exp() * 3.0 + 4.0)).abs() < 1e-14);
        // p = 3: σ³M³(d+1)^{3/2}/λ^{3/2} with σ=2, M=0.5, d=3, λ=4
        let b = bound_truncated(4.0, 2.0, 0.5, 3, 3.0, 1e9, 5.0);
        assert!((b - 1.0).abs() < 1e-12, "{b}");
    }

    #[test]
    fn threshold() {
        assert!((threshold_exponent(1.0, 2f64.sqrt(), 1).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(threshold_exponent(1.0, 0.0, 3), Err(CboError::NoFiniteThreshold)));
        let a = threshold_exponent(1.0, 0.5, 3).unwrap();
        let b = threshold_exponent(3.0, 0.5 * 3f64.sqrt(), 3).unwrap();
        assert!((a - b).abs() < 1e-12);
        // σ²d > 2λ ⇒ second moment grows
        assert!(rate_standard(1.0, 1.0, 3, 2.0) > 0.0);
        assert!(threshold_exponent(1.0, 1.0, 3).unwrap() < 2.0);
    }

    #[test]
    fn dirac_start_moment_is_exact() {
        let mut params = LimitParams::new(1.0, 0.0, 3, 0.01, 0.01, 10);
        params.init = LimitInit::Point(vec![3.0, 2.0, 1.0]);
        params.minimizer = vec![1.0, 0.0, 0.0];
        let traj = simulate_limit_standard(&params, 3.0, 1).unwrap();
        // ‖(2, 2, 1)‖³ = 27
        assert_eq!(traj.moments[0], 27.0);
        assert_eq!(traj.stderr[0], 0.0);
    }

    #[test]
    fn deterministic_decay() {
        let mut params = LimitParams::new(1.0, 0.0, 1, 1e-6, 0.1, 1);
        params.init = LimitInit::Point(vec![2.0]);
        params.record_every = 1000;
        let traj = simulate_limit_standard(&params, 2.0, 0).unwrap();
        let ratio = traj.moments.last().unwrap() / traj.moments[0];
        let exact = (-2.0 * 0.1f64).exp();
        assert!((ratio / exact - 1.0).abs() < 1e-6, "{ratio} vs {exact}");
        params.trunc_m = 0.3;
        let trunc = simulate_limit_truncated(&params, 2.0, 0).unwrap();
        assert_eq!(trunc.moments, traj.moments);
    }

    #[test]
    fn large_cap_matches_standard() {
        let mut params = LimitParams::new(1.0, 0.8, 3, 1e-2, 1.0, 600);
        params.trunc_m = 1e9;
        let a = simulate_limit_standard(&params, 2.0, 4).unwrap();
        let b = simulate_limit_truncated(&params, 2.0, 4).unwrap();
        assert_eq!(a.moments.len(), b.moments.len());
        for (x, y) in a.moments.iter().zip(&b.moments) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0));
        }
    }

    #[test]
    fn independent_of_thread_count() {
        let params = LimitParams::new(1.0, 1.0, 2, 1e-2, 0.5, 1000);
        let a = simulate_limit_standard(&params, 2.0, 9).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| simulate_limit_standard(&params, 2.0, 9).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn escaping_trajectories_truncate_series() {
        let mut params = LimitParams::new(1.0, 6.0, 4, 1e-2, 40.0, 64);
        params.record_every = 10;
        let traj = simulate_limit_standard(&params, 2.0, 2).unwrap();
        assert!(traj.truncated);
        assert!(traj.stopped_fraction > 0.0);
        assert!(traj.moments.iter().all(|m| m.is_finite()));
        assert!(traj.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = LimitParams::new(1.0, 1.0, 2, 1e-2, 0.5, 10);
        assert!(simulate_limit_truncated(&params, 2.0, 0).is_err());
        assert!(simulate_limit_standard(&params, 0.5, 0).is_err());
        let mut bad = params.clone();
        bad.horizon = 1e-3;
        assert!(simulate_limit_standard(&bad, 2.0, 0).is_err());
        let mut bad = params;
        bad.minimizer = vec![0.0];
        assert!(simulate_limit_standard(&bad, 2.0, 0).is_err());
    }

    #[test]
    fn csv_layout() {
        let params = LimitParams::new(1.0, 0.5, 2, 0.1, 0.3, 4);
        let traj = simulate_limit_standard(&params, 2.0, 0).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,moment,stderr\n"));
        assert_eq!(text.lines().count(), traj.len() + 1);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn slope_fit_recovers_exponential() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let traj = MomentTrajectory {
            p: 2.0,
            moments: times.iter().map(|t| 3.0 * (1.5 * t).exp()).collect(),
            stderr: vec![0.0; times.len()],
            times,
            stopped_fraction: 0.0,
            truncated: false,
        };
        assert!((traj.fit_log_slope(0.8).unwrap() - 1.5).abs() < 1e-12);
    }
}
