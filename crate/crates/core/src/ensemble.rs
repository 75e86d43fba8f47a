//! Particle ensembles and their initialization law.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CboError, Result};

/// `n_particles` positions in `dim` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    positions: Vec<f64>,
    n_particles: usize,
    dim: usize,
}

impl Ensemble {
    /// Builds an ensemble from row-major coordinates.
    pub fn from_flat(positions: Vec<f64>, n_particles: usize, dim: usize) -> Result<Self> {
        if n_particles == 0 {
            return Err(CboError::invalid("n_particles", "must be at least 1"));
        }
        if dim == 0 {
            return Err(CboError::invalid("dim", "must be at least 1"));
        }
        if positions.len() != n_particles * dim {
            return Err(CboError::DimensionMismatch {
                expected: n_particles * dim,
                actual: positions.len(),
            });
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(CboError::invalid("positions", "coordinates must be finite"));
        }
        Ok(Self { positions, n_particles, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut flat = Vec::with_capacity(n * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(CboError::DimensionMismatch { expected: dim, actual: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(flat, n, dim)
    }

    /// Draws `n_particles` i.i.d. samples from `init`.
    pub fn sample<R: Rng + ?Sized>(init: &InitLaw, n_particles: usize, rng: &mut R) -> Result<Self> {
        init.validate()?;
        let dim = init.mean.len();
        let std = init.variance_per_coord.sqrt();
        let mut positions = Vec::with_capacity(n_particles * dim);
        for _ in 0..n_particles {
            for &m in &init.mean {
                let z: f64 = rng.sample(StandardNormal);
                positions.push(m + std * z);
            }
        }
        Self::from_flat(positions, n_particles, dim)
    }

    pub fn n_particles(&self) -> usize {
        self.n_particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.positions
    }

    pub fn into_flat(self) -> Vec<f64> {
        self.positions
    }

    /// Empirical mean `(1/N) Σ Vⁱ`.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for row in self.rows() {
            for (m, x) in mean.iter_mut().zip(row) {
                *m += x;
            }
        }
        let n = self.n_particles as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }

    /// Replaces the positions after an update. The caller guarantees the
    /// shape is unchanged; finiteness is re-checked.
    pub(crate) fn with_positions(&self, positions: Vec<f64>) -> Result<Self> {
        Self::from_flat(positions, self.n_particles, self.dim)
    }
}

/// Initialization law `ρ₀`: i.i.d. Gaussian with isotropic covariance
/// `variance_per_coord · I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitLaw {
    pub kind: InitKind,
    pub mean: Vec<f64>,
    pub variance_per_coord: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    GaussianIid,
}

impl InitLaw {
    pub fn gaussian(mean: Vec<f64>, variance_per_coord: f64) -> Self {
        Self { kind: InitKind::GaussianIid, mean, variance_per_coord }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mean.is_empty() {
            return Err(CboError::invalid("init.mean", "dimension must be at least 1"));
        }
        if self.mean.iter().any(|m| !m.is_finite()) {
            return Err(CboError::invalid("init.mean", "must be finite"));
        }
        if !(self.variance_per_coord > 0.0 && self.variance_per_coord.is_finite()) {
            return Err(CboError::invalid("init.variance_per_coord", "must be positive and finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Ensemble::from_flat(vec![], 0, 1).is_err());
        assert!(Ensemble::from_flat(vec![1.0], 1, 0).is_err());
        assert!(Ensemble::from_flat(vec![1.0, 2.0, 3.0], 2, 2).is_err());
        assert!(Ensemble::from_flat(vec![f64::NAN], 1, 1).is_err());
        assert!(Ensemble::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn mean_of_rows() {
        let e = Ensemble::from_rows(&[[0.0, 2.0], [2.0, 4.0]]).unwrap();
        assert_eq!(e.mean(), vec![1.0, 3.0]);
        assert_eq!(e.particle(1), &[2.0, 4.0]);
    }

    #[test]
    fn sampling_matches_law() {
        let init = InitLaw::gaussian(vec![1.0, -2.0], 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = Ensemble::sample(&init, 20_000, &mut rng).unwrap();
        let mean = e.mean();
        // std of the sample mean is 2/sqrt(20000) ≈ 0.014
        assert!((mean[0] - 1.0).abs() < 0.07);
        assert!((mean[1] + 2.0).abs() < 0.07);
        let var0 = e.rows().map(|r| (r[0] - mean[0]).powi(2)).sum::<f64>() / 20_000.0;
        assert!((var0 - 4.0).abs() < 0.2);
    }

    #[test]
    fn init_law_validation() {
        assert!(InitLaw::gaussian(vec![0.0], 0.0).validate().is_err());
        assert!(InitLaw::gaussian(vec![], 1.0).validate().is_err());
        assert!(InitLaw::gaussian(vec![0.0], 1.0).validate().is_ok());
    }
}
