//! Boltzmann-weighted consensus point.

use crate::ensemble::Ensemble;
use crate::error::{CboError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusResult {
    /// The weighted mean `v_α`.
    pub point: Vec<f64>,
    /// First particle attaining the smallest objective value.
    pub argmin_index: usize,
    /// Normalized weights `exp(−α(fᵢ − min f)) / Σⱼ exp(−α(fⱼ − min f))`.
    pub shifted_weights: Vec<f64>,
}

/// Computes `v_α = Σᵢ wᵢ Vⁱ` with weights proportional to `exp(−α fᵢ)`.
///
/// The weights are evaluated as `exp(−α(fᵢ − min f))`, so the best particle
/// always has unnormalized weight 1 and large `α` cannot underflow the
/// normalization. Adding a constant to every value leaves the result
/// unchanged whenever `fᵢ + c` is computed exactly.
pub fn consensus_point(ensemble: &Ensemble, values: &[f64], alpha: f64) -> Result<ConsensusResult> {
    let n = ensemble.n_particles();
    if values.len() != n {
        return Err(CboError::DimensionMismatch { expected: n, actual: values.len() });
    }
    if !(alpha > 0.0) {
        return Err(CboError::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(CboError::NonFiniteValue { index });
    }

    let mut argmin_index = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[argmin_index] {
            argmin_index = i;
        }
    }
    let f_min = values[argmin_index];

    let mut weights: Vec<f64> = values.iter().map(|&f| (-alpha * (f - f_min)).exp()).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);

    let dim = ensemble.dim();
    let mut point = vec![0.0; dim];
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for (row, &w) in ensemble.rows().zip(&weights) {
        for j in 0..dim {
            let x = row[j];
            point[j] += w * x;
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    // Rounding in the weighted sum can step outside the hull by an ulp.
    for j in 0..dim {
        point[j] = point[j].clamp(lo[j], hi[j]);
    }

    Ok(ConsensusResult { point, argmin_index, shifted_weights: weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_particles() {
        let p = [0.3, -1.7, 2.2];
        let e = Ensemble::from_rows(&[p, p, p, p]).unwrap();
        let c = consensus_point(&e, &[5.0, 1.0, -2.0, 9.0], 3.0).unwrap();
        assert_eq!(c.point, p.to_vec());
        assert_eq!(c.argmin_index, 2);
    }

    #[test]
    fn equal_values_average() {
        let e = Ensemble::from_rows(&[[0.0], [1.0]]).unwrap();
        for alpha in [1e-3, 1.0, 1e5] {
            let c = consensus_point(&e, &[0.0, 0.0], alpha).unwrap();
            assert_eq!(c.point, vec![0.5]);
        }
    }

    #[test]
    fn three_point_example() {
        let e = Ensemble::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let c = consensus_point(&e, &[0.0, 1.0, 2.0], 1.0).unwrap();
        // (0·1 + 1·e⁻¹ + 2·e⁻²) / (1 + e⁻¹ + e⁻²)
        let expected = 0.424_789_617_395_558_54;
        assert!((c.point[0] - expected).abs() < 1e-15, "{}", c.point[0]);
        let s: f64 = c.shifted_weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn huge_alpha_does_not_underflow() {
        let e = Ensemble::from_rows(&[[1.0], [4.0]]).unwrap();
        let c = consensus_point(&e, &[100.0, 200.0], 1e5).unwrap();
        assert_eq!(c.point, vec![1.0]);
    }

    #[test]
    fn rejects_non_finite_values() {
        let e = Ensemble::from_rows(&[[1.0], [4.0]]).unwrap();
        let err = consensus_point(&e, &[0.0, f64::NAN], 1.0).unwrap_err();
        assert!(err.to_string().contains("objective produced non-finite value"));
        assert!(consensus_point(&e, &[f64::INFINITY, 0.0], 1.0).is_err());
        assert!(consensus_point(&e, &[0.0], 1.0).is_err());
    }
}
