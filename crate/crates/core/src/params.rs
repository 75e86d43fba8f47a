use serde::{Deserialize, Serialize};

use crate::ensemble::InitLaw;
use crate::error::{CboError, Result};

/// Shape of the diffusion term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    /// Scalar amplitude `σ(‖V − v_α‖₂ ∧ M)` times a full Gaussian vector.
    Isotropic,
    /// Per-coordinate amplitudes `σ(|V_j − v_α,j| ∧ M)`.
    Anisotropic,
}

impl std::str::FromStr for NoiseMode {
    type Err = CboError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "isotropic" => Ok(NoiseMode::Isotropic),
            "anisotropic" => Ok(NoiseMode::Anisotropic),
            other => Err(CboError::invalid(
                "noise",
                format!("expected `isotropic` or `anisotropic`, got `{other}`"),
            )),
        }
    }
}

/// Full parameter set of the discrete scheme.
///
/// `trunc_m` and `proj_r` accept `f64::INFINITY`, which turns truncation and
/// projection into identity maps (standard CBO is `M = R = ∞`, `v_b = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CboParams {
    pub lambda: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub dt: f64,
    #[serde(with = "crate::serde_inf")]
    pub trunc_m: f64,
    #[serde(with = "crate::serde_inf")]
    pub proj_r: f64,
    pub proj_center: Vec<f64>,
    pub noise_mode: NoiseMode,
    pub n_particles: usize,
    pub n_steps: usize,
    pub init: InitLaw,
}

impl CboParams {
    pub fn dim(&self) -> usize {
        self.init.mean.len()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CboError::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("alpha", self.alpha)?;
        positive("dt", self.dt)?;
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(CboError::invalid("sigma", format!("must be nonnegative, got {}", self.sigma)));
        }
        if !(self.trunc_m > 0.0) {
            return Err(CboError::invalid("M", format!("must be positive or inf, got {}", self.trunc_m)));
        }
        if !(self.proj_r > 0.0) {
            return Err(CboError::invalid("R", format!("must be positive or inf, got {}", self.proj_r)));
        }
        if self.lambda * self.dt >= 1.0 {
            return Err(CboError::invalid(
                "dt",
                format!("lambda * dt = {} must be < 1", self.lambda * self.dt),
            ));
        }
        if self.n_particles == 0 {
            return Err(CboError::invalid("N", "must be at least 1"));
        }
        self.init.validate()?;
        if self.proj_center.len() != self.dim() {
            return Err(CboError::DimensionMismatch {
                expected: self.dim(),
                actual: self.proj_center.len(),
            });
        }
        if self.proj_center.iter().any(|x| !x.is_finite()) {
            return Err(CboError::invalid("v_b", "must be finite"));
        }
        Ok(())
    }
}
