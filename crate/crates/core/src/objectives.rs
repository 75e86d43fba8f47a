//! Benchmark objectives with known global minimizers.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensemble::Ensemble;
use crate::error::{CboError, Result};

/// A pure, reentrant objective with a known global minimizer.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, v: &[f64]) -> f64;
    fn minimizer(&self) -> &[f64];
    fn min_value(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Ackley,
    Griewank,
    Rastrigin,
    Alpine,
    Salomon,
    /// Ackley without the `20 + e` offset, minimum `−20 − e`.
    AckleyFig1,
    /// `Σ v_k² + 2.5(1 − cos 2πv_k)`.
    RastriginFig1,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 7] = [
        ObjectiveKind::Ackley,
        ObjectiveKind::Griewank,
        ObjectiveKind::Rastrigin,
        ObjectiveKind::Alpine,
        ObjectiveKind::Salomon,
        ObjectiveKind::AckleyFig1,
        ObjectiveKind::RastriginFig1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ObjectiveKind::Ackley => "ackley",
            ObjectiveKind::Griewank => "griewank",
            ObjectiveKind::Rastrigin => "rastrigin",
            ObjectiveKind::Alpine => "alpine",
            ObjectiveKind::Salomon => "salomon",
            ObjectiveKind::AckleyFig1 => "ackley_fig1",
            ObjectiveKind::RastriginFig1 => "rastrigin_fig1",
        }
    }

    pub fn min_value(self) -> f64 {
        match self {
            ObjectiveKind::AckleyFig1 => -20.0 - E,
            _ => 0.0,
        }
    }

    fn eval_centered<I>(self, xs: I, d: usize) -> f64
    where
        I: Iterator<Item = f64> + Clone,
    {
        let d_f = d as f64;
        match self {
            ObjectiveKind::Ackley => {
                let sq = xs.clone().map(|x| x * x).sum::<f64>();
                let cs = xs.map(|x| (2.0 * PI * x).cos()).sum::<f64>();
                -20.0 * (-0.2 * (sq / d_f).sqrt()).exp() - (cs / d_f).exp() + 20.0 + E
            }
            ObjectiveKind::AckleyFig1 => {
                let norm = xs.clone().map(|x| x * x).sum::<f64>().sqrt();
                let cs = xs.map(|x| (2.0 * PI * x).cos()).sum::<f64>();
                -20.0 * (-0.2 / d_f.sqrt() * norm).exp() - (cs / d_f).exp()
            }
            ObjectiveKind::Griewank => {
                let (sum, prod) = xs.enumerate().fold((0.0, 1.0), |(s, p), (i, x)| {
                    (s + x * x / 4000.0, p * (x / (i + 1) as f64).cos())
                });
                1.0 + sum - prod
            }
            ObjectiveKind::Rastrigin => {
                10.0 * d_f + xs.map(|x| x * x - 10.0 * (2.0 * PI * x).cos()).sum::<f64>()
            }
            ObjectiveKind::RastriginFig1 => {
                xs.map(|x| x * x + 2.5 * (1.0 - (2.0 * PI * x).cos())).sum::<f64>()
            }
            ObjectiveKind::Alpine => {
                10.0 * xs.map(|x| (x * (10.0 * x).sin() - 0.1 * x).abs()).sum::<f64>()
            }
            ObjectiveKind::Salomon => {
                let norm = xs.map(|x| x * x).sum::<f64>().sqrt();
                1.0 - (200.0 * PI * norm).cos() + 10.0 * norm
            }
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveKind {
    type Err = CboError;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            CboError::UnknownObjective {
                name: s.to_string(),
                valid: ObjectiveKind::ALL.map(|k| k.name()).join(", "),
            }
        })
    }
}

/// A named benchmark instance: formula, dimension and optional translation.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveSpec {
    pub name: String,
    pub kind: ObjectiveKind,
    pub dim: usize,
    pub minimizer: Vec<f64>,
    pub min_value: f64,
    pub shift: Option<Vec<f64>>,
}

/// Looks up `name` in the registry. A `shift` evaluates the formula at
/// `v − shift`, moving the minimizer to `shift`.
pub fn make_objective(name: &str, dim: usize, shift: Option<Vec<f64>>) -> Result<ObjectiveSpec> {
    let kind: ObjectiveKind = name.parse()?;
    if dim == 0 {
        return Err(CboError::invalid("dim", "must be at least 1"));
    }
    if let Some(s) = &shift {
        if s.len() != dim {
            return Err(CboError::DimensionMismatch { expected: dim, actual: s.len() });
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(CboError::invalid("shift", "must be finite"));
        }
    }
    Ok(ObjectiveSpec {
        name: kind.name().to_string(),
        kind,
        dim,
        minimizer: shift.clone().unwrap_or_else(|| vec![0.0; dim]),
        min_value: kind.min_value(),
        shift,
    })
}

impl Objective for ObjectiveSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, v: &[f64]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        match &self.shift {
            None => self.kind.eval_centered(v.iter().copied(), self.dim),
            Some(s) => self.kind.eval_centered(v.iter().zip(s).map(|(x, c)| x - c), self.dim),
        }
    }

    fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    fn min_value(&self) -> f64 {
        self.min_value
    }
}

/// Evaluates `objective` on every particle, in particle order.
pub fn eval_batch<O: Objective + ?Sized>(objective: &O, ensemble: &Ensemble) -> Result<Vec<f64>> {
    if ensemble.dim() != objective.dim() {
        return Err(CboError::DimensionMismatch { expected: objective.dim(), actual: ensemble.dim() });
    }
    Ok(ensemble.rows().map(|row| objective.eval(row)).collect())
}
