//! Consensus-based optimization (CBO) with truncated noise.
//!
//! Particles `V¹…V^N` move by
//!
//! ```text
//! Vⁱ ← Vⁱ − Δtλ(Vⁱ − P_{v_b,R}(v_α)) + σ(‖Vⁱ − v_α‖₂ ∧ M) Bⁱ,   Bⁱ ~ N(0, Δt I)
//! ```
//!
//! where `v_α` is the `exp(−αf)`-weighted mean of the ensemble and
//! `P_{v_b,R}` projects onto a ball. `M = R = ∞` recovers standard CBO.
//!
//! The crate also ships the benchmark objectives ([`objectives`]), Monte Carlo
//! simulators for the large-`α` single-particle limits and their moment
//! behaviour ([`meanfield`]), and a reproducible experiment harness
//! ([`harness`]) for success-rate tables and `σ × M` phase diagrams.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod consensus;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod meanfield;
pub mod noise;
pub mod objectives;
pub mod params;
pub mod projection;
pub mod serde_inf;
pub mod solver;
pub mod step;

pub use consensus::{consensus_point, ConsensusResult};
pub use ensemble::{Ensemble, InitKind, InitLaw};
pub use error::{CboError, Result};
pub use noise::{derive_seed, gaussian_increments, CboRng};
pub use objectives::{eval_batch, make_objective, Objective, ObjectiveKind, ObjectiveSpec};
pub use params::{CboParams, NoiseMode};
pub use projection::project_ball;
pub use solver::{run, run_with, RunOptions, RunOutcome, TraceEntry, DEFAULT_TOLERANCE};
pub use step::{step, step_anisotropic, step_isotropic};
