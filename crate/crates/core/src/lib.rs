//! Simulation of GKP two-mode-squeezing noise reduction for a universal
//! hybrid oscillator-qubit gate set.
//!
//! The crate has two layers:
//!
//! - [`phase_space`] and [`optimizer`] work directly with quadrature
//!   displacements. One encoded time step is linear, so residual noise
//!   statistics and the optimal squeezing follow from 4-vector arithmetic.
//! - [`fock`] and [`circuit`] simulate the data mode and control qubit in a
//!   truncated Fock basis. Each gate is Trotterized, and every step's noise is
//!   either the raw displacement (physical mode) or the post-correction
//!   residual drawn from [`phase_space`] (logical mode).
//!
//! All numerics are generic over [`Real`]; the `*64` aliases below fix the
//! scalar to `f64`, which is what the CLI and the acceptance suite use.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod circuit;
pub mod error;
pub mod fock;
pub mod optimizer;
pub mod phase_space;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub use circuit::{
    builtin_cat_circuit, load_circuit, load_fock_circuit, parse_circuit, run_monte_carlo,
    run_trajectory, trotterize, CircuitSpec, ExecutionMode, GateKind, GateSpec, Postselection,
    RunOptions, RunSummary, SqueezingChoice, StepPlan,
};
pub use fock::{HybridState, QubitBasis, WignerGrid, WignerGridSpec};
pub use optimizer::{Method, Optimum, SweepRow};
pub use phase_space::{
    NoiseDraw, NoiseParams, QuadVector4, ResidualDisplacement, SyndromeOutcome, TmsSymplectic,
};
pub use rng::{NormalSampler, SimRng};

pub type QuadVector = QuadVector4<f64>;
pub type NoiseParams64 = NoiseParams<f64>;
pub type TmsSymplectic64 = TmsSymplectic<f64>;
pub type Residual64 = ResidualDisplacement<f64>;
pub type Optimum64 = Optimum<f64>;
pub type SweepRow64 = SweepRow<f64>;
pub type HybridState64 = HybridState<f64>;
pub type WignerGrid64 = WignerGrid<f64>;
pub type CircuitSpec64 = CircuitSpec<f64>;
pub type StepPlan64 = StepPlan<f64>;
pub type RunSummary64 = RunSummary<f64>;
