//! Gate-level circuits executed with per-step noise.

pub mod builtin;
pub mod plan;
pub mod run;
pub mod spec;

pub use builtin::{
    builtin_cat_circuit, fock_layers, load_fock_circuit, noiseless_output, odd_cat_state, FockCircuit,
};
pub use plan::{explain_encoding, trotter_bound, trotterize, EncodedCd, Step, StepOp, StepPlan};
pub use run::{
    run_monte_carlo, run_noiseless, run_trajectory, GateNoise, Postselection, ResolvedNoise, RunOptions,
    RunSummary, Trajectory,
};
pub use spec::{
    load_circuit, parse_circuit, parse_complex, CircuitSpec, ExecutionMode, GateKind, GateSpec,
    SqueezingChoice, DEFAULT_CUTOFF, DEFAULT_TROTTER_N,
};
