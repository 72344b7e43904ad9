//! Truncated-Fock simulation of one qubit coupled to one oscillator.

pub mod linalg;
pub mod ops;
pub mod state;
pub mod trotter;
pub mod wigner;

pub use ops::{
    cd_op, coherent_state, displace_vector, displacement_op, fock_state, qubit_gate_on_hybrid,
    sqr_op, QubitGate, TRUNCATION_MARGIN,
};
pub use state::{accumulate_density, fidelity, overlap, HybridState, QubitBasis};
pub use trotter::{noise_amplitude, noise_cd_commutator, trotter_phase_check};
pub use wigner::{wigner, wigner_from_density, WignerGrid, WignerGridSpec};
