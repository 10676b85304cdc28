//! Exact small-register quantum simulation.
//!
//! Pure states are evolved in place with index-pair strides; mixed states
//! are full density matrices acted on from both sides with the same kernel.
//! Qubit 0 is the most significant bit of every amplitude index.

mod backend;
mod density;
mod gate;
mod noise;
mod pauli;
pub mod sampling;
mod state;

pub use backend::{NoiseSpec, Register, Simulator};
pub use density::{apply_channel, expectation_dm, DensityMatrix};
pub use gate::{canonical_angle, Gate, Mat2};
pub use noise::{NoiseChannel, NoiseKind};
pub use pauli::{Pauli, PauliString};
pub use state::{init_zero_state, StateVector, MAX_QUBITS};

/// `<psi|P|psi>`
pub fn expectation(state: &StateVector, obs: &PauliString) -> crate::Result<f64> {
    state.expectation(obs)
}

/// Returns `gate` applied to `state`.
pub fn apply_gate(state: &StateVector, gate: &Gate) -> crate::Result<StateVector> {
    state.apply_gate(gate)
}
