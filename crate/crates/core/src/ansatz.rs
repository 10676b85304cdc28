//! The strongly-entangling circuit family shared by the encoder and the
//! query/key/value circuits.
//!
//! Layout for `n` qubits and depth `D`:
//!
//! ```text
//! RX(p[0..n]) on each qubit, RY(p[n..2n]) on each qubit,
//! then D times: CNOT ring 0->1, 1->2, ..., (n-1)->0, RY(next n params) on each qubit
//! ```
//!
//! giving `n(D + 2)` parameters. On a single qubit the ring is empty.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Deref, DerefMut};

use serde::{Deserialize, Serialize};

use crate::error::{QsannError, Result};
use crate::sim::{Gate, PauliString, StateVector, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub n_qubits: usize,
    pub depth: usize,
}

impl AnsatzSpec {
    pub fn new(n_qubits: usize, depth: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(QsannError::config(format!(
                "ansatz qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        Ok(Self { n_qubits, depth })
    }

    pub fn param_count(&self) -> usize {
        self.n_qubits * (self.depth + 2)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.param_count() {
            return Err(QsannError::config(format!(
                "ansatz with {} qubits and depth {} takes {} parameters, got {len}",
                self.n_qubits,
                self.depth,
                self.param_count()
            )));
        }
        Ok(())
    }
}

/// Trainable angles for one circuit. Values are never wrapped.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamVector(pub Vec<f64>);

impl ParamVector {
    pub fn zeros(spec: &AnsatzSpec) -> Self {
        Self(vec![0.0; spec.param_count()])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for ParamVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for ParamVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ParamVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Gate list of the circuit with the given angles.
pub fn build_circuit(spec: &AnsatzSpec, params: &[f64]) -> Result<Vec<Gate>> {
    spec.check_len(params.len())?;
    let n = spec.n_qubits;
    let ring = if n > 1 { n } else { 0 };
    let mut gates = Vec::with_capacity(2 * n + spec.depth * (ring + n));
    gates.extend((0..n).map(|q| Gate::rx(q, params[q])));
    gates.extend((0..n).map(|q| Gate::ry(q, params[n + q])));
    for layer in 0..spec.depth {
        gates.extend((0..ring).map(|q| Gate::cnot(q, (q + 1) % n)));
        let offset = (layer + 2) * n;
        gates.extend((0..n).map(|q| Gate::ry(q, params[offset + q])));
    }
    Ok(gates)
}

/// Hadamard layer followed by the ansatz with `x` as its angles.
pub fn encoder_circuit(spec: &AnsatzSpec, x: &[f64]) -> Result<Vec<Gate>> {
    let mut gates: Vec<Gate> = (0..spec.n_qubits).map(Gate::H).collect();
    gates.extend(build_circuit(spec, x)?);
    Ok(gates)
}

/// `U_enc(x) H^n |0^n>`
pub fn encode_input(x: &[f64], spec: &AnsatzSpec) -> Result<StateVector> {
    let mut state = StateVector::zero(spec.n_qubits)?;
    state.apply_circuit(&encoder_circuit(spec, x)?)?;
    Ok(state)
}

/// Copy of `params` with entry `j` moved by `delta`.
pub(crate) fn shifted(params: &[f64], j: usize, delta: f64) -> Vec<f64> {
    let mut p = params.to_vec();
    p[j] += delta;
    p
}

/// Exact derivative of `<state| U(params)^dag P U(params) |state>` with
/// respect to `params[j]`, from two evaluations shifted by ±π/2.
pub fn param_shift_grad(
    state: &StateVector,
    spec: &AnsatzSpec,
    params: &[f64],
    obs: &PauliString,
    j: usize,
) -> Result<f64> {
    spec.check_len(params.len())?;
    if j >= params.len() {
        return Err(QsannError::index(format!(
            "parameter index {j} out of range for {} parameters",
            params.len()
        )));
    }
    let eval = |p: Vec<f64>| -> Result<f64> {
        let mut s = state.clone();
        s.apply_circuit(&build_circuit(spec, &p)?)?;
        s.expectation(obs)
    };
    let plus = eval(shifted(params, j, FRAC_PI_2))?;
    let minus = eval(shifted(params, j, -FRAC_PI_2))?;
    Ok((plus - minus) / 2.0)
}
