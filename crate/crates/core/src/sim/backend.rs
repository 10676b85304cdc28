use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::gate::Gate;
use super::noise::{check_noise_level, NoiseChannel, NoiseKind};
use super::pauli::PauliString;
use super::state::StateVector;
use crate::error::Result;

/// Noise applied to every qubit at the end of each circuit stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub p: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, p: f64) -> Result<Self> {
        check_noise_level(p)?;
        Ok(Self { kind, p })
    }
}

/// Either a pure or a mixed register, depending on the simulator mode.
#[derive(Debug, Clone, PartialEq)]
pub enum Register {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl Register {
    pub fn n_qubits(&self) -> usize {
        match self {
            Register::Pure(s) => s.n_qubits(),
            Register::Mixed(r) => r.n_qubits(),
        }
    }

    pub fn expectation(&self, obs: &PauliString) -> Result<f64> {
        match self {
            Register::Pure(s) => s.expectation(obs),
            Register::Mixed(r) => r.expectation(obs),
        }
    }

    pub fn expectations(&self, observables: &[PauliString]) -> Result<Vec<f64>> {
        observables.iter().map(|o| self.expectation(o)).collect()
    }

    fn apply_circuit(&mut self, gates: &[Gate]) -> Result<()> {
        match self {
            Register::Pure(s) => s.apply_circuit(gates),
            Register::Mixed(r) => r.apply_circuit(gates),
        }
    }
}

/// Runs circuit stages exactly, either noiselessly on state vectors or with
/// single-qubit channels on density matrices.
///
/// A noisy simulator applies its channel to every qubit after each call to
/// [`Simulator::run`] / [`Simulator::evolve`]. The QSANN layer calls `run`
/// once for the encoder and `evolve` once per query/key/value circuit, so
/// each of those four circuits ends in a noise layer.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Simulator {
    noise: Option<NoiseSpec>,
}

impl Simulator {
    pub fn noiseless() -> Self {
        Self { noise: None }
    }

    /// A zero-strength channel is the identity, so `p == 0` falls back to
    /// the exact state-vector path.
    pub fn noisy(noise: NoiseSpec) -> Self {
        if noise.p == 0.0 {
            Self::noiseless()
        } else {
            Self { noise: Some(noise) }
        }
    }

    pub fn from_option(noise: Option<NoiseSpec>) -> Self {
        noise.map_or_else(Self::noiseless, Self::noisy)
    }

    pub fn noise(&self) -> Option<NoiseSpec> {
        self.noise
    }

    fn apply_noise(&self, reg: &mut Register) -> Result<()> {
        if let (Some(spec), Register::Mixed(rho)) = (self.noise, reg) {
            for q in 0..rho.n_qubits() {
                rho.apply_channel_mut(&NoiseChannel::new(spec.kind, spec.p, q)?)?;
            }
        }
        Ok(())
    }

    /// Prepares `|0^n>`, applies `gates`, then the noise layer.
    pub fn run(&self, n_qubits: usize, gates: &[Gate]) -> Result<Register> {
        let zero = StateVector::zero(n_qubits)?;
        let mut reg = match self.noise {
            None => Register::Pure(zero),
            Some(_) => Register::Mixed(DensityMatrix::from_pure(&zero)),
        };
        reg.apply_circuit(gates)?;
        self.apply_noise(&mut reg)?;
        Ok(reg)
    }

    /// Applies `gates` to a copy of `reg`, then the noise layer.
    pub fn evolve(&self, reg: &Register, gates: &[Gate]) -> Result<Register> {
        let mut next = reg.clone();
        next.apply_circuit(gates)?;
        self.apply_noise(&mut next)?;
        Ok(next)
    }
}
