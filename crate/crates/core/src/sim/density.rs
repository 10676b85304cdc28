use num_complex::Complex64;

use super::gate::{Gate, Mat2};
use super::noise::NoiseChannel;
use super::pauli::PauliString;
use super::state::{
    apply_cnot_strided, apply_mat2_strided, check_qubit_count, qubit_bit, StateVector,
};
use crate::error::{QsannError, Result};

/// Row-major `2^n x 2^n` density matrix, same qubit ordering as [`StateVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    dim: usize,
    entries: Vec<Complex64>,
}

fn conj_mat(m: &Mat2) -> Mat2 {
    [
        [m[0][0].conj(), m[0][1].conj()],
        [m[1][0].conj(), m[1][1].conj()],
    ]
}

impl DensityMatrix {
    /// `|0...0><0...0|`
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Ok(Self::from_pure(&StateVector::zero(n_qubits)?))
    }

    /// `|psi><psi|`
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for a in amps {
            for b in amps {
                entries.push(a * b.conj());
            }
        }
        Self {
            n_qubits: state.n_qubits(),
            dim,
            entries,
        }
    }

    /// `I / 2^n`
    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1 << n_qubits;
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self {
            n_qubits,
            dim,
            entries,
        })
    }

    /// Wraps raw row-major entries; checks shape, Hermiticity and unit trace.
    pub fn from_entries(n_qubits: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let dim = 1 << n_qubits;
        if entries.len() != dim * dim {
            return Err(QsannError::config(format!(
                "expected {} entries for {n_qubits} qubits, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let rho = Self {
            n_qubits,
            dim,
            entries,
        };
        if !rho.is_hermitian(1e-10) {
            return Err(QsannError::config("density matrix is not Hermitian"));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(QsannError::config(format!("density matrix trace is {tr}")));
        }
        Ok(rho)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim)
            .all(|i| (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// `M rho M^dagger` for a single-qubit (not necessarily unitary) `M`.
    fn sandwich(&mut self, bit: usize, m: &Mat2) {
        let dim = self.dim;
        // left multiply: each column is a vector over the row index
        for col in 0..dim {
            apply_mat2_strided(&mut self.entries, dim, bit, m, dim, col);
        }
        // right multiply by M^dagger: each row transforms with conj(M)
        let mc = conj_mat(m);
        for row in 0..dim {
            apply_mat2_strided(&mut self.entries, dim, bit, &mc, 1, row * dim);
        }
    }

    pub fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        let mut next = self.clone();
        next.apply_gate_mut(gate)?;
        Ok(next)
    }

    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let target_bit = qubit_bit(self.n_qubits, gate.target());
        match gate.matrix() {
            Some(m) => self.sandwich(target_bit, &m),
            None => {
                let dim = self.dim;
                let control_bit = qubit_bit(self.n_qubits, gate.control().unwrap_or_default());
                for col in 0..dim {
                    apply_cnot_strided(&mut self.entries, dim, control_bit, target_bit, dim, col);
                }
                for row in 0..dim {
                    apply_cnot_strided(
                        &mut self.entries,
                        dim,
                        control_bit,
                        target_bit,
                        1,
                        row * dim,
                    );
                }
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply_gate_mut(g))
    }

    /// `sum_i E_i rho E_i^dagger` over the channel's Kraus operators.
    pub fn apply_channel(&self, channel: &NoiseChannel) -> Result<Self> {
        let mut next = self.clone();
        next.apply_channel_mut(channel)?;
        Ok(next)
    }

    pub fn apply_channel_mut(&mut self, channel: &NoiseChannel) -> Result<()> {
        if channel.target() >= self.n_qubits {
            return Err(QsannError::index(format!(
                "channel target {} out of range for {} qubits",
                channel.target(),
                self.n_qubits
            )));
        }
        if channel.p() == 0.0 {
            return Ok(());
        }
        let bit = qubit_bit(self.n_qubits, channel.target());
        let mut acc = vec![Complex64::new(0.0, 0.0); self.entries.len()];
        for e in channel.kraus_operators() {
            let mut term = self.clone();
            term.sandwich(bit, &e);
            for (a, t) in acc.iter_mut().zip(&term.entries) {
                *a += t;
            }
        }
        self.entries = acc;
        Ok(())
    }

    /// `Tr[P rho]`, clamped to [-1, 1].
    pub fn expectation(&self, obs: &PauliString) -> Result<f64> {
        obs.check_qubits(self.n_qubits)?;
        let masks = obs.masks();
        // P|k> = phase(k)|k ^ flip>, so Tr[P rho] = sum_k phase(k) rho[k, k ^ flip]
        let value: Complex64 = (0..self.dim)
            .map(|k| masks.phase(k) * self.get(k, k ^ masks.flip))
            .sum();
        debug_assert!(value.im.abs() < 1e-9, "imaginary expectation {value}");
        Ok(value.re.clamp(-1.0, 1.0))
    }
}

/// `Tr[P rho]`
pub fn expectation_dm(rho: &DensityMatrix, obs: &PauliString) -> Result<f64> {
    rho.expectation(obs)
}

/// Applies one noise channel and returns the new state.
pub fn apply_channel(rho: &DensityMatrix, channel: &NoiseChannel) -> Result<DensityMatrix> {
    rho.apply_channel(channel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::noise::NoiseKind;

    fn z() -> PauliString {
        "Z".parse().unwrap()
    }

    /// Explicit 2x2 arithmetic: sum_i E rho E^dagger.
    fn oracle_channel(rho: [[Complex64; 2]; 2], kraus: &[Mat2]) -> [[Complex64; 2]; 2] {
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for e in kraus {
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for l in 0..2 {
                            out[i][j] += e[i][k] * rho[k][l] * e[j][l].conj();
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn expectation_examples() {
        let rho = DensityMatrix::zero(1).unwrap();
        assert_eq!(expectation_dm(&rho, &z()).unwrap(), 1.0);
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        assert_eq!(expectation_dm(&mixed, &z()).unwrap(), 0.0);
        assert!(matches!(
            expectation_dm(&mixed, &"ZZ".parse().unwrap()),
            Err(QsannError::Index(_))
        ));
    }

    #[test]
    fn depolarizing_scales_z() {
        let rho = DensityMatrix::zero(1).unwrap();
        let ch = NoiseChannel::depolarizing(0.1, 0).unwrap();
        let out = apply_channel(&rho, &ch).unwrap();
        let got = out.expectation(&z()).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let o = oracle_channel([[one, zero], [zero, zero]], &ch.kraus_operators());
        let oracle = (o[0][0] - o[1][1]).re;
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 0.866667).abs() < 1e-6);
    }

    #[test]
    fn amplitude_damping_on_excited_state() {
        let rho = DensityMatrix::from_pure(&StateVector::basis(1, 1).unwrap());
        let ch = NoiseChannel::amplitude_damping(0.2, 0).unwrap();
        let out = apply_channel(&rho, &ch).unwrap();
        let got = out.expectation(&z()).unwrap();
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let o = oracle_channel([[zero, zero], [zero, one]], &ch.kraus_operators());
        assert!((got - (o[0][0] - o[1][1]).re).abs() < 1e-12);
        assert!((got + 0.6).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_is_identity() {
        let s = StateVector::zero(2)
            .unwrap()
            .apply_gate(&Gate::H(0))
            .unwrap()
            .apply_gate(&Gate::ry(1, 0.4))
            .unwrap();
        let rho = DensityMatrix::from_pure(&s);
        for kind in NoiseKind::ALL {
            let ch = NoiseChannel::new(kind, 0.0, 1).unwrap();
            assert_eq!(rho.apply_channel(&ch).unwrap(), rho);
        }
    }

    #[test]
    fn channel_preserves_trace_and_hermiticity() {
        let s = StateVector::zero(2)
            .unwrap()
            .apply_gate(&Gate::rx(0, 1.1))
            .unwrap()
            .apply_gate(&Gate::cnot(0, 1))
            .unwrap()
            .apply_gate(&Gate::ry(1, 0.3))
            .unwrap();
        let rho = DensityMatrix::from_pure(&s);
        for kind in NoiseKind::ALL {
            for q in 0..2 {
                let out = rho
                    .apply_channel(&NoiseChannel::new(kind, 0.37, q).unwrap())
                    .unwrap();
                assert!((out.trace() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
                assert!(out.is_hermitian(1e-12));
            }
        }
        let bad = NoiseChannel::depolarizing(0.1, 2).unwrap();
        assert!(rho.apply_channel(&bad).is_err());
    }

    #[test]
    fn three_quarter_depolarizing_fully_mixes() {
        let s = StateVector::zero(1)
            .unwrap()
            .apply_gate(&Gate::rx(0, 0.9))
            .unwrap()
            .apply_gate(&Gate::rz(0, 2.0))
            .unwrap();
        let out = DensityMatrix::from_pure(&s)
            .apply_channel(&NoiseChannel::depolarizing(0.75, 0).unwrap())
            .unwrap();
        let mixed = DensityMatrix::maximally_mixed(1).unwrap();
        for (a, b) in out.entries().iter().zip(mixed.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn from_entries_validates() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!(DensityMatrix::from_entries(1, vec![c(1.0), c(0.0), c(0.0), c(0.0)]).is_ok());
        assert!(DensityMatrix::from_entries(1, vec![c(1.0), c(0.5), c(0.0), c(0.0)]).is_err());
        assert!(DensityMatrix::from_entries(1, vec![c(0.7), c(0.0), c(0.0), c(0.0)]).is_err());
    }
}
