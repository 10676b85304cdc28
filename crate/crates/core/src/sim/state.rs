use num_complex::Complex64;

use super::gate::{Gate, Mat2};
use super::pauli::PauliString;
use crate::error::{QsannError, Result};

pub const MAX_QUBITS: usize = 16;
const NORM_TOL: f64 = 1e-10;

/// A normalized pure state on `n_qubits` qubits.
///
/// Qubit 0 is the most significant bit of the amplitude index, so on two
/// qubits the amplitudes are ordered |00>, |01>, |10>, |11> with the left
/// digit belonging to qubit 0.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

pub(crate) fn check_qubit_count(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(QsannError::config(format!(
            "qubit count must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

/// Bit of `qubit` in an amplitude index.
#[inline]
pub(crate) fn qubit_bit(n_qubits: usize, qubit: usize) -> usize {
    1usize << (n_qubits - 1 - qubit)
}

/// Applies a 2x2 matrix to every index pair differing in `bit` of a strided
/// complex array. `stride` and `offset` select one row or column of a
/// row-major matrix; a plain vector uses stride 1 and offset 0.
#[inline]
pub(crate) fn apply_mat2_strided(
    data: &mut [Complex64],
    dim: usize,
    bit: usize,
    m: &Mat2,
    stride: usize,
    offset: usize,
) {
    for i in 0..dim {
        if i & bit != 0 {
            continue;
        }
        let i0 = offset + i * stride;
        let i1 = offset + (i | bit) * stride;
        let a0 = data[i0];
        let a1 = data[i1];
        data[i0] = m[0][0] * a0 + m[0][1] * a1;
        data[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
}

/// Swaps the target pair wherever the control bit is set.
#[inline]
pub(crate) fn apply_cnot_strided(
    data: &mut [Complex64],
    dim: usize,
    control_bit: usize,
    target_bit: usize,
    stride: usize,
    offset: usize,
) {
    for i in 0..dim {
        if i & control_bit != 0 && i & target_bit == 0 {
            data.swap(offset + i * stride, offset + (i | target_bit) * stride);
        }
    }
}

impl StateVector {
    /// |0...0> on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the norm 1.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QsannError::config(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_qubit_count(n_qubits)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QsannError::config(format!(
                "amplitudes have squared norm {norm}, expected 1"
            )));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state |index>.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        if index >= 1 << n_qubits {
            return Err(QsannError::index(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of each computational basis outcome.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Returns `gate` applied to this state.
    pub fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        let mut next = self.clone();
        next.apply_gate_mut(gate)?;
        Ok(next)
    }

    /// In-place variant of [`StateVector::apply_gate`].
    pub fn apply_gate_mut(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        let dim = self.amplitudes.len();
        let target_bit = qubit_bit(self.n_qubits, gate.target());
        match gate.matrix() {
            Some(m) => apply_mat2_strided(&mut self.amplitudes, dim, target_bit, &m, 1, 0),
            None => {
                let control_bit = qubit_bit(self.n_qubits, gate.control().unwrap_or_default());
                apply_cnot_strided(&mut self.amplitudes, dim, control_bit, target_bit, 1, 0);
            }
        }
        Ok(())
    }

    /// Applies a whole gate list in order.
    pub fn apply_circuit(&mut self, gates: &[Gate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply_gate_mut(g))
    }

    /// `<psi|P|psi>`, clamped to [-1, 1].
    pub fn expectation(&self, obs: &PauliString) -> Result<f64> {
        obs.check_qubits(self.n_qubits)?;
        let masks = obs.masks();
        let value: Complex64 = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &amp)| self.amplitudes[i ^ masks.flip].conj() * masks.phase(i) * amp)
            .sum();
        debug_assert!(value.im.abs() < 1e-9, "imaginary expectation {value}");
        Ok(value.re.clamp(-1.0, 1.0))
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(QsannError::index(format!(
                "inner product of {}- and {}-qubit states",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

/// |0...0> on `n_qubits` qubits.
pub fn init_zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    use super::*;

    fn approx(a: Complex64, re: f64, im: f64) -> bool {
        (a - Complex64::new(re, im)).norm() < 1e-12
    }

    #[test]
    fn zero_state() {
        let s = init_zero_state(1).unwrap();
        assert_eq!(
            s.amplitudes(),
            &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
        );
        let s = init_zero_state(2).unwrap();
        assert_eq!(s.amplitudes().len(), 4);
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
        assert!(matches!(init_zero_state(0), Err(QsannError::Config(_))));
        assert!(init_zero_state(17).is_err());
    }

    #[test]
    fn hadamard_on_zero() {
        let s = init_zero_state(1).unwrap().apply_gate(&Gate::H(0)).unwrap();
        assert!(approx(s.amplitudes()[0], FRAC_1_SQRT_2, 0.0));
        assert!(approx(s.amplitudes()[1], FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn ry_half_pi_on_zero() {
        let s = init_zero_state(1)
            .unwrap()
            .apply_gate(&Gate::ry(0, FRAC_PI_2))
            .unwrap();
        assert!(approx(s.amplitudes()[0], FRAC_PI_4.cos(), 0.0));
        assert!(approx(s.amplitudes()[1], FRAC_PI_4.sin(), 0.0));
    }

    #[test]
    fn cnot_truth_table() {
        // |10>: qubit 0 set
        let s = StateVector::basis(2, 0b10).unwrap();
        let out = s.apply_gate(&Gate::cnot(0, 1)).unwrap();
        assert_eq!(out, StateVector::basis(2, 0b11).unwrap());
        let s = StateVector::basis(2, 0b01).unwrap();
        assert_eq!(s.apply_gate(&Gate::cnot(0, 1)).unwrap(), s);
    }

    #[test]
    fn bad_index_is_an_index_error() {
        let s = init_zero_state(2).unwrap();
        assert!(matches!(
            s.apply_gate(&Gate::X(2)),
            Err(QsannError::Index(_))
        ));
        let z = "ZZZ".parse::<PauliString>().unwrap();
        assert!(matches!(s.expectation(&z), Err(QsannError::Index(_))));
    }

    #[test]
    fn expectation_examples() {
        let z: PauliString = "Z".parse().unwrap();
        let zero = init_zero_state(1).unwrap();
        assert_eq!(zero.expectation(&z).unwrap(), 1.0);
        let plus = zero.apply_gate(&Gate::H(0)).unwrap();
        assert!(plus.expectation(&z).unwrap().abs() < 1e-12);
        let x: PauliString = "X".parse().unwrap();
        assert!((plus.expectation(&x).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ry_expectation_matches_two_by_two_oracle() {
        // oracle: explicit RY matrix times |0>, then <v|Z|v>
        let theta: f64 = 1.0;
        let v = [(theta / 2.0).cos(), (theta / 2.0).sin()];
        let oracle = v[0] * v[0] - v[1] * v[1];
        let s = init_zero_state(1)
            .unwrap()
            .apply_gate(&Gate::ry(0, theta))
            .unwrap();
        let got = s.expectation(&"Z".parse().unwrap()).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 0.540302).abs() < 1e-6);
    }

    #[test]
    fn y_expectation_sign() {
        // RX(-pi/2)|0> = (|0> + i|1>)/sqrt2, the +1 eigenstate of Y
        let s = init_zero_state(1)
            .unwrap()
            .apply_gate(&Gate::rx(0, -FRAC_PI_2))
            .unwrap();
        let y = s.expectation(&"Y".parse().unwrap()).unwrap();
        assert!((y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 3]).is_err());
        assert!(StateVector::from_amplitudes(vec![Complex64::new(1.0, 0.0); 2]).is_err());
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        assert_eq!(
            StateVector::from_amplitudes(vec![h, h]).unwrap().n_qubits(),
            1
        );
    }
}
