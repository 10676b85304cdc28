use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QsannError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of single-qubit Paulis, one letter per qubit, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

/// Bit masks used to evaluate `P|i> = phase(i) |i ^ flip>`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PauliMasks {
    pub flip: usize,
    pub sign: usize,
    pub y_phase: Complex64,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(QsannError::config("Pauli string needs at least one qubit"));
        }
        Ok(Self { letters })
    }

    pub fn identity(n_qubits: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n_qubits.max(1)],
        }
    }

    /// A single non-identity letter on `qubit`, identity elsewhere.
    pub fn single(n_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        if qubit >= n_qubits {
            return Err(QsannError::index(format!(
                "qubit {qubit} out of range for {n_qubits} qubits"
            )));
        }
        let mut letters = vec![Pauli::I; n_qubits];
        letters[qubit] = pauli;
        Self::new(letters)
    }

    /// The same letter on two distinct qubits.
    pub fn pair(n_qubits: usize, a: usize, b: usize, pauli: Pauli) -> Result<Self> {
        if a == b {
            return Err(QsannError::config(
                "pair observable needs two distinct qubits",
            ));
        }
        let mut s = Self::single(n_qubits, a, pauli)?;
        if b >= n_qubits {
            return Err(QsannError::index(format!(
                "qubit {b} out of range for {n_qubits} qubits"
            )));
        }
        s.letters[b] = pauli;
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub(crate) fn check_qubits(&self, n_qubits: usize) -> Result<()> {
        if self.letters.len() != n_qubits {
            return Err(QsannError::index(format!(
                "observable {self} has {} qubits, state has {n_qubits}",
                self.letters.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn masks(&self) -> PauliMasks {
        let n = self.letters.len();
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut n_y = 0u32;
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    n_y += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        let y_phase = match n_y % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        PauliMasks {
            flip,
            sign,
            y_phase,
        }
    }
}

impl PauliMasks {
    /// Phase picked up by basis state `i`.
    #[inline]
    pub fn phase(&self, i: usize) -> Complex64 {
        if (i & self.sign).count_ones() % 2 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = QsannError;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(QsannError::config(format!(
                    "invalid Pauli letter '{other}'"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
