use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;

use num_complex::Complex64;

use crate::error::{QsannError, Result};

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A gate from the fixed instruction set used by the ansatz circuits.
///
/// Rotation angles are stored canonicalized to `[0, 2π)`. The constructors
/// do this; building the variants by hand skips it, which only changes the
/// global phase of the result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    I(usize),
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Rx { target: usize, angle: f64 },
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    Cnot { control: usize, target: usize },
}

/// Wraps an angle into `[0, 2π)`.
pub fn canonical_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

impl Gate {
    pub fn rx(target: usize, angle: f64) -> Self {
        Gate::Rx {
            target,
            angle: canonical_angle(angle),
        }
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        Gate::Ry {
            target,
            angle: canonical_angle(angle),
        }
    }

    pub fn rz(target: usize, angle: f64) -> Self {
        Gate::Rz {
            target,
            angle: canonical_angle(angle),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn target(&self) -> usize {
        match *self {
            Gate::I(t) | Gate::H(t) | Gate::X(t) | Gate::Y(t) | Gate::Z(t) => t,
            Gate::Rx { target, .. } | Gate::Ry { target, .. } | Gate::Rz { target, .. } => target,
            Gate::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => Some(angle),
            _ => None,
        }
    }

    pub fn is_rotation(&self) -> bool {
        self.angle().is_some()
    }

    /// Checks every qubit index against the register size.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let target = self.target();
        if target >= n_qubits {
            return Err(QsannError::index(format!(
                "gate target {target} out of range for {n_qubits} qubits"
            )));
        }
        if let Some(control) = self.control() {
            if control >= n_qubits {
                return Err(QsannError::index(format!(
                    "gate control {control} out of range for {n_qubits} qubits"
                )));
            }
            if control == target {
                return Err(QsannError::index(format!(
                    "CNOT control and target are both qubit {target}"
                )));
            }
        }
        Ok(())
    }

    /// The 2x2 matrix of a single-qubit gate; `None` for CNOT.
    pub fn matrix(&self) -> Option<Mat2> {
        let m = match *self {
            Gate::I(_) => [[ONE, ZERO], [ZERO, ONE]],
            Gate::H(_) => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Gate::X(_) => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Y(_) => [
                [ZERO, Complex64::new(0.0, -1.0)],
                [Complex64::new(0.0, 1.0), ZERO],
            ],
            Gate::Z(_) => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::Rx { angle, .. } => {
                let (s, c) = (angle / 2.0).sin_cos();
                let c = Complex64::new(c, 0.0);
                let ms = Complex64::new(0.0, -s);
                [[c, ms], [ms, c]]
            }
            Gate::Ry { angle, .. } => {
                let (s, c) = (angle / 2.0).sin_cos();
                [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ]
            }
            Gate::Rz { angle, .. } => {
                let (s, c) = (angle / 2.0).sin_cos();
                [[Complex64::new(c, -s), ZERO], [ZERO, Complex64::new(c, s)]]
            }
            Gate::Cnot { .. } => return None,
        };
        Some(m)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::I(t) => write!(f, "I({t})"),
            Gate::H(t) => write!(f, "H({t})"),
            Gate::X(t) => write!(f, "X({t})"),
            Gate::Y(t) => write!(f, "Y({t})"),
            Gate::Z(t) => write!(f, "Z({t})"),
            Gate::Rx { target, angle } => write!(f, "RX({target}, {angle:.6})"),
            Gate::Ry { target, angle } => write!(f, "RY({target}, {angle:.6})"),
            Gate::Rz { target, angle } => write!(f, "RZ({target}, {angle:.6})"),
            Gate::Cnot { control, target } => write!(f, "CNOT({control}->{target})"),
        }
    }
}
