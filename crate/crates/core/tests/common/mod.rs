//! Test-only oracles, independent of the library's fast paths.
#![allow(dead_code)]

use num_complex::Complex64;
use qsann::sim::{Gate, Pauli, PauliString};
use qsann::train::Classifier;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) })
                .collect()
        })
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for k in 0..b.len() {
            if a[i][k] == c(0.0, 0.0) {
                continue;
            }
            for j in 0..m {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(a: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn dagger(a: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

/// 2x2 matrices written out from their textbook definitions.
pub fn single_qubit(gate: &Gate) -> Matrix {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    match *gate {
        Gate::I(_) => identity(2),
        Gate::H(_) => vec![vec![c(s2, 0.0), c(s2, 0.0)], vec![c(s2, 0.0), c(-s2, 0.0)]],
        Gate::X(_) => pauli(Pauli::X),
        Gate::Y(_) => pauli(Pauli::Y),
        Gate::Z(_) => pauli(Pauli::Z),
        Gate::Rx { angle, .. } => rotation(Pauli::X, angle),
        Gate::Ry { angle, .. } => rotation(Pauli::Y, angle),
        Gate::Rz { angle, .. } => rotation(Pauli::Z, angle),
        Gate::Cnot { .. } => panic!("not single qubit"),
    }
}

pub fn pauli(p: Pauli) -> Matrix {
    match p {
        Pauli::I => identity(2),
        Pauli::X => vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ],
        Pauli::Y => vec![
            vec![c(0.0, 0.0), c(0.0, -1.0)],
            vec![c(0.0, 1.0), c(0.0, 0.0)],
        ],
        Pauli::Z => vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ],
    }
}

/// `exp(-i theta P / 2) = cos(theta/2) I - i sin(theta/2) P`
pub fn rotation(p: Pauli, theta: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let pm = pauli(p);
    let id = identity(2);
    (0..2)
        .map(|i| {
            (0..2)
                .map(|j| id[i][j] * co + pm[i][j] * c(0.0, -s))
                .collect()
        })
        .collect()
}

/// Full `2^n x 2^n` unitary: single-qubit gates as Kronecker products
/// (qubit 0 leftmost), CNOT as `|0><0| (x) I + |1><1| (x) X` on its qubits.
pub fn full_unitary(gate: &Gate, n: usize) -> Matrix {
    match *gate {
        Gate::Cnot { control, target } => {
            let p0 = vec![
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(0.0, 0.0)],
            ];
            let p1 = vec![
                vec![c(0.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ];
            let mut a = identity(1);
            let mut b = identity(1);
            for q in 0..n {
                let (fa, fb) = if q == control {
                    (p0.clone(), p1.clone())
                } else if q == target {
                    (identity(2), pauli(Pauli::X))
                } else {
                    (identity(2), identity(2))
                };
                a = kron(&a, &fa);
                b = kron(&b, &fb);
            }
            a.iter()
                .zip(&b)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
                .collect()
        }
        _ => {
            let mut m = identity(1);
            for q in 0..n {
                let f = if q == gate.target() {
                    single_qubit(gate)
                } else {
                    identity(2)
                };
                m = kron(&m, &f);
            }
            m
        }
    }
}

pub fn pauli_matrix(p: &PauliString) -> Matrix {
    p.letters()
        .iter()
        .fold(identity(1), |acc, &l| kron(&acc, &pauli(l)))
}

pub fn circuit_state(gates: &[Gate], n: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << n];
    v[0] = c(1.0, 0.0);
    for g in gates {
        v = matvec(&full_unitary(g, n), &v);
    }
    v
}

pub fn expectation(v: &[Complex64], p: &PauliString) -> f64 {
    let pv = matvec(&pauli_matrix(p), v);
    v.iter()
        .zip(&pv)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .re
}

/// Central finite-difference gradient of the per-sample loss.
pub fn finite_difference<C: Classifier>(
    model: &C,
    tokens: &[usize],
    label: u8,
    h: f64,
) -> Vec<f64> {
    let base = model.parameters();
    (0..base.len())
        .map(|i| {
            let mut m = model.clone();
            let mut p = base.clone();
            p[i] = base[i] + h;
            m.set_parameters(&p).unwrap();
            let up = m.sample_loss(tokens, label).unwrap();
            p[i] = base[i] - h;
            m.set_parameters(&p).unwrap();
            let down = m.sample_loss(tokens, label).unwrap();
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Passes if within `abs` absolutely or `rel` relatively, whichever is looser.
pub fn close(analytic: f64, numeric: f64, abs: f64, rel: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= abs || diff <= rel * numeric.abs().max(analytic.abs())
}
