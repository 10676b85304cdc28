use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::gate::Mat2;
use crate::error::{QsannError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    /// `(1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)`
    Depolarizing,
    /// Kraus pair `E0 = |0><0| + sqrt(1-p)|1><1|`, `E1 = sqrt(p)|0><1|`.
    AmplitudeDamping,
}

impl NoiseKind {
    pub const ALL: [NoiseKind; 2] = [NoiseKind::Depolarizing, NoiseKind::AmplitudeDamping];

    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::AmplitudeDamping => "amplitude_damping",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = QsannError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" => Ok(NoiseKind::Depolarizing),
            "amplitude_damping" | "amplitude-damping" => Ok(NoiseKind::AmplitudeDamping),
            other => Err(QsannError::config(format!("unknown noise kind '{other}'"))),
        }
    }
}

/// A single-qubit channel of the given kind and strength acting on `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseChannel {
    kind: NoiseKind,
    p: f64,
    target: usize,
}

pub(crate) fn check_noise_level(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(QsannError::config(format!(
            "noise level {p} outside [0, 1]"
        )));
    }
    Ok(())
}

impl NoiseChannel {
    pub fn new(kind: NoiseKind, p: f64, target: usize) -> Result<Self> {
        check_noise_level(p)?;
        Ok(Self { kind, p, target })
    }

    pub fn depolarizing(p: f64, target: usize) -> Result<Self> {
        Self::new(NoiseKind::Depolarizing, p, target)
    }

    pub fn amplitude_damping(p: f64, target: usize) -> Result<Self> {
        Self::new(NoiseKind::AmplitudeDamping, p, target)
    }

    pub fn kind(&self) -> NoiseKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn kraus_operators(&self) -> Vec<Mat2> {
        let z = Complex64::new(0.0, 0.0);
        let r = |x: f64| Complex64::new(x, 0.0);
        let p = self.p;
        match self.kind {
            NoiseKind::Depolarizing => {
                let a = r((1.0 - p).sqrt());
                let b = (p / 3.0).sqrt();
                vec![
                    [[a, z], [z, a]],
                    [[z, r(b)], [r(b), z]],
                    [[z, Complex64::new(0.0, -b)], [Complex64::new(0.0, b), z]],
                    [[r(b), z], [z, r(-b)]],
                ]
            }
            NoiseKind::AmplitudeDamping => vec![
                [[r(1.0), z], [z, r((1.0 - p).sqrt())]],
                [[z, r(p.sqrt())], [z, z]],
            ],
        }
    }
}
