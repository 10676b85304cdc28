//! Finite-shot estimates of Pauli expectations.
//!
//! Training and the acceptance checks always use exact expectations. These
//! helpers exist for studying how shot noise perturbs a trained model.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::backend::Register;
use super::pauli::PauliString;
use crate::error::{QsannError, Result};

/// Estimates `<P>` from `shots` projective measurements in the eigenbasis of `P`.
///
/// A Pauli measurement returns +1 with probability `(1 + <P>) / 2`, so the
/// shot record is a binomial draw around the exact value.
pub fn sample_expectation<R: Rng + ?Sized>(
    reg: &Register,
    obs: &PauliString,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(QsannError::config("shot count must be positive"));
    }
    let exact = reg.expectation(obs)?;
    if obs.is_identity() {
        return Ok(exact);
    }
    let p_plus = ((1.0 + exact) / 2.0).clamp(0.0, 1.0);
    let dist = Binomial::new(shots, p_plus).map_err(|e| QsannError::config(e.to_string()))?;
    let plus = dist.sample(rng) as f64;
    Ok((2.0 * plus - shots as f64) / shots as f64)
}
