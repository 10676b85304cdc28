//! Classical comparison models sharing the quantum model's pooling, head,
//! loss and training harness.

mod csann;
mod naive;

pub use csann::{csann_forward, CsannConfig, CsannParams, CSANN_DIM};
pub use naive::{naive_forward, NaiveParams};

use crate::error::{QsannError, Result};

pub(crate) fn check_nonempty(tokens: &[usize]) -> Result<()> {
    if tokens.is_empty() {
        return Err(QsannError::EmptySequence);
    }
    Ok(())
}

/// Accumulates one gradient row per token into a dense table gradient.
pub(crate) fn scatter_rows(
    table: &mut [f64],
    dim: usize,
    rows: usize,
    tokens: &[usize],
    grads: &[Vec<f64>],
) {
    for (&t, g) in tokens.iter().zip(grads) {
        // out-of-range ids read the OOV row, so that is where their gradient goes
        let id = if t < rows { t } else { 0 };
        for (dst, v) in table[id * dim..(id + 1) * dim].iter_mut().zip(g) {
            *dst += v;
        }
    }
}
