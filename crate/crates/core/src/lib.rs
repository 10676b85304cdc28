//! Quantum self-attention neural networks for binary text classification.
//!
//! The crate bundles everything needed to train and study the model on a
//! laptop: an exact simulator ([`sim`]), the strongly-entangling circuit
//! family ([`ansatz`]), the Gaussian-projected attention layer ([`qsal`]),
//! the full classifier and loss ([`model`]), parameter-shift gradients and
//! Adam training ([`grad`], [`optim`], [`train`]), corpus handling
//! ([`data`]), classical baselines ([`baselines`]) and the experiment
//! runner behind the `qsann` binary ([`cli`]).

pub mod ansatz;
pub mod baselines;
pub mod cli;
pub mod data;
pub mod error;
pub mod grad;
pub mod model;
pub mod optim;
pub mod qsal;
pub mod sim;
pub mod train;

pub use error::{QsannError, Result};
