//! The shared training and evaluation harness.
//!
//! Every model (quantum or classical) implements [`Classifier`], exposing a
//! flat parameter vector plus per-sample loss and gradient. [`train`] runs
//! Adam over shuffled mini-batches (size 1 by default) and logs one
//! [`EpochMetrics`] line per epoch, with epoch 0 describing the initial model.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LabeledSequence};
use crate::error::{QsannError, Result};
use crate::grad::backward;
use crate::model::{threshold, QsannModel};
use crate::optim::AdamState;

pub trait Classifier: Clone + Send + Sync {
    /// Probability of label 1.
    fn predict(&self, tokens: &[usize]) -> Result<f64>;

    /// Squared error plus regularization for one sample.
    fn sample_loss(&self, tokens: &[usize], label: u8) -> Result<f64>;

    /// Gradient of [`Classifier::sample_loss`], in [`Classifier::parameters`] order.
    fn sample_gradient(&self, tokens: &[usize], label: u8) -> Result<Vec<f64>>;

    /// Every trainable value, embeddings included.
    fn parameters(&self) -> Vec<f64>;

    fn set_parameters(&mut self, values: &[f64]) -> Result<()>;

    fn parameter_len(&self) -> usize {
        self.parameters().len()
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(QsannError::config(format!(
            "expected {expected} parameter values, got {got}"
        )));
    }
    Ok(())
}

/// Copies consecutive chunks of `values` into each destination slice.
pub(crate) fn scatter(values: &[f64], targets: Vec<&mut [f64]>) {
    let mut offset = 0;
    for t in targets {
        let len = t.len();
        t.copy_from_slice(&values[offset..offset + len]);
        offset += len;
    }
}

impl Classifier for QsannModel {
    fn predict(&self, tokens: &[usize]) -> Result<f64> {
        Ok(self.forward(tokens)?.y_hat)
    }

    fn sample_loss(&self, tokens: &[usize], label: u8) -> Result<f64> {
        QsannModel::sample_loss(self, tokens, label)
    }

    fn sample_gradient(&self, tokens: &[usize], label: u8) -> Result<Vec<f64>> {
        Ok(backward(tokens, label, self)?.flatten(self))
    }

    fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_len());
        for l in &self.layers {
            out.extend_from_slice(&l.theta_q);
            out.extend_from_slice(&l.theta_k);
            out.extend_from_slice(&l.theta_v);
        }
        out.extend_from_slice(&self.head_w);
        out.push(self.head_b);
        out.extend_from_slice(self.embeddings.as_slice());
        out
    }

    fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        check_len(self.parameter_len(), values.len())?;
        let mut b = [0.0];
        let mut targets: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.layers {
            targets.push(&mut l.theta_q);
            targets.push(&mut l.theta_k);
            targets.push(&mut l.theta_v);
        }
        targets.push(&mut self.head_w);
        targets.push(&mut b);
        targets.push(self.embeddings.as_mut_slice());
        scatter(values, targets);
        self.head_b = b[0];
        Ok(())
    }

    fn parameter_len(&self) -> usize {
        self.parameter_count().total + self.embeddings.as_slice().len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default)]
    pub seed: u64,
    /// Epochs averaged by the convergence test.
    #[serde(default = "default_stop_window")]
    pub stop_window: usize,
    /// Mean relative loss change below which training stops.
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    /// Judge convergence on the dev split instead of the training split.
    #[serde(default)]
    pub dev_early_stopping: bool,
    /// Adds `wall_time_s` to every metrics line. Off by default so that
    /// identical runs produce identical logs.
    #[serde(default)]
    pub record_wall_time: bool,
}

fn default_batch_size() -> usize {
    1
}

fn default_stop_window() -> usize {
    10
}

fn default_stop_tol() -> f64 {
    1e-4
}

impl TrainConfig {
    pub fn new(learning_rate: f64, epochs: usize) -> Self {
        Self {
            learning_rate,
            epochs,
            batch_size: default_batch_size(),
            seed: 0,
            stop_window: default_stop_window(),
            stop_tol: default_stop_tol(),
            dev_early_stopping: false,
            record_wall_time: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(QsannError::config("learning rate must be positive"));
        }
        if self.epochs == 0 {
            return Err(QsannError::config("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(QsannError::config("batch size must be at least 1"));
        }
        if self.stop_window == 0 {
            return Err(QsannError::config("stop window must be at least 1"));
        }
        if self.stop_tol.is_nan() || self.stop_tol < 0.0 {
            return Err(QsannError::config("stop tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub test_acc: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum StopReason {
    EpochsExhausted,
    Converged { epoch: usize },
    NonFinite { epoch: usize, message: String },
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<C> {
    /// Final model, or the last one with a finite loss if training aborted.
    pub model: C,
    pub log: Vec<EpochMetrics>,
    pub stop: StopReason,
}

impl<C> TrainOutcome<C> {
    pub fn aborted(&self) -> bool {
        matches!(self.stop, StopReason::NonFinite { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub mean_loss: f64,
}

/// Accuracy under the 0.5 threshold and mean per-sample loss.
pub fn evaluate<C: Classifier>(samples: &[LabeledSequence], model: &C) -> Result<Evaluation> {
    if samples.is_empty() {
        return Err(QsannError::config("cannot evaluate on an empty sample set"));
    }
    // collect before reducing so the float sums do not depend on scheduling
    let per_sample: Vec<(bool, f64)> = samples
        .par_iter()
        .map(|s| {
            let y_hat = model.predict(s.tokens())?;
            let loss = model.sample_loss(s.tokens(), s.label())?;
            Ok((threshold(y_hat) == s.label(), loss))
        })
        .collect::<Result<_>>()?;
    let n = samples.len() as f64;
    let correct = per_sample.iter().filter(|(ok, _)| *ok).count() as f64;
    let loss = per_sample.iter().map(|(_, l)| l).sum::<f64>() / n;
    Ok(Evaluation {
        accuracy: correct / n,
        mean_loss: loss,
    })
}

/// Mean gradient over a batch.
pub fn batch_gradient<C: Classifier>(model: &C, batch: &[&LabeledSequence]) -> Result<Vec<f64>> {
    let grads: Vec<Vec<f64>> = batch
        .par_iter()
        .map(|s| model.sample_gradient(s.tokens(), s.label()))
        .collect::<Result<_>>()?;
    let mut out = vec![0.0; model.parameter_len()];
    for g in &grads {
        out.iter_mut().zip(g).for_each(|(o, x)| *o += x);
    }
    let n = batch.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    Ok(out)
}

fn converged(history: &[f64], window: usize, tol: f64) -> bool {
    if history.len() <= window {
        return false;
    }
    let tail = &history[history.len() - window - 1..];
    let mean_change = tail
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / w[0].abs().max(1e-12))
        .sum::<f64>()
        / window as f64;
    mean_change < tol
}

/// Trains `model` on `dataset.train` with Adam.
///
/// Stops when the epochs run out, when the mean relative loss change over
/// the last `stop_window` epochs drops below `stop_tol`, or when a loss or
/// gradient turns non-finite (returning the last good model).
pub fn train<C: Classifier>(
    dataset: &Dataset,
    model: C,
    config: &TrainConfig,
) -> Result<TrainOutcome<C>> {
    config.validate()?;
    if dataset.train.is_empty() {
        return Err(QsannError::config("training split is empty"));
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let use_dev = config.dev_early_stopping && !dataset.dev.is_empty();

    let mut model = model;
    let mut adam = AdamState::new(model.parameter_len());
    let mut log = Vec::with_capacity(config.epochs + 1);
    let mut history = Vec::with_capacity(config.epochs + 1);

    let snapshot = |model: &C, epoch: usize| -> Result<(EpochMetrics, f64)> {
        let train_eval = evaluate(&dataset.train, model)?;
        let test_acc = if dataset.test.is_empty() {
            f64::NAN
        } else {
            evaluate(&dataset.test, model)?.accuracy
        };
        let watched = if use_dev {
            evaluate(&dataset.dev, model)?.mean_loss
        } else {
            train_eval.mean_loss
        };
        let metrics = EpochMetrics {
            epoch,
            train_loss: train_eval.mean_loss,
            train_acc: train_eval.accuracy,
            test_acc,
            wall_time_s: config
                .record_wall_time
                .then(|| start.elapsed().as_secs_f64()),
        };
        Ok((metrics, watched))
    };

    let (initial, watched) = snapshot(&model, 0)?;
    if !initial.train_loss.is_finite() {
        return Err(QsannError::NonFinite("initial training loss".into()));
    }
    log.push(initial);
    history.push(watched);

    let mut order: Vec<usize> = (0..dataset.train.len()).collect();
    for epoch in 1..=config.epochs {
        let last_good = model.clone();
        order.shuffle(&mut rng);
        let mut failure = None;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<&LabeledSequence> = chunk.iter().map(|&i| &dataset.train[i]).collect();
            let step = batch_gradient(&model, &batch).and_then(|g| {
                let mut params = model.parameters();
                adam.update(&mut params, &g, config.learning_rate)?;
                model.set_parameters(&params)
            });
            if let Err(e) = step {
                failure = Some(e);
                break;
            }
        }
        let snap = match failure {
            Some(e) => Err(e),
            None => snapshot(&model, epoch),
        };
        match snap {
            Ok((metrics, watched)) if metrics.train_loss.is_finite() => {
                log.push(metrics);
                history.push(watched);
            }
            Ok((metrics, _)) => {
                return Ok(TrainOutcome {
                    model: last_good,
                    log,
                    stop: StopReason::NonFinite {
                        epoch,
                        message: format!("training loss {}", metrics.train_loss),
                    },
                });
            }
            Err(QsannError::NonFinite(message)) => {
                return Ok(TrainOutcome {
                    model: last_good,
                    log,
                    stop: StopReason::NonFinite { epoch, message },
                });
            }
            Err(e) => return Err(e),
        }
        if converged(&history, config.stop_window, config.stop_tol) {
            return Ok(TrainOutcome {
                model,
                log,
                stop: StopReason::Converged { epoch },
            });
        }
    }
    Ok(TrainOutcome {
        model,
        log,
        stop: StopReason::EpochsExhausted,
    })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;

    use super::*;
    use crate::data::{build_splits, synthetic::separable_corpus};
    use crate::model::QsannConfig;

    fn toy() -> Dataset {
        build_splits(&separable_corpus(20, 1), &[0.8, 0.2], 2).unwrap()
    }

    fn model(ds: &Dataset, seed: u64) -> QsannModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        QsannModel::init(QsannConfig::new(2, 1, 1, 1), ds.vocabulary.len(), &mut rng).unwrap()
    }

    #[test]
    fn rejects_zero_epochs() {
        let ds = toy();
        let cfg = TrainConfig::new(0.01, 0);
        assert!(matches!(
            train(&ds, model(&ds, 0), &cfg),
            Err(QsannError::Config(_))
        ));
        assert!(TrainConfig {
            batch_size: 0,
            ..TrainConfig::new(0.1, 1)
        }
        .validate()
        .is_err());
        assert!(TrainConfig::new(-0.1, 1).validate().is_err());
    }

    #[test]
    fn parameters_round_trip() {
        let ds = toy();
        let mut m = model(&ds, 3);
        let p = m.parameters();
        assert_eq!(p.len(), m.parameter_len());
        let shifted: Vec<f64> = p.iter().map(|x| x + 1.0).collect();
        m.set_parameters(&shifted).unwrap();
        assert_eq!(m.parameters(), shifted);
        assert_eq!(m.head_b, 1.0);
        assert!(m.set_parameters(&p[1..]).is_err());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let ds = toy();
        let cfg = TrainConfig::new(0.05, 3).with_seed(4);
        let a = train(&ds, model(&ds, 4), &cfg).unwrap();
        let b = train(&ds, model(&ds, 4), &cfg).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.model.parameters(), b.model.parameters());
        assert_eq!(a.log.len(), 4);
        assert_eq!(a.log[0].epoch, 0);
    }

    #[test]
    fn zero_head_accuracy_is_positive_fraction() {
        let ds = toy();
        let mut m = model(&ds, 0);
        m.head_w.iter_mut().for_each(|w| *w = 0.0);
        let e = evaluate(&ds.test, &m).unwrap();
        let pos = ds.test.iter().filter(|s| s.label() == 1).count() as f64 / ds.test.len() as f64;
        assert_eq!(e.accuracy, pos);
        assert!((e.mean_loss - 0.125).abs() < 0.01);
        assert!(evaluate::<QsannModel>(&[], &m).is_err());
    }

    #[test]
    fn evaluation_ignores_order() {
        let ds = toy();
        let m = model(&ds, 6);
        let mut rev = ds.train.clone();
        rev.reverse();
        assert_eq!(
            evaluate(&ds.train, &m).unwrap().accuracy,
            evaluate(&rev, &m).unwrap().accuracy
        );
    }

    #[test]
    fn convergence_rule() {
        assert!(!converged(&[1.0, 0.5], 2, 1e-4));
        assert!(converged(&[1.0, 1.0, 1.0], 2, 1e-4));
        assert!(!converged(&[1.0, 0.9, 0.8], 2, 1e-4));
    }
}
