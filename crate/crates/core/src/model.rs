//! The full classifier: embedding lookup, stacked attention layers, mean
//! pooling and a sigmoid read-out, trained against a regularized squared error.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::ansatz::ParamVector;
use crate::data::{EmbeddingTable, LabeledSequence};
use crate::error::{QsannError, Result};
use crate::qsal::{
    layer_forward_traced, AttentionMatrix, LayerShape, LayerTrace, ObservableSet, QsalLayerParams,
};
use crate::sim::{NoiseSpec, Simulator};

/// Standard deviation of the Gaussian used for every initial weight.
pub const INIT_STD: f64 = 0.01;

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Label convention shared by every model: 1 iff `y_hat >= 0.5`.
pub fn threshold(y_hat: f64) -> u8 {
    u8::from(y_hat >= 0.5)
}

/// Weights of the two penalty terms: `lambda` on the head weights,
/// `gamma` on the word vectors of each sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Regularization {
    pub lambda: f64,
    pub gamma: f64,
}

/// `(lambda / 2d) |w|^2 + (gamma / 2d) sum_s |x_s|^2`
pub(crate) fn penalty(reg: &Regularization, w: &[f64], inputs: &[Vec<f64>]) -> f64 {
    let d = w.len() as f64;
    let w2: f64 = w.iter().map(|x| x * x).sum();
    let x2: f64 = inputs.iter().flatten().map(|x| x * x).sum();
    reg.lambda / (2.0 * d) * w2 + reg.gamma / (2.0 * d) * x2
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QsannConfig {
    pub n_qubits: usize,
    pub enc_depth: usize,
    pub qkv_depth: usize,
    pub layers: usize,
    #[serde(flatten)]
    pub regularization: Regularization,
    /// Channel applied after the encoder and after each query/key/value circuit.
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
}

impl QsannConfig {
    pub fn new(n_qubits: usize, enc_depth: usize, qkv_depth: usize, layers: usize) -> Self {
        Self {
            n_qubits,
            enc_depth,
            qkv_depth,
            layers,
            regularization: Regularization::default(),
            noise: None,
        }
    }

    pub fn with_regularization(mut self, lambda: f64, gamma: f64) -> Self {
        self.regularization = Regularization { lambda, gamma };
        self
    }

    pub fn with_noise(mut self, noise: Option<NoiseSpec>) -> Self {
        self.noise = noise;
        self
    }

    pub fn shape(&self) -> Result<LayerShape> {
        LayerShape::new(self.n_qubits, self.enc_depth, self.qkv_depth)
    }

    /// Word-vector width `n(D_enc + 2)`.
    pub fn dim(&self) -> usize {
        self.n_qubits * (self.enc_depth + 2)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape()?;
        if self.layers == 0 {
            return Err(QsannError::config(
                "a model needs at least one attention layer",
            ));
        }
        let Regularization { lambda, gamma } = self.regularization;
        if !(lambda >= 0.0 && gamma >= 0.0) {
            return Err(QsannError::config(
                "regularization weights must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParameterCount {
    pub qkv: usize,
    pub head: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub y_hat: f64,
    pub label: u8,
    /// One matrix per layer, first layer first.
    pub attention: Vec<AttentionMatrix>,
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub embedded: Vec<Vec<f64>>,
    pub layers: Vec<LayerTrace>,
    pub pooled: Vec<f64>,
    pub y_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsannModel {
    pub config: QsannConfig,
    pub layers: Vec<QsalLayerParams>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
    pub embeddings: EmbeddingTable,
    pub observables: ObservableSet,
}

impl QsannModel {
    /// Draws every angle, head weight and word vector from N(0, 0.01^2); bias 0.
    pub fn init<R: Rng + ?Sized>(
        config: QsannConfig,
        vocab_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        let shape = config.shape()?;
        let d = config.dim();
        let normal = Normal::new(0.0, INIT_STD).expect("valid std");
        let mut draw = |len: usize| -> Vec<f64> { (0..len).map(|_| normal.sample(rng)).collect() };
        let per_circuit = shape.qkv_spec().param_count();
        let layers = (0..config.layers)
            .map(|_| QsalLayerParams {
                shape,
                theta_q: ParamVector(draw(per_circuit)),
                theta_k: ParamVector(draw(per_circuit)),
                theta_v: ParamVector(draw(per_circuit)),
            })
            .collect();
        let head_w = draw(d);
        let embeddings = EmbeddingTable::from_data(vocab_size, d, draw(vocab_size * d))?;
        Ok(Self {
            config,
            layers,
            head_w,
            head_b: 0.0,
            embeddings,
            observables: ObservableSet::standard(config.n_qubits, d)?,
        })
    }

    /// All-zero parameters, useful as a fixed starting point in tests.
    pub fn zeros(config: QsannConfig, vocab_size: usize) -> Result<Self> {
        config.validate()?;
        let shape = config.shape()?;
        let d = config.dim();
        Ok(Self {
            config,
            layers: vec![QsalLayerParams::zeros(shape); config.layers],
            head_w: vec![0.0; d],
            head_b: 0.0,
            embeddings: EmbeddingTable::zeros(vocab_size, d),
            observables: ObservableSet::standard(config.n_qubits, d)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    pub fn simulator(&self) -> Simulator {
        Simulator::from_option(self.config.noise)
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let d = self.dim();
        if self.layers.len() != self.config.layers {
            return Err(QsannError::config("layer count does not match config"));
        }
        let shape = self.config.shape()?;
        for layer in &self.layers {
            if layer.shape != shape {
                return Err(QsannError::config("layers disagree on their shape"));
            }
            layer.validate()?;
        }
        if self.head_w.len() != d || self.embeddings.dim() != d || self.observables.len() != d {
            return Err(QsannError::config(format!(
                "model widths disagree with d = {d}"
            )));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> ParameterCount {
        parameter_count(&self.config)
    }

    pub fn forward_traced(&self, tokens: &[usize]) -> Result<ForwardTrace> {
        if tokens.is_empty() {
            return Err(QsannError::EmptySequence);
        }
        let sim = self.simulator();
        let embedded = self.embeddings.lookup(tokens);
        let mut layers = Vec::with_capacity(self.layers.len());
        let mut current = embedded.clone();
        for params in &self.layers {
            let trace = layer_forward_traced(&current, params, &self.observables, &sim)?;
            current = trace.outputs.clone();
            layers.push(trace);
        }
        let pooled = mean_pool(&current);
        let logit: f64 = dot(&self.head_w, &pooled) + self.head_b;
        Ok(ForwardTrace {
            embedded,
            layers,
            pooled,
            y_hat: sigmoid(logit),
        })
    }

    pub fn forward(&self, tokens: &[usize]) -> Result<Prediction> {
        let trace = self.forward_traced(tokens)?;
        Ok(Prediction {
            y_hat: trace.y_hat,
            label: threshold(trace.y_hat),
            attention: trace.layers.into_iter().map(|l| l.attention).collect(),
        })
    }

    /// `(y_hat - y)^2 / 2` plus both penalties, for one sample.
    pub fn sample_loss(&self, tokens: &[usize], label: u8) -> Result<f64> {
        let trace = self.forward_traced(tokens)?;
        let err = trace.y_hat - f64::from(label);
        Ok(0.5 * err * err + penalty(&self.config.regularization, &self.head_w, &trace.embedded))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn mean_pool(vectors: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; vectors.first().map_or(0, Vec::len)];
    for v in vectors {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x;
        }
    }
    let n = vectors.len().max(1) as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

/// Trainable parameters outside the embedding table.
pub fn parameter_count(config: &QsannConfig) -> ParameterCount {
    let qkv = config.layers * 3 * config.n_qubits * (config.qkv_depth + 2);
    let head = config.dim() + 1;
    ParameterCount {
        qkv,
        head,
        total: qkv + head,
    }
}

pub fn forward(tokens: &[usize], model: &QsannModel) -> Result<Prediction> {
    model.forward(tokens)
}

/// Batch loss: mean squared error over the batch (halved) plus the head
/// penalty and the batch-mean word-vector penalty.
pub fn loss(batch: &[LabeledSequence], model: &QsannModel) -> Result<f64> {
    if batch.is_empty() {
        return Err(QsannError::config("loss over an empty batch"));
    }
    let total = batch
        .iter()
        .map(|s| model.sample_loss(s.tokens(), s.label()))
        .sum::<Result<f64>>()?;
    Ok(total / batch.len() as f64)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn mc() -> QsannConfig {
        QsannConfig::new(2, 1, 1, 1)
    }

    #[test]
    fn paper_parameter_counts() {
        let count = |n, enc, qkv| {
            let c = parameter_count(&QsannConfig::new(n, enc, qkv, 1));
            (c.qkv, c.head, c.total)
        };
        assert_eq!(count(2, 1, 1), (18, 7, 25));
        assert_eq!(count(4, 1, 1), (36, 13, 49));
        assert_eq!(count(4, 4, 5), (84, 25, 109));
        assert_eq!(count(4, 1, 2), (48, 13, 61));
    }

    #[test]
    fn zero_head_predicts_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = QsannModel::init(mc(), 5, &mut rng).unwrap();
        m.head_w.iter_mut().for_each(|w| *w = 0.0);
        let p = m.forward(&[1, 2, 3]).unwrap();
        assert_eq!(p.y_hat, 0.5);
        assert_eq!(p.label, 1);
        assert_eq!(p.attention.len(), 1);
        assert!(matches!(m.forward(&[]), Err(QsannError::EmptySequence)));
    }

    #[test]
    fn loss_examples() {
        let mut m = QsannModel::zeros(mc(), 3).unwrap();
        let s = LabeledSequence::new(vec![1], 1, "x").unwrap();
        assert!((loss(std::slice::from_ref(&s), &m).unwrap() - 0.125).abs() < 1e-15);
        // push the prediction to ~1 with a large bias
        m.head_b = 60.0;
        assert!(loss(&[s], &m).unwrap() < 1e-20);
        assert!(loss(&[], &m).is_err());
    }

    #[test]
    fn single_token_pool_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = QsannModel::init(mc(), 4, &mut rng).unwrap();
        let t = m.forward_traced(&[2]).unwrap();
        assert_eq!(t.pooled, t.layers[0].outputs[0]);
    }

    #[test]
    fn multilayer_single_token_is_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut cfg = mc();
        cfg.layers = 3;
        let mut m = QsannModel::init(cfg, 4, &mut rng).unwrap();
        let first = m.layers[0].clone();
        m.layers.iter_mut().for_each(|l| *l = first.clone());
        let p = m.forward(&[3]).unwrap();
        assert!(p.y_hat.is_finite() && p.y_hat > 0.0 && p.y_hat < 1.0);
        assert_eq!(p.attention.len(), 3);
    }

    #[test]
    fn init_shapes_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cfg = QsannConfig::new(4, 4, 5, 1);
        let m = QsannModel::init(cfg, 10, &mut rng).unwrap();
        m.validate().unwrap();
        assert_eq!(m.head_w.len(), 24);
        assert_eq!(m.observables.len(), 24);
        assert_eq!(m.embeddings.rows(), 10);
        assert_eq!(m.head_b, 0.0);
        assert!(QsannModel::init(QsannConfig::new(2, 1, 1, 0), 3, &mut rng).is_err());
    }
}
