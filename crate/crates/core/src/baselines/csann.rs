use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_nonempty, scatter_rows};
use crate::data::EmbeddingTable;
use crate::error::{QsannError, Result};
use crate::model::{
    dot, mean_pool, penalty, sigmoid, threshold, Prediction, Regularization, INIT_STD,
};
use crate::qsal::AttentionMatrix;
use crate::train::{check_len, scatter, Classifier};

/// Embedding width of the classical attention baseline.
pub const CSANN_DIM: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CsannConfig {
    pub dim: usize,
    #[serde(flatten)]
    pub regularization: Regularization,
}

impl Default for CsannConfig {
    fn default() -> Self {
        Self {
            dim: CSANN_DIM,
            regularization: Regularization::default(),
        }
    }
}

/// Single-head softmax self-attention without residual connection.
/// Weight matrices are row-major `dim x dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsannParams {
    pub config: CsannConfig,
    pub w_q: Vec<f64>,
    pub w_k: Vec<f64>,
    pub w_v: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
    pub embeddings: EmbeddingTable,
}

struct Trace {
    xs: Vec<Vec<f64>>,
    qs: Vec<Vec<f64>>,
    ks: Vec<Vec<f64>>,
    vs: Vec<Vec<f64>>,
    attention: AttentionMatrix,
    pooled: Vec<f64>,
    y_hat: f64,
}

fn matvec(m: &[f64], x: &[f64]) -> Vec<f64> {
    m.chunks(x.len()).map(|row| dot(row, x)).collect()
}

fn matvec_t(m: &[f64], y: &[f64]) -> Vec<f64> {
    let d = y.len();
    let mut out = vec![0.0; d];
    for (r, yr) in y.iter().enumerate() {
        for (o, w) in out.iter_mut().zip(&m[r * d..(r + 1) * d]) {
            *o += w * yr;
        }
    }
    out
}

fn add_outer(acc: &mut [f64], a: &[f64], b: &[f64]) {
    let d = b.len();
    for (r, ar) in a.iter().enumerate() {
        for (o, bc) in acc[r * d..(r + 1) * d].iter_mut().zip(b) {
            *o += ar * bc;
        }
    }
}

impl CsannParams {
    pub fn init<R: Rng + ?Sized>(
        config: CsannConfig,
        vocab_size: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if config.dim == 0 {
            return Err(QsannError::config("embedding dimension must be positive"));
        }
        let d = config.dim;
        let mut draw = |len: usize| {
            EmbeddingTable::gaussian(1, len, INIT_STD, rng)
                .as_slice()
                .to_vec()
        };
        Ok(Self {
            config,
            w_q: draw(d * d),
            w_k: draw(d * d),
            w_v: draw(d * d),
            head_w: draw(d),
            head_b: 0.0,
            embeddings: EmbeddingTable::gaussian(vocab_size, d, INIT_STD, rng),
        })
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        for (name, m) in [("w_q", &self.w_q), ("w_k", &self.w_k), ("w_v", &self.w_v)] {
            if m.len() != d * d {
                return Err(QsannError::config(format!("{name} must be {d}x{d}")));
            }
        }
        if self.head_w.len() != d || self.embeddings.dim() != d {
            return Err(QsannError::config(
                "head and embeddings must match the attention dimension",
            ));
        }
        Ok(())
    }

    /// Attention matrices plus head; embeddings excluded.
    pub fn parameter_count(&self) -> usize {
        let d = self.dim();
        3 * d * d + d + 1
    }

    fn trace(&self, tokens: &[usize]) -> Result<Trace> {
        check_nonempty(tokens)?;
        let xs = self.embeddings.lookup(tokens);
        let qs: Vec<_> = xs.iter().map(|x| matvec(&self.w_q, x)).collect();
        let ks: Vec<_> = xs.iter().map(|x| matvec(&self.w_k, x)).collect();
        let vs: Vec<_> = xs.iter().map(|x| matvec(&self.w_v, x)).collect();
        let size = xs.len();
        let mut raw = Vec::with_capacity(size * size);
        for q in &qs {
            let scores: Vec<f64> = ks.iter().map(|k| dot(q, k)).collect();
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            raw.extend(scores.iter().map(|s| (s - max).exp()));
        }
        let attention = AttentionMatrix::from_raw(size, raw)?;
        let ys: Vec<Vec<f64>> = attention
            .rows()
            .map(|row| {
                let mut y = vec![0.0; self.dim()];
                for (a, v) in row.iter().zip(&vs) {
                    for (yi, vi) in y.iter_mut().zip(v) {
                        *yi += a * vi;
                    }
                }
                y
            })
            .collect();
        let pooled = mean_pool(&ys);
        let y_hat = sigmoid(dot(&self.head_w, &pooled) + self.head_b);
        Ok(Trace {
            xs,
            qs,
            ks,
            vs,
            attention,
            pooled,
            y_hat,
        })
    }
}

pub fn csann_forward(tokens: &[usize], params: &CsannParams) -> Result<Prediction> {
    let t = params.trace(tokens)?;
    Ok(Prediction {
        y_hat: t.y_hat,
        label: threshold(t.y_hat),
        attention: vec![t.attention],
    })
}

impl Classifier for CsannParams {
    fn predict(&self, tokens: &[usize]) -> Result<f64> {
        Ok(self.trace(tokens)?.y_hat)
    }

    fn sample_loss(&self, tokens: &[usize], label: u8) -> Result<f64> {
        let t = self.trace(tokens)?;
        let err = t.y_hat - f64::from(label);
        Ok(0.5 * err * err + penalty(&self.config.regularization, &self.head_w, &t.xs))
    }

    fn sample_gradient(&self, tokens: &[usize], label: u8) -> Result<Vec<f64>> {
        let t = self.trace(tokens)?;
        let d = self.dim();
        let df = d as f64;
        let size = t.xs.len();
        let reg = self.config.regularization;
        let delta = (t.y_hat - f64::from(label)) * t.y_hat * (1.0 - t.y_hat);

        // every y_s receives the same upstream gradient through the mean
        let g: Vec<f64> = self
            .head_w
            .iter()
            .map(|w| delta * w / size as f64)
            .collect();
        let mut dq = vec![vec![0.0; d]; size];
        let mut dk = vec![vec![0.0; d]; size];
        let mut dv = vec![vec![0.0; d]; size];
        for s in 0..size {
            let row = t.attention.row(s);
            let da: Vec<f64> = t.vs.iter().map(|v| dot(&g, v)).collect();
            let mean_da = dot(row, &da);
            for j in 0..size {
                for (o, gi) in dv[j].iter_mut().zip(&g) {
                    *o += row[j] * gi;
                }
                let ds = row[j] * (da[j] - mean_da);
                for i in 0..d {
                    dq[s][i] += ds * t.ks[j][i];
                    dk[j][i] += ds * t.qs[s][i];
                }
            }
        }

        let mut d_wq = vec![0.0; d * d];
        let mut d_wk = vec![0.0; d * d];
        let mut d_wv = vec![0.0; d * d];
        let mut dx = Vec::with_capacity(size);
        for s in 0..size {
            add_outer(&mut d_wq, &dq[s], &t.xs[s]);
            add_outer(&mut d_wk, &dk[s], &t.xs[s]);
            add_outer(&mut d_wv, &dv[s], &t.xs[s]);
            let a = matvec_t(&self.w_q, &dq[s]);
            let b = matvec_t(&self.w_k, &dk[s]);
            let c = matvec_t(&self.w_v, &dv[s]);
            dx.push(
                (0..d)
                    .map(|i| a[i] + b[i] + c[i] + reg.gamma / df * t.xs[s][i])
                    .collect::<Vec<f64>>(),
            );
        }

        let mut out = Vec::with_capacity(self.parameter_len());
        out.extend(d_wq);
        out.extend(d_wk);
        out.extend(d_wv);
        out.extend(
            self.head_w
                .iter()
                .zip(&t.pooled)
                .map(|(w, p)| delta * p + reg.lambda / df * w),
        );
        out.push(delta);
        let mut table = vec![0.0; self.embeddings.as_slice().len()];
        scatter_rows(&mut table, d, self.embeddings.rows(), tokens, &dx);
        out.extend(table);
        Ok(out)
    }

    fn parameters(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_len());
        out.extend_from_slice(&self.w_q);
        out.extend_from_slice(&self.w_k);
        out.extend_from_slice(&self.w_v);
        out.extend_from_slice(&self.head_w);
        out.push(self.head_b);
        out.extend_from_slice(self.embeddings.as_slice());
        out
    }

    fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        check_len(self.parameter_len(), values.len())?;
        let mut b = [0.0];
        scatter(
            values,
            vec![
                &mut self.w_q,
                &mut self.w_k,
                &mut self.w_v,
                &mut self.head_w,
                &mut b,
                self.embeddings.as_mut_slice(),
            ],
        );
        self.head_b = b[0];
        Ok(())
    }

    fn parameter_len(&self) -> usize {
        self.parameter_count() + self.embeddings.as_slice().len()
    }
}
