use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_nonempty, scatter_rows};
use crate::data::EmbeddingTable;
use crate::error::{QsannError, Result};
use crate::model::{
    dot, mean_pool, penalty, sigmoid, threshold, Prediction, Regularization, INIT_STD,
};
use crate::train::{check_len, scatter, Classifier};

/// Logistic read-out of the averaged word vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveParams {
    pub head_w: Vec<f64>,
    pub head_b: f64,
    pub embeddings: EmbeddingTable,
    #[serde(default)]
    pub regularization: Regularization,
}

impl NaiveParams {
    pub fn init<R: Rng + ?Sized>(
        dim: usize,
        vocab_size: usize,
        regularization: Regularization,
        rng: &mut R,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(QsannError::config("embedding dimension must be positive"));
        }
        let embeddings = EmbeddingTable::gaussian(vocab_size, dim, INIT_STD, rng);
        let head_w = EmbeddingTable::gaussian(1, dim, INIT_STD, rng)
            .as_slice()
            .to_vec();
        Ok(Self {
            head_w,
            head_b: 0.0,
            embeddings,
            regularization,
        })
    }

    pub fn dim(&self) -> usize {
        self.head_w.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.head_w.len() != self.embeddings.dim() {
            return Err(QsannError::config(format!(
                "head has {} weights but embeddings have dimension {}",
                self.head_w.len(),
                self.embeddings.dim()
            )));
        }
        Ok(())
    }

    /// Head weights and bias; embeddings excluded.
    pub fn parameter_count(&self) -> usize {
        self.dim() + 1
    }
}

pub fn naive_forward(tokens: &[usize], params: &NaiveParams) -> Result<Prediction> {
    check_nonempty(tokens)?;
    let pooled = mean_pool(&params.embeddings.lookup(tokens));
    let y_hat = sigmoid(dot(&params.head_w, &pooled) + params.head_b);
    Ok(Prediction {
        y_hat,
        label: threshold(y_hat),
        attention: Vec::new(),
    })
}

impl Classifier for NaiveParams {
    fn predict(&self, tokens: &[usize]) -> Result<f64> {
        Ok(naive_forward(tokens, self)?.y_hat)
    }

    fn sample_loss(&self, tokens: &[usize], label: u8) -> Result<f64> {
        let y_hat = self.predict(tokens)?;
        let err = y_hat - f64::from(label);
        let xs = self.embeddings.lookup(tokens);
        Ok(0.5 * err * err + penalty(&self.regularization, &self.head_w, &xs))
    }

    fn sample_gradient(&self, tokens: &[usize], label: u8) -> Result<Vec<f64>> {
        check_nonempty(tokens)?;
        let d = self.dim();
        let xs = self.embeddings.lookup(tokens);
        let pooled = mean_pool(&xs);
        let y_hat = sigmoid(dot(&self.head_w, &pooled) + self.head_b);
        let delta = (y_hat - f64::from(label)) * y_hat * (1.0 - y_hat);
        let reg = self.regularization;
        let df = d as f64;
        let s = xs.len() as f64;

        let mut out = Vec::with_capacity(self.parameter_len());
        out.extend(
            self.head_w
                .iter()
                .zip(&pooled)
                .map(|(w, p)| delta * p + reg.lambda / df * w),
        );
        out.push(delta);
        let dx: Vec<Vec<f64>> = xs
            .iter()
            .map(|x| {
                x.iter()
                    .zip(&self.head_w)
                    .map(|(xi, w)| delta * w / s + reg.gamma / df * xi)
                    .collect()
            })
            .collect();
        let mut table = vec![0.0; self.embeddings.as_slice().len()];
        scatter_rows(&mut table, d, self.embeddings.rows(), tokens, &dx);
        out.extend(table);
        Ok(out)
    }

    fn parameters(&self) -> Vec<f64> {
        let mut out = self.head_w.clone();
        out.push(self.head_b);
        out.extend_from_slice(self.embeddings.as_slice());
        out
    }

    fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        check_len(self.parameter_len(), values.len())?;
        let mut b = [0.0];
        scatter(
            values,
            vec![&mut self.head_w, &mut b, self.embeddings.as_mut_slice()],
        );
        self.head_b = b[0];
        Ok(())
    }

    fn parameter_len(&self) -> usize {
        self.dim() + 1 + self.embeddings.as_slice().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn seventeen_parameters_at_dimension_sixteen() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = NaiveParams::init(16, 5, Regularization::default(), &mut rng).unwrap();
        assert_eq!(p.parameter_count(), 17);
    }

    #[test]
    fn zero_head_predicts_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut p = NaiveParams::init(4, 3, Regularization::default(), &mut rng).unwrap();
        p.head_w = vec![0.0; 4];
        assert_eq!(naive_forward(&[1, 2], &p).unwrap().y_hat, 0.5);
    }

    #[test]
    fn single_token_pools_to_its_embedding() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = NaiveParams::init(3, 3, Regularization::default(), &mut rng).unwrap();
        let x = p.embeddings.row(2).to_vec();
        let expected = sigmoid(dot(&p.head_w, &x));
        assert_eq!(naive_forward(&[2], &p).unwrap().y_hat, expected);
    }

    #[test]
    fn empty_sequence_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = NaiveParams::init(3, 3, Regularization::default(), &mut rng).unwrap();
        assert!(matches!(
            naive_forward(&[], &p),
            Err(QsannError::EmptySequence)
        ));
    }
}
