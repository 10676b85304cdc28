use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ModelKind, RunConfig};
use crate::baselines::{csann_forward, naive_forward, CsannConfig, CsannParams, NaiveParams};
use crate::data::{EmbeddingTable, Vocabulary};
use crate::error::{QsannError, Result};
use crate::model::{Prediction, QsannConfig, QsannModel, Regularization};
use crate::qsal::ObservableSet;
use crate::train::Classifier;

pub const CHECKPOINT_SCHEMA_VERSION: u32 = 1;

/// Any of the three trainable models, so runs can be driven by a config value.
#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Qsann(QsannModel),
    Csann(CsannParams),
    Naive(NaiveParams),
}

impl TrainedModel {
    /// Fresh model with every weight drawn from N(0, 0.01^2) under `seed`.
    pub fn init(config: &RunConfig, vocab_size: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = &config.architecture;
        Ok(match config.model {
            ModelKind::Qsann => Self::Qsann(QsannModel::init(
                config.qsann_config(),
                vocab_size,
                &mut rng,
            )?),
            ModelKind::Csann => Self::Csann(CsannParams::init(a.csann(), vocab_size, &mut rng)?),
            ModelKind::Naive => Self::Naive(NaiveParams::init(
                a.classical_dim,
                vocab_size,
                a.regularization(),
                &mut rng,
            )?),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::Qsann(_) => ModelKind::Qsann,
            Self::Csann(_) => ModelKind::Csann,
            Self::Naive(_) => ModelKind::Naive,
        }
    }

    /// Trainable parameters outside the embedding table.
    pub fn parameter_count(&self) -> usize {
        match self {
            Self::Qsann(m) => m.parameter_count().total,
            Self::Csann(m) => m.parameter_count(),
            Self::Naive(m) => m.parameter_count(),
        }
    }

    pub fn vocab_size(&self) -> usize {
        match self {
            Self::Qsann(m) => m.embeddings.rows(),
            Self::Csann(m) => m.embeddings.rows(),
            Self::Naive(m) => m.embeddings.rows(),
        }
    }

    pub fn forward(&self, tokens: &[usize]) -> Result<Prediction> {
        match self {
            Self::Qsann(m) => m.forward(tokens),
            Self::Csann(m) => csann_forward(tokens, m),
            Self::Naive(m) => naive_forward(tokens, m),
        }
    }
}

impl Classifier for TrainedModel {
    fn predict(&self, tokens: &[usize]) -> Result<f64> {
        match self {
            Self::Qsann(m) => m.predict(tokens),
            Self::Csann(m) => m.predict(tokens),
            Self::Naive(m) => m.predict(tokens),
        }
    }

    fn sample_loss(&self, tokens: &[usize], label: u8) -> Result<f64> {
        match self {
            Self::Qsann(m) => Classifier::sample_loss(m, tokens, label),
            Self::Csann(m) => m.sample_loss(tokens, label),
            Self::Naive(m) => m.sample_loss(tokens, label),
        }
    }

    fn sample_gradient(&self, tokens: &[usize], label: u8) -> Result<Vec<f64>> {
        match self {
            Self::Qsann(m) => m.sample_gradient(tokens, label),
            Self::Csann(m) => m.sample_gradient(tokens, label),
            Self::Naive(m) => m.sample_gradient(tokens, label),
        }
    }

    fn parameters(&self) -> Vec<f64> {
        match self {
            Self::Qsann(m) => m.parameters(),
            Self::Csann(m) => m.parameters(),
            Self::Naive(m) => m.parameters(),
        }
    }

    fn set_parameters(&mut self, values: &[f64]) -> Result<()> {
        match self {
            Self::Qsann(m) => m.set_parameters(values),
            Self::Csann(m) => m.set_parameters(values),
            Self::Naive(m) => m.set_parameters(values),
        }
    }

    fn parameter_len(&self) -> usize {
        match self {
            Self::Qsann(m) => m.parameter_len(),
            Self::Csann(m) => m.parameter_len(),
            Self::Naive(m) => m.parameter_len(),
        }
    }
}

/// Everything needed to rebuild a model except its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelHeader {
    Qsann {
        config: QsannConfig,
        observables: ObservableSet,
    },
    Csann {
        config: CsannConfig,
    },
    Naive {
        dim: usize,
        regularization: Regularization,
    },
}

/// On-disk model: JSON with the flat parameter vector stored as base64 of
/// little-endian f64 values, in [`Classifier::parameters`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub schema_version: u32,
    pub model: ModelHeader,
    pub vocabulary: Vec<String>,
    pub vocab_hash: String,
    pub parameter_len: usize,
    pub parameters: String,
}

pub fn encode_f64s(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    STANDARD.encode(bytes)
}

pub fn decode_f64s(text: &str) -> Result<Vec<f64>> {
    let bytes = STANDARD
        .decode(text)
        .map_err(|e| QsannError::Checkpoint(format!("parameters are not valid base64: {e}")))?;
    if bytes.len() % 8 != 0 {
        return Err(QsannError::Checkpoint(
            "parameter byte length is not a multiple of 8".into(),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

impl Checkpoint {
    pub fn from_model(model: &TrainedModel, vocabulary: &Vocabulary) -> Self {
        let header = match model {
            TrainedModel::Qsann(m) => ModelHeader::Qsann {
                config: m.config,
                observables: m.observables.clone(),
            },
            TrainedModel::Csann(m) => ModelHeader::Csann { config: m.config },
            TrainedModel::Naive(m) => ModelHeader::Naive {
                dim: m.dim(),
                regularization: m.regularization,
            },
        };
        let params = model.parameters();
        Self {
            schema_version: CHECKPOINT_SCHEMA_VERSION,
            model: header,
            vocabulary: vocabulary.tokens().to_vec(),
            vocab_hash: vocabulary.hash(),
            parameter_len: params.len(),
            parameters: encode_f64s(&params),
        }
    }

    pub fn restore(&self) -> Result<(TrainedModel, Vocabulary)> {
        if self.schema_version != CHECKPOINT_SCHEMA_VERSION {
            return Err(QsannError::Checkpoint(format!(
                "unsupported schema version {}",
                self.schema_version
            )));
        }
        let vocabulary = Vocabulary::from_stored(self.vocabulary.clone())
            .map_err(|e| QsannError::Checkpoint(e.to_string()))?;
        if vocabulary.hash() != self.vocab_hash {
            return Err(QsannError::Checkpoint(
                "vocabulary does not match its recorded hash".into(),
            ));
        }
        let rows = vocabulary.len();
        let mut model = match &self.model {
            ModelHeader::Qsann {
                config,
                observables,
            } => {
                let mut m = QsannModel::zeros(*config, rows)?;
                if observables.len() != m.dim() {
                    return Err(QsannError::Checkpoint(
                        "observable count does not match the model".into(),
                    ));
                }
                m.observables = observables.clone();
                TrainedModel::Qsann(m)
            }
            ModelHeader::Csann { config } => {
                let mut m = CsannParams::init(*config, rows, &mut ChaCha8Rng::seed_from_u64(0))?;
                m.embeddings = EmbeddingTable::zeros(rows, config.dim);
                TrainedModel::Csann(m)
            }
            ModelHeader::Naive {
                dim,
                regularization,
            } => TrainedModel::Naive(NaiveParams::init(
                *dim,
                rows,
                *regularization,
                &mut ChaCha8Rng::seed_from_u64(0),
            )?),
        };
        let values = decode_f64s(&self.parameters)?;
        if values.len() != self.parameter_len || values.len() != model.parameter_len() {
            return Err(QsannError::Checkpoint(format!(
                "expected {} parameters, found {}",
                model.parameter_len(),
                values.len()
            )));
        }
        model.set_parameters(&values)?;
        Ok((model, vocabulary))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        std::fs::write(path, text + "\n").map_err(|e| QsannError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            QsannError::config(format!("cannot read checkpoint {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| QsannError::Checkpoint(format!("{}: {e}", path.display())))
    }
}
