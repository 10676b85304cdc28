use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tokenize::tokenize;
use super::vocab::Vocabulary;
use crate::error::{QsannError, Result};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

/// A tokenized sentence with its binary label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSequence {
    tokens: Vec<usize>,
    label: u8,
    text: String,
}

impl LabeledSequence {
    pub fn new(tokens: Vec<usize>, label: u8, text: impl Into<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(QsannError::EmptySequence);
        }
        if label > 1 {
            return Err(QsannError::config(format!("label {label} is not 0 or 1")));
        }
        Ok(Self {
            tokens,
            label,
            text: text.into(),
        })
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn label(&self) -> u8 {
        self.label
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

/// Reads `text<TAB>label` lines. Blank lines are skipped; anything else
/// without exactly one trailing 0/1 label is an error naming the line.
pub fn load_tsv(path: impl AsRef<Path>) -> Result<Vec<(String, u8)>> {
    let path = path.as_ref();
    let content = fs::read_to_string(path)
        .map_err(|e| QsannError::Config(format!("cannot read dataset {}: {e}", path.display())))?;
    parse_tsv(&content, path)
}

/// Writes samples in the format [`load_tsv`] reads.
pub fn write_tsv(samples: &[(String, u8)], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for (text, label) in samples {
        if text.contains(['\t', '\n']) {
            return Err(QsannError::config(format!(
                "sample '{text}' contains a tab or newline"
            )));
        }
        out.push_str(&format!("{text}\t{label}\n"));
    }
    fs::write(path, out).map_err(|e| QsannError::io(path, e))
}

pub fn parse_tsv(content: &str, path: &Path) -> Result<Vec<(String, u8)>> {
    let parse_err = |line: usize, message: String| QsannError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out = Vec::new();
    for (i, raw) in content.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (text, label) = line
            .rsplit_once('\t')
            .ok_or_else(|| parse_err(i + 1, "missing tab-separated label".into()))?;
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(parse_err(i + 1, format!("label '{other}' is not 0 or 1"))),
        };
        out.push((text.to_string(), label));
    }
    if out.is_empty() {
        return Err(parse_err(0, "dataset is empty".into()));
    }
    Ok(out)
}

/// Train/dev/test splits sharing a training-set vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub train: Vec<LabeledSequence>,
    pub dev: Vec<LabeledSequence>,
    pub test: Vec<LabeledSequence>,
    pub vocabulary: Vocabulary,
}

fn split_sizes(total: usize, ratios: &[f64]) -> Result<Vec<usize>> {
    if !(2..=3).contains(&ratios.len()) {
        return Err(QsannError::config(format!(
            "expected 2 (train/test) or 3 (train/dev/test) split ratios, got {}",
            ratios.len()
        )));
    }
    if ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(QsannError::config("split ratios must be non-negative"));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(QsannError::config(format!(
            "split ratios sum to {sum}, expected 1"
        )));
    }
    let mut sizes: Vec<usize> = ratios[..ratios.len() - 1]
        .iter()
        .map(|r| (r * total as f64).round() as usize)
        .collect();
    let used: usize = sizes.iter().sum();
    if used > total {
        return Err(QsannError::config("split ratios exceed the sample count"));
    }
    sizes.push(total - used);
    if sizes.iter().zip(ratios).any(|(&s, &r)| r > 0.0 && s == 0) {
        return Err(QsannError::config(format!(
            "{total} samples are too few for split ratios {ratios:?}"
        )));
    }
    Ok(sizes)
}

/// Shuffles `samples` under `seed`, cuts them by `ratios` (train, [dev,] test)
/// and builds the vocabulary from the training split only.
pub fn build_splits(samples: &[(String, u8)], ratios: &[f64], seed: u64) -> Result<Dataset> {
    let sizes = split_sizes(samples.len(), ratios)?;
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let tokenized: Vec<Vec<String>> = samples.iter().map(|(t, _)| tokenize(t)).collect();
    if let Some(i) = tokenized.iter().position(Vec::is_empty) {
        return Err(QsannError::config(format!(
            "sample {} ('{}') has no tokens",
            i + 1,
            samples[i].0
        )));
    }

    let train_idx = &order[..sizes[0]];
    let vocabulary =
        Vocabulary::from_tokens(train_idx.iter().flat_map(|&i| tokenized[i].iter().cloned()));

    let make = |idx: &[usize]| -> Result<Vec<LabeledSequence>> {
        idx.iter()
            .map(|&i| {
                LabeledSequence::new(
                    vocabulary.encode(&tokenized[i]),
                    samples[i].1,
                    samples[i].0.clone(),
                )
            })
            .collect()
    };
    let train = make(train_idx)?;
    let (dev, test) = if sizes.len() == 3 {
        let dev_end = sizes[0] + sizes[1];
        (make(&order[sizes[0]..dev_end])?, make(&order[dev_end..])?)
    } else {
        (Vec::new(), make(&order[sizes[0]..])?)
    };
    Ok(Dataset {
        train,
        dev,
        test,
        vocabulary,
    })
}

/// Ratios equivalent to exact split counts, e.g. `[70, 30, 30]`.
pub fn ratios_from_counts(counts: &[usize]) -> Result<Vec<f64>> {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(QsannError::config("split counts are all zero"));
    }
    Ok(counts.iter().map(|&c| c as f64 / total as f64).collect())
}

/// Encodes raw samples with an existing vocabulary (unknown words become OOV).
pub fn encode_samples(
    samples: &[(String, u8)],
    vocabulary: &Vocabulary,
) -> Result<Vec<LabeledSequence>> {
    samples
        .iter()
        .map(|(text, label)| {
            LabeledSequence::new(vocabulary.encode_text(text), *label, text.clone())
        })
        .collect()
}

/// Records how a [`Dataset`] was produced so it can be rebuilt exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub source_path: PathBuf,
    pub seed: u64,
    pub ratios: Vec<f64>,
    pub split_sizes: Vec<usize>,
    pub vocab_size: usize,
    pub vocab_hash: String,
}

impl DatasetManifest {
    pub fn describe(dataset: &Dataset, source_path: &Path, ratios: &[f64], seed: u64) -> Self {
        let mut split_sizes = vec![dataset.train.len()];
        if ratios.len() == 3 {
            split_sizes.push(dataset.dev.len());
        }
        split_sizes.push(dataset.test.len());
        Self {
            schema_version: MANIFEST_SCHEMA_VERSION,
            source_path: source_path.to_path_buf(),
            seed,
            ratios: ratios.to_vec(),
            split_sizes,
            vocab_size: dataset.vocabulary.len(),
            vocab_hash: dataset.vocabulary.hash(),
        }
    }

    /// Reloads the source and rebuilds the splits this manifest describes.
    pub fn rebuild(&self) -> Result<Dataset> {
        let samples = load_tsv(&self.source_path)?;
        let dataset = build_splits(&samples, &self.ratios, self.seed)?;
        if dataset.vocabulary.hash() != self.vocab_hash {
            return Err(QsannError::VocabularyMismatch {
                checkpoint: self.vocab_hash.clone(),
                dataset: dataset.vocabulary.hash(),
            });
        }
        Ok(dataset)
    }
}
