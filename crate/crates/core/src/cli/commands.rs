use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{Checkpoint, TrainedModel};
use super::config::{ModelKind, RunConfig};
use crate::data::{
    build_splits, encode_samples, load_tsv, tokenize, Dataset, DatasetManifest, LabeledSequence,
    Vocabulary,
};
use crate::error::{QsannError, Result};
use crate::sim::{NoiseKind, NoiseSpec};
use crate::train::{evaluate, train, EpochMetrics, StopReason, TrainConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const METRICS_FILE: &str = "metrics.jsonl";
pub const MANIFEST_FILE: &str = "dataset_manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const SUMMARY_FILE: &str = "summary.json";

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| QsannError::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| QsannError::io(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_vec_pretty(value).expect("report serializes");
    text.push(b'\n');
    text
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Loads the configured corpus and cuts it into splits.
pub fn load_dataset(config: &RunConfig) -> Result<(Dataset, DatasetManifest)> {
    let path = &config.dataset.path;
    if !path.is_file() {
        return Err(QsannError::config(format!(
            "dataset {} does not exist",
            path.display()
        )));
    }
    let ratios = config.dataset.split_ratios()?;
    let samples = load_tsv(path)?;
    let dataset = build_splits(&samples, &ratios, config.dataset.split_seed)?;
    let manifest = DatasetManifest::describe(&dataset, path, &ratios, config.dataset.split_seed);
    Ok((dataset, manifest))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    pub seed: u64,
    pub epochs_run: usize,
    pub train_acc: f64,
    pub test_acc: f64,
    pub final_train_loss: f64,
    pub stop: StopReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyStats {
    pub mean: f64,
    /// Sample standard deviation across seeds (0 for a single seed).
    pub std: f64,
}

impl AccuracyStats {
    fn of(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub schema_version: u32,
    pub model_kind: ModelKind,
    pub parameter_count: usize,
    pub vocab_size: usize,
    pub seeds: Vec<SeedResult>,
    pub train_acc: AccuracyStats,
    pub test_acc: AccuracyStats,
}

#[derive(Serialize)]
struct MetricsLine<'a> {
    schema_version: u32,
    seed: u64,
    #[serde(flatten)]
    metrics: &'a EpochMetrics,
}

/// One finished training, kept in memory.
pub struct SeedRun {
    pub seed: u64,
    pub model: TrainedModel,
    pub log: Vec<EpochMetrics>,
    pub stop: StopReason,
}

impl SeedRun {
    pub fn result(&self) -> SeedResult {
        let last = self.log.last().expect("log holds the initial epoch");
        SeedResult {
            seed: self.seed,
            epochs_run: last.epoch,
            train_acc: last.train_acc,
            test_acc: last.test_acc,
            final_train_loss: last.train_loss,
            stop: self.stop.clone(),
        }
    }

    pub fn metrics_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.log {
            let line = MetricsLine {
                schema_version: REPORT_SCHEMA_VERSION,
                seed: self.seed,
                metrics: m,
            };
            out.push_str(&serde_json::to_string(&line).expect("metrics serialize"));
            out.push('\n');
        }
        out
    }
}

/// Trains one model per configured seed, in parallel.
pub fn run_seeds(config: &RunConfig, dataset: &Dataset) -> Result<Vec<SeedRun>> {
    config
        .seeds
        .par_iter()
        .map(|&seed| {
            let model = TrainedModel::init(config, dataset.vocabulary.len(), seed)?;
            let train_config = TrainConfig {
                seed,
                ..config.train.clone()
            };
            let outcome = train(dataset, model, &train_config)?;
            Ok(SeedRun {
                seed,
                model: outcome.model,
                log: outcome.log,
                stop: outcome.stop,
            })
        })
        .collect()
}

pub fn summarize(kind: ModelKind, runs: &[SeedRun], vocab_size: usize) -> TrainSummary {
    let seeds: Vec<SeedResult> = runs.iter().map(SeedRun::result).collect();
    let train: Vec<f64> = seeds.iter().map(|s| s.train_acc).collect();
    let test: Vec<f64> = seeds.iter().map(|s| s.test_acc).collect();
    TrainSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        model_kind: kind,
        parameter_count: runs.first().map_or(0, |r| r.model.parameter_count()),
        vocab_size,
        seeds,
        train_acc: AccuracyStats::of(&train),
        test_acc: AccuracyStats::of(&test),
    }
}

/// Directory holding one seed's artifacts.
pub fn seed_dir(output: &Path, seed: u64) -> PathBuf {
    output.join(format!("seed-{seed}"))
}

/// Runs every seed of `config` and writes, under the output directory, the
/// effective config, the dataset manifest, one directory per seed (checkpoint
/// and metrics) and `summary.json`.
///
/// A non-finite loss still writes everything, then reports a runtime error.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    config.validate()?;
    let (dataset, manifest) = load_dataset(config)?;
    let output = config.resolved_output_dir();
    create_dir(&output)?;
    write_file(
        &output.join(CONFIG_FILE),
        config.to_toml_string()?.as_bytes(),
    )?;
    write_file(&output.join(MANIFEST_FILE), &to_json(&manifest))?;

    let runs = run_seeds(config, &dataset)?;
    for run in &runs {
        let dir = seed_dir(&output, run.seed);
        create_dir(&dir)?;
        write_file(&dir.join(METRICS_FILE), run.metrics_jsonl().as_bytes())?;
        Checkpoint::from_model(&run.model, &dataset.vocabulary).save(&dir.join(CHECKPOINT_FILE))?;
    }
    let summary = summarize(config.model, &runs, dataset.vocabulary.len());
    write_file(&output.join(SUMMARY_FILE), &to_json(&summary))?;

    if let Some(bad) = summary
        .seeds
        .iter()
        .find(|s| matches!(s.stop, StopReason::NonFinite { .. }))
    {
        return Err(QsannError::NonFinite(format!(
            "seed {} stopped early; partial artifacts kept in {}",
            bad.seed,
            output.display()
        )));
    }
    Ok(summary)
}

pub fn cmd_train_file(path: &Path, overrides: &super::config::Overrides) -> Result<TrainSummary> {
    let mut config = RunConfig::load(path)?;
    config.apply(overrides);
    cmd_train(&config)
}

/// Where evaluation and attention samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSource {
    /// A dataset manifest from a training run; the named split is rebuilt.
    Manifest { path: PathBuf, split: Split },
    /// A raw TSV file, encoded with the checkpoint's vocabulary.
    Tsv(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Dev,
    Test,
}

impl std::str::FromStr for Split {
    type Err = QsannError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Self::Train),
            "dev" => Ok(Self::Dev),
            "test" => Ok(Self::Test),
            other => Err(QsannError::config(format!("unknown split '{other}'"))),
        }
    }
}

impl SampleSource {
    /// Manifest files end in `.json`; anything else is read as TSV.
    pub fn infer(path: &Path, split: Split) -> Self {
        if path.extension().is_some_and(|e| e == "json") {
            Self::Manifest {
                path: path.to_path_buf(),
                split,
            }
        } else {
            Self::Tsv(path.to_path_buf())
        }
    }

    fn describe(&self) -> String {
        match self {
            Self::Manifest { path, split } => {
                format!("{} ({split:?})", path.display()).to_lowercase()
            }
            Self::Tsv(path) => path.display().to_string(),
        }
    }

    pub fn load(&self, vocabulary: &Vocabulary) -> Result<Vec<LabeledSequence>> {
        match self {
            Self::Manifest { path, split } => {
                let text = fs::read_to_string(path).map_err(|e| {
                    QsannError::config(format!("cannot read manifest {}: {e}", path.display()))
                })?;
                let manifest: DatasetManifest =
                    serde_json::from_str(&text).map_err(|e| QsannError::Parse {
                        path: path.clone(),
                        line: e.line(),
                        message: e.to_string(),
                    })?;
                if manifest.vocab_hash != vocabulary.hash() {
                    return Err(QsannError::VocabularyMismatch {
                        checkpoint: vocabulary.hash(),
                        dataset: manifest.vocab_hash,
                    });
                }
                let ds = manifest.rebuild()?;
                Ok(match split {
                    Split::Train => ds.train,
                    Split::Dev => ds.dev,
                    Split::Test => ds.test,
                })
            }
            Self::Tsv(path) => encode_samples(&load_tsv(path)?, vocabulary),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub model_kind: ModelKind,
    pub checkpoint: PathBuf,
    pub dataset: String,
    pub samples: usize,
    pub accuracy: f64,
    pub mean_loss: f64,
}

/// Accuracy and mean loss of a saved model; written to `output` when given.
pub fn cmd_eval(
    checkpoint: &Path,
    source: &SampleSource,
    output: Option<&Path>,
) -> Result<EvalReport> {
    let (model, vocabulary) = Checkpoint::load(checkpoint)?.restore()?;
    let samples = source.load(&vocabulary)?;
    let eval = evaluate(&samples, &model)?;
    let report = EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        model_kind: model.kind(),
        checkpoint: checkpoint.to_path_buf(),
        dataset: source.describe(),
        samples: samples.len(),
        accuracy: eval.accuracy,
        mean_loss: eval.mean_loss,
    };
    if let Some(path) = output {
        write_file(path, &to_json(&report))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionExport {
    pub index: usize,
    pub text: String,
    pub words: Vec<String>,
    /// Column means of the attention matrix, one per word.
    pub averaged: Vec<f64>,
    pub averaged_csv: PathBuf,
    pub matrix_csv: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionIndex {
    pub schema_version: u32,
    pub model_kind: ModelKind,
    pub layer: usize,
    pub exports: Vec<AttentionExport>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row<'a>(fields: impl IntoIterator<Item = &'a str>) -> String {
    let mut row = fields
        .into_iter()
        .map(csv_field)
        .collect::<Vec<_>>()
        .join(",");
    row.push('\n');
    row
}

/// For each selected sample writes `attention_<i>_averaged.csv` (one header
/// row of words, one row of per-word averaged coefficients) and
/// `attention_<i>_matrix.csv` (the full matrix, rows labelled by word), plus
/// an `attention_index.json` listing them.
pub fn cmd_attention(
    checkpoint: &Path,
    source: &SampleSource,
    indices: &[usize],
    layer: usize,
    output: &Path,
) -> Result<AttentionIndex> {
    let (model, vocabulary) = Checkpoint::load(checkpoint)?.restore()?;
    if model.kind() == ModelKind::Naive {
        return Err(QsannError::config("the naive model has no attention"));
    }
    let samples = source.load(&vocabulary)?;
    if let Some(&bad) = indices.iter().find(|&&i| i >= samples.len()) {
        return Err(QsannError::index(format!(
            "sample {bad} out of range ({} samples)",
            samples.len()
        )));
    }
    create_dir(output)?;
    let mut exports = Vec::with_capacity(indices.len());
    for &i in indices {
        let sample = &samples[i];
        let prediction = model.forward(sample.tokens())?;
        let attention = prediction.attention.get(layer).ok_or_else(|| {
            QsannError::index(format!(
                "layer {layer} out of range ({} layers)",
                prediction.attention.len()
            ))
        })?;
        let words = tokenize(sample.text());
        let averaged = attention.column_means();

        let averaged_csv = output.join(format!("attention_{i}_averaged.csv"));
        let values: Vec<String> = averaged.iter().map(f64::to_string).collect();
        let text =
            csv_row(words.iter().map(String::as_str)) + &csv_row(values.iter().map(String::as_str));
        write_file(&averaged_csv, text.as_bytes())?;

        let matrix_csv = output.join(format!("attention_{i}_matrix.csv"));
        let mut text = csv_row(std::iter::once("word").chain(words.iter().map(String::as_str)));
        for (w, row) in words.iter().zip(attention.rows()) {
            let values: Vec<String> = row.iter().map(f64::to_string).collect();
            text += &csv_row(std::iter::once(w.as_str()).chain(values.iter().map(String::as_str)));
        }
        write_file(&matrix_csv, text.as_bytes())?;

        exports.push(AttentionExport {
            index: i,
            text: sample.text().to_string(),
            words,
            averaged,
            averaged_csv,
            matrix_csv,
        });
    }
    let index = AttentionIndex {
        schema_version: REPORT_SCHEMA_VERSION,
        model_kind: model.kind(),
        layer,
        exports,
    };
    write_file(&output.join("attention_index.json"), &to_json(&index))?;
    Ok(index)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepEntry {
    /// `None` for the noiseless reference run.
    pub channel: Option<NoiseKind>,
    pub p: f64,
    pub train_acc: Vec<f64>,
    pub test_acc: Vec<f64>,
    pub test_stats: AccuracyStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSweepSummary {
    pub schema_version: u32,
    pub seeds: Vec<u64>,
    pub entries: Vec<NoiseSweepEntry>,
}

/// Reruns the configured experiment for every channel and noise level
/// (channel-major), preceded by a noiseless reference, and writes the raw
/// per-seed accuracies to `noise_sweep.json` in the output directory.
pub fn cmd_noise_sweep(
    config: &RunConfig,
    kinds: &[NoiseKind],
    levels: &[f64],
) -> Result<NoiseSweepSummary> {
    if config.model != ModelKind::Qsann {
        return Err(QsannError::config("noise sweeps need the qsann model"));
    }
    if levels.is_empty() || kinds.is_empty() {
        return Err(QsannError::config(
            "noise sweep needs at least one channel and one level",
        ));
    }
    let specs: Vec<NoiseSpec> = kinds
        .iter()
        .flat_map(|&k| levels.iter().map(move |&p| NoiseSpec::new(k, p)))
        .collect::<Result<_>>()?;
    let mut base = config.clone();
    base.noise = None;
    base.validate()?;
    let (dataset, _) = load_dataset(&base)?;

    let run = |noise: Option<NoiseSpec>| -> Result<NoiseSweepEntry> {
        let cfg = RunConfig {
            noise,
            ..base.clone()
        };
        let runs = run_seeds(&cfg, &dataset)?;
        let results: Vec<SeedResult> = runs.iter().map(SeedRun::result).collect();
        let test_acc: Vec<f64> = results.iter().map(|r| r.test_acc).collect();
        Ok(NoiseSweepEntry {
            channel: noise.map(|n| n.kind),
            p: noise.map_or(0.0, |n| n.p),
            train_acc: results.iter().map(|r| r.train_acc).collect(),
            test_stats: AccuracyStats::of(&test_acc),
            test_acc,
        })
    };
    let mut entries = vec![run(None)?];
    for spec in specs {
        entries.push(run(Some(spec))?);
    }
    let summary = NoiseSweepSummary {
        schema_version: REPORT_SCHEMA_VERSION,
        seeds: base.seeds.clone(),
        entries,
    };
    let output = config.resolved_output_dir();
    create_dir(&output)?;
    write_file(&output.join("noise_sweep.json"), &to_json(&summary))?;
    Ok(summary)
}

/// Prints a JSON value on one line to stdout.
pub fn print_json<T: Serialize>(value: &T) {
    let mut out = std::io::stdout().lock();
    let _ = serde_json::to_writer(&mut out, value);
    let _ = writeln!(out);
}
