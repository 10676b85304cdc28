use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{CsannConfig, CSANN_DIM};
use crate::data::ratios_from_counts;
use crate::error::{QsannError, Result};
use crate::model::{QsannConfig, Regularization};
use crate::sim::NoiseSpec;
use crate::train::TrainConfig;

pub const RUN_CONFIG_SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the directory that holds run outputs when a
/// config does not set `output_dir`.
pub const OUTPUT_ROOT_ENV: &str = "QSANN_OUTPUT_ROOT";

const PRESETS: [(&str, &str); 5] = [
    ("mc", include_str!("../../presets/mc.toml")),
    ("rp", include_str!("../../presets/rp.toml")),
    ("yelp", include_str!("../../presets/yelp.toml")),
    ("imdb", include_str!("../../presets/imdb.toml")),
    ("amazon", include_str!("../../presets/amazon.toml")),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Qsann,
    Csann,
    Naive,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Qsann => "qsann",
            Self::Csann => "csann",
            Self::Naive => "naive",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = QsannError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qsann" => Ok(Self::Qsann),
            "csann" => Ok(Self::Csann),
            "naive" => Ok(Self::Naive),
            other => Err(QsannError::config(format!("unknown model kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    /// One `text<TAB>label` pair per line.
    #[default]
    Tsv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub path: PathBuf,
    #[serde(default)]
    pub format: DatasetFormat,
    /// Split fractions, train first; two or three entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratios: Option<Vec<f64>>,
    /// Split sizes, converted to fractions of the loaded corpus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<usize>>,
    #[serde(default)]
    pub split_seed: u64,
}

impl DatasetConfig {
    pub fn split_ratios(&self) -> Result<Vec<f64>> {
        match (&self.ratios, &self.counts) {
            (Some(_), Some(_)) => Err(QsannError::config(
                "give either split ratios or split counts, not both",
            )),
            (Some(r), None) => Ok(r.clone()),
            (None, Some(c)) => ratios_from_counts(c),
            (None, None) => Ok(vec![0.8, 0.2]),
        }
    }
}

/// Model hyperparameters. `dim` is implied by the quantum settings and only
/// checked when given; the classical models use `classical_dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureConfig {
    pub n_qubits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub enc_depth: usize,
    pub qkv_depth: usize,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_classical_dim")]
    pub classical_dim: usize,
}

fn default_layers() -> usize {
    1
}

fn default_classical_dim() -> usize {
    CSANN_DIM
}

impl ArchitectureConfig {
    pub fn regularization(&self) -> Regularization {
        Regularization {
            lambda: self.lambda,
            gamma: self.gamma,
        }
    }

    pub fn csann(&self) -> CsannConfig {
        CsannConfig {
            dim: self.classical_dim,
            regularization: self.regularization(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "current_schema")]
    pub schema_version: u32,
    pub model: ModelKind,
    /// Label used for the output directory when `output_dir` is unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// One independent training per seed; the seed drives both the
    /// initialization and the shuffling.
    pub seeds: Vec<u64>,
    pub dataset: DatasetConfig,
    pub architecture: ArchitectureConfig,
    pub train: TrainConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSpec>,
}

fn current_schema() -> u32 {
    RUN_CONFIG_SCHEMA_VERSION
}

/// Command-line values that replace the corresponding file values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<ModelKind>,
    pub dataset: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub seeds: Option<Vec<u64>>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub batch_size: Option<usize>,
    pub noise: Option<NoiseSpec>,
}

impl RunConfig {
    pub fn preset_names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|(n, _)| *n)
    }

    /// One of the shipped hyperparameter presets (`mc`, `rp`, `yelp`, `imdb`,
    /// `amazon`); its dataset path is a placeholder to be overridden.
    pub fn preset(name: &str) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == lower)
            .ok_or_else(|| QsannError::config(format!("unknown preset '{name}'")))?;
        let mut cfg = Self::from_toml_str(text, Path::new(&format!("presets/{lower}.toml")))?;
        cfg.name = Some(lower);
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| QsannError::Parse {
            path: origin.to_path_buf(),
            line: e
                .span()
                .map_or(0, |s| text[..s.start].lines().count().max(1)),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            QsannError::config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&text, path)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self)
            .map_err(|e| QsannError::config(format!("cannot serialize config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(m) = o.model {
            self.model = m;
        }
        if let Some(p) = &o.dataset {
            self.dataset.path = p.clone();
        }
        if let Some(p) = &o.output_dir {
            self.output_dir = Some(p.clone());
        }
        if let Some(s) = &o.seeds {
            self.seeds = s.clone();
        }
        if let Some(e) = o.epochs {
            self.train.epochs = e;
        }
        if let Some(lr) = o.learning_rate {
            self.train.learning_rate = lr;
        }
        if let Some(b) = o.batch_size {
            self.train.batch_size = b;
        }
        if let Some(n) = o.noise {
            self.noise = Some(n);
        }
    }

    pub fn qsann_config(&self) -> QsannConfig {
        let a = &self.architecture;
        QsannConfig::new(a.n_qubits, a.enc_depth, a.qkv_depth, a.layers)
            .with_regularization(a.lambda, a.gamma)
            .with_noise(self.noise)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != RUN_CONFIG_SCHEMA_VERSION {
            return Err(QsannError::config(format!(
                "unsupported config schema version {} (expected {RUN_CONFIG_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(QsannError::config("seed list is empty"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(QsannError::config("seed list contains duplicates"));
        }
        self.train.validate()?;
        self.dataset.split_ratios()?;
        let a = &self.architecture;
        for (name, v) in [("lambda", a.lambda), ("gamma", a.gamma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(QsannError::config(format!(
                    "{name} must be a non-negative number"
                )));
            }
        }
        match self.model {
            ModelKind::Qsann => {
                let cfg = self.qsann_config();
                cfg.validate()?;
                if let Some(d) = a.dim {
                    if d != cfg.dim() {
                        return Err(QsannError::config(format!(
                            "dim {d} does not match n_qubits * (enc_depth + 2) = {}",
                            cfg.dim()
                        )));
                    }
                }
            }
            ModelKind::Csann | ModelKind::Naive => {
                if self.noise.is_some() {
                    return Err(QsannError::config(
                        "noise is only meaningful for the qsann model",
                    ));
                }
                if a.classical_dim == 0 {
                    return Err(QsannError::config("classical_dim must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Explicit `output_dir`, else `$QSANN_OUTPUT_ROOT/<name>`, else `runs/<name>`.
    pub fn resolved_output_dir(&self) -> PathBuf {
        if let Some(dir) = &self.output_dir {
            return dir.clone();
        }
        let root =
            std::env::var_os(OUTPUT_ROOT_ENV).map_or_else(|| PathBuf::from("runs"), PathBuf::from);
        root.join(
            self.name
                .clone()
                .unwrap_or_else(|| self.model.name().to_string()),
        )
    }
}
