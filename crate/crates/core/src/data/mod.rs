//! Corpus ingestion, tokenization, vocabularies and train/dev/test splits.

mod dataset;
pub mod synthetic;
mod tokenize;
mod vocab;

pub use dataset::{
    build_splits, encode_samples, load_tsv, parse_tsv, ratios_from_counts, write_tsv, Dataset,
    DatasetManifest, LabeledSequence, MANIFEST_SCHEMA_VERSION,
};
pub use tokenize::tokenize;
pub use vocab::{EmbeddingTable, Vocabulary, OOV_ID, OOV_TOKEN};
