#![allow(dead_code)]

use std::path::PathBuf;

use tabqa::embed::{load_embeddings, EmbeddingStore, SimMatchConfig};
use tabqa::harness::{load_kind_labels, load_manifest, normalize_corpus, Corpus, ManifestEntry};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn raw_corpus() -> Corpus {
    Corpus::load_dir(&fixture("tables")).unwrap()
}

/// The fixture corpus with key-value tables transposed per the gold kinds.
pub fn corpus() -> Corpus {
    let labels = load_kind_labels(&fixture("table_kinds.tsv")).unwrap();
    normalize_corpus(&raw_corpus(), &labels, None).unwrap()
}

pub fn store() -> EmbeddingStore {
    load_embeddings(&fixture("embeddings.vec")).unwrap()
}

pub fn toy_store() -> EmbeddingStore {
    load_embeddings(&fixture("toy.vec")).unwrap()
}

pub fn manifest(corpus: &Corpus, store: &EmbeddingStore) -> Vec<ManifestEntry> {
    load_manifest(
        &fixture("manifest.jsonl"),
        corpus,
        store,
        &SimMatchConfig::default(),
    )
    .unwrap()
}
