#![allow(dead_code)]

use std::path::{Path, PathBuf};

use apigen_cli::PipelineConfig;
use tempfile::TempDir;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

/// Fixture config with the embedding cache moved into `scratch`.
pub fn config(scratch: &Path) -> PipelineConfig {
    let mut c = PipelineConfig::load(&fixture("config.toml")).unwrap();
    c.cache.embeddings = scratch.join("embeddings");
    c
}

/// Writes `config(scratch)` next to it and returns the file path.
pub fn config_file(scratch: &Path) -> PathBuf {
    let path = scratch.join("config.toml");
    std::fs::write(&path, config(scratch).to_toml().unwrap()).unwrap();
    path
}

pub fn scratch() -> TempDir {
    tempfile::tempdir().unwrap()
}
