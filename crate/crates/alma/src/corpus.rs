//! Corpus layout: `corpus/<name>.a0` with a frozen `corpus/<name>.golden`,
//! plus a line-oriented manifest `corpus/manifest.txt` of
//! `<name> <tier> <oracle>` entries.

use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tier {
    Fast,
    Slow,
}

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub name: String,
    pub tier: Tier,
    pub oracle: String,
}

/// Repo-level corpus directory.
pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn source_path(name: &str) -> PathBuf {
    corpus_dir().join(format!("{}.a0", name))
}

pub fn golden_path(name: &str) -> PathBuf {
    corpus_dir().join(format!("{}.golden", name))
}

pub fn read_manifest() -> Vec<CorpusCase> {
    let path = corpus_dir().join("manifest.txt");
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("cannot read {}: {}", path.display(), e));
    parse_manifest(&text)
}

pub fn parse_manifest(text: &str) -> Vec<CorpusCase> {
    let mut cases = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (name, tier, oracle) = match (fields.next(), fields.next(), fields.next()) {
            (Some(n), Some(t), Some(o)) => (n, t, o),
            _ => panic!("manifest line {} is malformed: {:?}", lineno + 1, line),
        };
        let tier = match tier {
            "fast" => Tier::Fast,
            "slow" => Tier::Slow,
            other => panic!("manifest line {}: unknown tier {:?}", lineno + 1, other),
        };
        cases.push(CorpusCase {
            name: name.to_string(),
            tier,
            oracle: oracle.to_string(),
        });
    }
    cases
}
