//! Benchmark corpora on disk: `name.pl` with an optional sibling
//! `name.queries` holding one query per line. An optional `manifest.json`
//! lists the entries in order and labels each one.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{parse_program, parse_query, ParseError};
use crate::term::{Program, Query};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: ParseError,
    },
    #[error("{path}:{line}: {source}")]
    Query {
        path: PathBuf,
        line: usize,
        source: ParseError,
    },
    #[error("{path}: {source}")]
    Manifest {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl CorpusError {
    pub fn is_parse_error(&self) -> bool {
        matches!(self, CorpusError::Parse { .. } | CorpusError::Query { .. })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    /// `verbatim` or `reconstructed`.
    #[serde(default)]
    pub origin: Option<String>,
    /// Expected stratification verdict, if recorded.
    #[serde(default)]
    pub b_stratifiable: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub name: String,
    pub program: Program,
    pub queries: Vec<Query>,
    /// Query lines as written, for reports.
    pub query_text: Vec<String>,
    pub meta: ManifestEntry,
}

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Parses a `.queries` file. Blank lines and lines starting with `%` are
/// skipped.
pub fn parse_queries(text: &str, path: &Path) -> Result<(Vec<Query>, Vec<String>), CorpusError> {
    let mut queries = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let q = parse_query(line).map_err(|source| CorpusError::Query {
            path: path.to_owned(),
            line: i + 1,
            source,
        })?;
        queries.push(q);
        lines.push(line.to_string());
    }
    Ok((queries, lines))
}

pub fn load_entry(dir: &Path, meta: ManifestEntry) -> Result<CorpusEntry, CorpusError> {
    let pl = dir.join(format!("{}.pl", meta.name));
    let program = parse_program(&read(&pl)?)
        .map_err(|source| CorpusError::Parse { path: pl, source })?
        .program;
    let qpath = dir.join(format!("{}.queries", meta.name));
    let (queries, query_text) = if qpath.exists() {
        parse_queries(&read(&qpath)?, &qpath)?
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(CorpusEntry {
        name: meta.name.clone(),
        program,
        queries,
        query_text,
        meta,
    })
}

/// Loads every entry of `dir`, in manifest order when a manifest exists and
/// by file name otherwise.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let manifest = dir.join("manifest.json");
    let metas: Vec<ManifestEntry> = if manifest.exists() {
        serde_json::from_str(&read(&manifest)?).map_err(|source| CorpusError::Manifest {
            path: manifest,
            source,
        })?
    } else {
        let rd = fs::read_dir(dir).map_err(|source| CorpusError::Io {
            path: dir.to_owned(),
            source,
        })?;
        let mut names: Vec<String> = rd
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "pl"))
            .filter_map(|p| p.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .collect();
        names.sort();
        names
            .into_iter()
            .map(|name| ManifestEntry {
                name,
                ..Default::default()
            })
            .collect()
    };
    metas.into_iter().map(|m| load_entry(dir, m)).collect()
}

/// The corpus shipped with this crate.
pub fn bundled_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}
