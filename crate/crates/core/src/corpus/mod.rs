//! Labelled news corpora: loading, validation, statistics, splitting and
//! rebalancing.

mod io;
mod sampling;
mod stats;

pub use io::{load_corpus, save_jsonl, write_jsonl, CorpusFormat, LoadOptions};
pub use sampling::{rebalance, split};
pub use stats::{summarize, summarize_by_class, top_words, ClassStats, CorpusStats};

use std::collections::HashSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hashing;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: no such file or directory")]
    Missing { path: PathBuf },
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: record {id:?} has unknown label {label:?}")]
    UnknownLabel {
        line: usize,
        id: String,
        label: String,
    },
    #[error("duplicate document id {id:?}")]
    DuplicateId { id: String },
    #[error("line {line}: record {id:?} has empty text (set allow_empty to keep it)")]
    EmptyText { line: usize, id: String },
    #[error("test fraction must be strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("stratified split needs at least 2 {label} documents, found {count}")]
    TooFewInClass { label: Label, count: usize },
    #[error("ratio {ratio} needs {needed} {label} documents but only {available} are available")]
    InsufficientDocuments {
        ratio: f64,
        label: Label,
        needed: usize,
        available: usize,
    },
    #[error("invalid ratio {0}")]
    InvalidRatio(f64),
}

/// The two classes. Fake is the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fake,
    Real,
}

impl Label {
    /// Case-insensitive: "fake"/"1" are Fake, "real"/"true"/"0" are Real.
    pub fn parse(s: &str) -> Option<Label> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" | "1" => Some(Label::Fake),
            "real" | "true" | "0" => Some(Label::Real),
            _ => None,
        }
    }

    pub fn is_fake(self) -> bool {
        self == Label::Fake
    }

    /// 1.0 for Fake, 0.0 for Real.
    pub fn target(self) -> f64 {
        if self.is_fake() {
            1.0
        } else {
            0.0
        }
    }

    pub fn from_fake(is_fake: bool) -> Label {
        if is_fake {
            Label::Fake
        } else {
            Label::Real
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Fake => "fake",
            Label::Real => "real",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Source {
    SA1,
    US1,
    US2,
    #[default]
    Other,
}

impl FromStr for Source {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_uppercase().replace(' ', "").as_str() {
            "SA1" => Source::SA1,
            "US1" => Source::US1,
            "US2" => Source::US2,
            _ => Source::Other,
        })
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::SA1 => "SA1",
            Source::US1 => "US1",
            Source::US2 => "US2",
            Source::Other => "Other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Label,
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_url: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Label) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            label,
            source: Source::Other,
            title: None,
            origin_url: None,
        }
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    /// Empty articles are kept but flagged; they encode as all padding.
    pub fn is_empty(&self) -> bool {
        self.text.trim().is_empty()
    }
}

/// Which side of a split a corpus came from. Augmentation refuses test splits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SplitRole {
    #[default]
    Full,
    Train,
    Test,
}

/// An immutable, ordered collection of uniquely identified documents.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    name: String,
    documents: Vec<Document>,
    role: SplitRole,
    fake_count: usize,
    real_count: usize,
}

impl Corpus {
    pub fn new(name: impl Into<String>, documents: Vec<Document>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(documents.len());
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(CorpusError::DuplicateId { id: d.id.clone() });
            }
        }
        let fake_count = documents.iter().filter(|d| d.label.is_fake()).count();
        Ok(Corpus {
            name: name.into(),
            real_count: documents.len() - fake_count,
            documents,
            fake_count,
            role: SplitRole::Full,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Corpus::new(name, Vec::new()).expect("empty corpus is valid")
    }

    /// Concatenate corpora; ids must stay unique.
    pub fn concat(name: impl Into<String>, parts: &[&Corpus]) -> Result<Self, CorpusError> {
        let docs = parts
            .iter()
            .flat_map(|c| c.documents.iter().cloned())
            .collect();
        let mut out = Corpus::new(name, docs)?;
        if let Some(first) = parts.first() {
            if parts.iter().all(|p| p.role == first.role) {
                out.role = first.role;
            }
        }
        Ok(out)
    }

    pub fn with_role(mut self, role: SplitRole) -> Self {
        self.role = role;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn into_documents(self) -> Vec<Document> {
        self.documents
    }

    pub fn role(&self) -> SplitRole {
        self.role
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        match label {
            Label::Fake => self.fake_count,
            Label::Real => self.real_count,
        }
    }

    /// Documents of one class, in corpus order.
    pub fn subset(&self, label: Label) -> Corpus {
        let docs = self
            .documents
            .iter()
            .filter(|d| d.label == label)
            .cloned()
            .collect();
        let mut c = Corpus::new(format!("{}/{}", self.name, label), docs)
            .expect("subset of unique ids is unique");
        c.role = self.role;
        c
    }

    /// SHA-256 of the canonical JSONL serialization.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        write_jsonl(self, &mut buf).expect("writing to memory cannot fail");
        hashing::sha256_hex(&buf)
    }

    pub(crate) fn from_parts(
        name: String,
        documents: Vec<Document>,
        role: SplitRole,
    ) -> Corpus {
        let mut c = Corpus::new(name, documents).expect("parts of a valid corpus are valid");
        c.role = role;
        c
    }
}
