//! Cleaning, tokenization, vocabularies and document encodings.

mod sequence;
mod stopwords;
mod text;
mod tfidf;
mod vocab;

pub use sequence::{encode_sequence, encode_with_positions, TokenSequence, DEFAULT_MAX_LEN};
pub use stopwords::{remove_stopwords, StopWords};
pub use text::{clean_text, tokenize, Tokenizer};
pub use tfidf::{fit_tfidf, SparseVector, TfIdfModel};
pub use vocab::{build_vocabulary, Vocabulary};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cannot build from an empty corpus")]
    EmptyCorpus,
    #[error("min_count must be at least 1")]
    InvalidMinCount,
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
