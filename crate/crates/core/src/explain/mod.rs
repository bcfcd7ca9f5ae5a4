//! Per-word explanations: LIME surrogates for any classifier, attention
//! contributions for the LSTM, and static HTML reports.

mod lime;
mod report;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lime::{fit_surrogate, lime_explain, sample_masks, LimeConfig, Surrogate};
pub use report::{render_html, render_report};

use crate::corpus::{Document, Label};
use crate::lstm::LstmClassifier;
use crate::preprocess::{clean_text, tokenize};
use crate::TextClassifier;

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, Error)]
pub enum ExplainError {
    #[error("num_samples must be at least 10, got {0}")]
    TooFewSamples(usize),
    #[error("document {0} has no tokens to explain")]
    NoTokens(String),
    #[error("invalid LIME setting: {0}")]
    InvalidConfig(String),
    #[error("classifier returned {value} for perturbed sample {sample}")]
    NonFinitePrediction { sample: usize, value: f64 },
    #[error("surrogate system is not positive definite")]
    Singular,
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lime,
    Intrinsic,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Lime => "lime",
            Method::Intrinsic => "intrinsic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordWeight {
    pub token: String,
    /// Index into the document's cleaned token stream.
    pub position: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub schema_version: u32,
    pub doc_id: String,
    pub predicted_label: Label,
    pub probability: f64,
    pub method: Method,
    pub top_k: usize,
    pub word_weights: Vec<WordWeight>,
    pub seed: Option<u64>,
    pub model_hash: Option<String>,
    /// Weighted R² of the LIME surrogate on its own samples.
    pub surrogate_score: Option<f64>,
    pub warnings: Vec<String>,
    /// Tool version, config hash, seeds and the like, added by the caller.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<String, String>,
}

impl Explanation {
    /// At most `top_k` weights, largest magnitude first (earlier position on
    /// ties).
    pub fn top(&self) -> Vec<&WordWeight> {
        let mut v: Vec<&WordWeight> = self.word_weights.iter().collect();
        v.sort_by(|a, b| {
            b.weight
                .abs()
                .total_cmp(&a.weight.abs())
                .then(a.position.cmp(&b.position))
        });
        v.truncate(self.top_k);
        v
    }

    pub fn to_json(&self) -> Result<String, ExplainError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, ExplainError> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn save_json(&self, path: &Path) -> Result<(), ExplainError> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// The cleaned token stream that explanation positions refer to.
pub fn document_tokens(text: &str) -> Vec<String> {
    tokenize(&clean_text(text))
}

/// Attention-based explanation of an LSTM prediction. Weights are kept
/// per occurrence.
pub fn intrinsic_explain(clf: &LstmClassifier, doc: &Document, top_k: usize) -> Explanation {
    let tokens = document_tokens(&doc.text);
    let probability = clf.predict_proba(&doc.text);
    let word_weights: Vec<WordWeight> = clf
        .token_contributions(&doc.text)
        .into_iter()
        .map(|(position, weight)| WordWeight {
            token: tokens[position].clone(),
            position,
            weight,
        })
        .collect();
    let mut warnings = Vec::new();
    if word_weights.is_empty() {
        let msg = format!("document {} has no in-vocabulary tokens", doc.id);
        log::warn!("{msg}");
        warnings.push(msg);
    }
    Explanation {
        schema_version: SCHEMA_VERSION,
        doc_id: doc.id.clone(),
        predicted_label: Label::from_fake(probability >= 0.5),
        probability,
        method: Method::Intrinsic,
        top_k,
        word_weights,
        seed: None,
        model_hash: None,
        surrogate_score: None,
        warnings,
        provenance: BTreeMap::new(),
    }
}
