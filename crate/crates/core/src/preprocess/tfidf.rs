use serde::{Deserialize, Serialize};

use super::{PreprocessError, Tokenizer, Vocabulary};
use crate::corpus::Corpus;
use crate::hashing::hex_f64;

/// Sparse feature vector. Keys are zero-based feature columns (vocabulary
/// index minus one), kept sorted and free of explicit zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Build from (column, weight) pairs. Zeros are dropped; duplicate
    /// columns are summed.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (c, w) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == c => last.1 += w,
                _ => entries.push((c, w)),
            }
        }
        entries.retain(|e| e.1 != 0.0);
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, col: u32) -> f64 {
        self.entries
            .binary_search_by_key(&col, |e| e.0)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum()
    }

    /// Largest column + 1, or 0 when empty.
    pub fn min_dim(&self) -> usize {
        self.entries.last().map_or(0, |e| e.0 as usize + 1)
    }

    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.entries
            .iter()
            .map(|&(c, w)| w * dense[c as usize])
            .sum()
    }

    pub fn has_non_finite(&self) -> bool {
        self.entries.iter().any(|e| !e.1.is_finite())
    }
}

/// Fitted TF-IDF encoder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    pub tokenizer: Tokenizer,
    pub vocabulary: Vocabulary,
    #[serde(with = "hex_f64")]
    pub idf: Vec<f64>,
    pub document_count: usize,
}

/// Fit smoothed idf weights: `idf = ln((1 + N) / (1 + df)) + 1`.
pub fn fit_tfidf(
    train: &Corpus,
    vocab: &Vocabulary,
    tokenizer: &Tokenizer,
) -> Result<TfIdfModel, PreprocessError> {
    let lists: Vec<Vec<String>> = train
        .documents()
        .iter()
        .map(|d| tokenizer.tokens(&d.text))
        .collect();
    TfIdfModel::fit_tokens(&lists, vocab.clone(), tokenizer.clone())
}

impl TfIdfModel {
    pub fn fit_tokens(
        docs: &[Vec<String>],
        vocabulary: Vocabulary,
        tokenizer: Tokenizer,
    ) -> Result<Self, PreprocessError> {
        if docs.is_empty() {
            return Err(PreprocessError::EmptyCorpus);
        }
        let mut df = vec![0usize; vocabulary.len()];
        let mut seen = vec![usize::MAX; vocabulary.len()];
        for (d, doc) in docs.iter().enumerate() {
            for tok in doc {
                if let Some(ix) = vocabulary.index_of(tok) {
                    let col = ix as usize - 1;
                    if seen[col] != d {
                        seen[col] = d;
                        df[col] += 1;
                    }
                }
            }
        }
        let n = docs.len() as f64;
        let idf = df
            .iter()
            .map(|&df| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
            .collect();
        Ok(TfIdfModel {
            tokenizer,
            vocabulary,
            idf,
            document_count: docs.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.idf.len()
    }

    /// Count × idf per in-vocabulary term, L2-normalized. No truncation.
    pub fn transform_tokens(&self, tokens: &[String]) -> SparseVector {
        let mut cols: Vec<u32> = tokens
            .iter()
            .filter_map(|t| self.vocabulary.index_of(t))
            .map(|ix| ix - 1)
            .collect();
        if cols.is_empty() {
            return SparseVector::default();
        }
        cols.sort_unstable();
        let mut entries: Vec<(u32, f64)> = Vec::new();
        let mut i = 0;
        while i < cols.len() {
            let c = cols[i];
            let mut j = i;
            while j < cols.len() && cols[j] == c {
                j += 1;
            }
            entries.push((c, (j - i) as f64 * self.idf[c as usize]));
            i = j;
        }
        let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut entries {
                e.1 /= norm;
            }
        }
        SparseVector::from_pairs(entries)
    }

    pub fn transform_text(&self, text: &str) -> SparseVector {
        self.transform_tokens(&self.tokenizer.tokens(text))
    }

    pub fn transform_document(&self, doc: &crate::Document) -> SparseVector {
        self.transform_text(&doc.text)
    }

    /// Vocabulary word for a feature column.
    pub fn feature_name(&self, col: u32) -> Option<&str> {
        self.vocabulary.word(col + 1)
    }
}
