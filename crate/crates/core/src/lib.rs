//! Text-classification toolkit for news disinformation detection.
//!
//! The crate covers the whole pipeline: corpus loading and statistics, text
//! cleaning and encoding, TF-IDF linear baselines, skip-gram embeddings, a
//! conv + LSTM + attention classifier trained from scratch, synonym
//! augmentation, cross-corpus evaluation, and LIME / attention explanations
//! rendered as HTML reports.
//!
//! Data-parallel loops (per-document transforms, batch evaluation, LIME
//! perturbations, per-example gradients) run on rayon when the `parallel`
//! feature is enabled and fall back to plain iterators otherwise. Reductions
//! always happen in a fixed order, so results are identical either way.

pub mod augment;
pub mod corpus;
pub mod embed;
pub mod eval;
pub mod explain;
pub mod hashing;
pub mod linear;
pub mod lstm;
pub mod model;
pub mod par;
pub mod preprocess;
pub mod seed;

pub use corpus::{Corpus, Document, Label, Source};

/// Version string embedded into every artifact the toolkit writes.
pub const TOOL_VERSION: &str = concat!("veritext ", env!("CARGO_PKG_VERSION"));

/// Anything that maps raw article text to a probability of the Fake class.
pub trait TextClassifier: Sync {
    fn predict_proba(&self, text: &str) -> f64;
}

impl<F> TextClassifier for F
where
    F: Fn(&str) -> f64 + Sync,
{
    fn predict_proba(&self, text: &str) -> f64 {
        self(text)
    }
}
