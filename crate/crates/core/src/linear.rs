//! Logistic-regression and passive-aggressive classifiers over TF-IDF
//! vectors.
//!
//! Labels are encoded Fake = 1 / Real = 0 for the logistic model and
//! Fake = +1 / Real = -1 for passive-aggressive. The passive-aggressive
//! "probability" is a sigmoid of the raw margin and is not calibrated; only
//! its 0.5 decision threshold is meaningful.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Label};
use crate::hashing::{self, hex_f64};
use crate::preprocess::{SparseVector, StopWords, TfIdfModel, Tokenizer, Vocabulary};
use crate::{seed, TextClassifier};

#[derive(Debug, Error)]
pub enum LinearError {
    #[error("training set is empty")]
    Empty,
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("feature vector {0} contains a non-finite value")]
    NonFiniteFeature(usize),
    #[error("feature vector uses column {col} but the model has {dim} weights")]
    DimensionMismatch { col: usize, dim: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidConfig(String),
    #[error("training diverged: non-finite parameters after epoch {0}")]
    Diverged(usize),
    #[error("preprocessing failed: {0}")]
    Preprocess(#[from] crate::preprocess::PreprocessError),
    #[error("invalid model file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearKind {
    Logistic,
    PassiveAggressive,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub seed: u64,
    pub epochs: usize,
    pub hyperparameters: BTreeMap<String, f64>,
    /// Training objective after each epoch.
    #[serde(with = "hex_f64")]
    pub epoch_losses: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub kind: LinearKind,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub meta: TrainingMeta,
}

impl LinearModel {
    pub fn zeros(kind: LinearKind, dim: usize) -> Self {
        LinearModel {
            kind,
            weights: vec![0.0; dim],
            bias: 0.0,
            meta: TrainingMeta::default(),
        }
    }

    pub fn score(&self, x: &SparseVector) -> Result<f64, LinearError> {
        check_dim(x, self.weights.len())?;
        Ok(x.dot(&self.weights) + self.bias)
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn check_dim(x: &SparseVector, dim: usize) -> Result<(), LinearError> {
    if x.min_dim() > dim {
        return Err(LinearError::DimensionMismatch {
            col: x.min_dim() - 1,
            dim,
        });
    }
    Ok(())
}

fn validate(x: &[SparseVector], y: &[Label], dim: usize) -> Result<(), LinearError> {
    if x.len() != y.len() {
        return Err(LinearError::LengthMismatch {
            features: x.len(),
            labels: y.len(),
        });
    }
    if x.is_empty() {
        return Err(LinearError::Empty);
    }
    for (i, v) in x.iter().enumerate() {
        if v.has_non_finite() {
            return Err(LinearError::NonFiniteFeature(i));
        }
        check_dim(v, dim)?;
    }
    Ok(())
}

/// Probability of Fake: sigmoid of the model score.
pub fn predict_proba(model: &LinearModel, x: &SparseVector) -> Result<f64, LinearError> {
    Ok(sigmoid(model.score(x)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogisticConfig {
    pub epochs: usize,
    /// Initial step size; epoch `t` (from 1) uses `lr / sqrt(t)`.
    pub lr: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        LogisticConfig {
            epochs: 20,
            lr: 0.05,
            l2: 1e-4,
            seed: 0,
        }
    }
}

/// Mean binary cross-entropy plus `l2 / 2 * |w|^2`.
pub fn logistic_objective(
    weights: &[f64],
    bias: f64,
    x: &[SparseVector],
    y: &[Label],
    l2: f64,
) -> f64 {
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let z = xi.dot(weights) + bias;
            softplus(z) - yi.target() * z
        })
        .sum::<f64>()
        / x.len() as f64;
    data + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`logistic_objective`] with respect to (weights, bias).
pub fn logistic_gradient(
    weights: &[f64],
    bias: f64,
    x: &[SparseVector],
    y: &[Label],
    l2: f64,
) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    let mut gb = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let g = (sigmoid(xi.dot(weights) + bias) - yi.target()) / n;
        for &(c, v) in xi.entries() {
            gw[c as usize] += g * v;
        }
        gb += g;
    }
    (gw, gb)
}

/// L2-regularized logistic regression by SGD over a seeded per-epoch shuffle.
///
/// Weights are stored as `scale * v` so the L2 shrink costs O(1) per example.
pub fn train_logistic(
    x: &[SparseVector],
    y: &[Label],
    dim: usize,
    cfg: &LogisticConfig,
) -> Result<LinearModel, LinearError> {
    validate(x, y, dim)?;
    if !(cfg.lr.is_finite() && cfg.lr >= 0.0 && cfg.l2.is_finite() && cfg.l2 >= 0.0) {
        return Err(LinearError::InvalidConfig(format!(
            "lr={} l2={}",
            cfg.lr, cfg.l2
        )));
    }
    if cfg.lr * cfg.l2 >= 1.0 {
        return Err(LinearError::InvalidConfig("lr * l2 must be below 1".into()));
    }
    let mut v = vec![0.0; dim];
    let mut scale = 1.0f64;
    let mut bias = 0.0;
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = seed::rng(cfg.seed, &[seed::STREAM_SHUFFLE]);
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let eta = cfg.lr / ((epoch + 1) as f64).sqrt();
        for &i in &order {
            let xi = &x[i];
            let z = scale * xi.dot(&v) + bias;
            let g = sigmoid(z) - y[i].target();
            scale *= 1.0 - eta * cfg.l2;
            let step = eta * g / scale;
            for &(c, val) in xi.entries() {
                v[c as usize] -= step * val;
            }
            bias -= eta * g;
            if scale < 1e-9 {
                v.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
        let w: Vec<f64> = v.iter().map(|w| w * scale).collect();
        let loss = logistic_objective(&w, bias, x, y, cfg.l2);
        if !loss.is_finite() || !bias.is_finite() {
            return Err(LinearError::Diverged(epoch + 1));
        }
        losses.push(loss);
    }
    let weights = v.iter().map(|w| w * scale).collect();
    Ok(LinearModel {
        kind: LinearKind::Logistic,
        weights,
        bias,
        meta: TrainingMeta {
            seed: cfg.seed,
            epochs: cfg.epochs,
            hyperparameters: BTreeMap::from([("lr".into(), cfg.lr), ("l2".into(), cfg.l2)]),
            epoch_losses: losses,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PassiveAggressiveConfig {
    /// Aggressiveness cap on the step size.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for PassiveAggressiveConfig {
    fn default() -> Self {
        PassiveAggressiveConfig {
            c: 1.0,
            epochs: 5,
            seed: 0,
        }
    }
}

/// One PA-I update. Returns false when the example was skipped because it
/// is the zero vector with positive hinge loss.
pub fn passive_aggressive_step(weights: &mut [f64], x: &SparseVector, label: Label, c: f64) -> bool {
    let y = if label.is_fake() { 1.0 } else { -1.0 };
    let loss = (1.0 - y * x.dot(weights)).max(0.0);
    if loss == 0.0 {
        return true;
    }
    let nsq = x.norm_sq();
    if nsq == 0.0 {
        return false;
    }
    let tau = c.min(loss / nsq);
    for &(col, v) in x.entries() {
        weights[col as usize] += tau * y * v;
    }
    true
}

/// PA-I online learner (no intercept) over a seeded per-epoch shuffle.
pub fn train_passive_aggressive(
    x: &[SparseVector],
    y: &[Label],
    dim: usize,
    cfg: &PassiveAggressiveConfig,
) -> Result<LinearModel, LinearError> {
    validate(x, y, dim)?;
    if !(cfg.c.is_finite() && cfg.c >= 0.0) {
        return Err(LinearError::InvalidConfig(format!("C={}", cfg.c)));
    }
    let mut w = vec![0.0; dim];
    let mut order: Vec<usize> = (0..x.len()).collect();
    let mut rng = seed::rng(cfg.seed, &[seed::STREAM_SHUFFLE]);
    let mut losses = Vec::with_capacity(cfg.epochs);
    let mut skipped = 0usize;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            if !passive_aggressive_step(&mut w, &x[i], y[i], cfg.c) {
                skipped += 1;
            }
        }
        let hinge = x
            .iter()
            .zip(y)
            .map(|(xi, yi)| {
                let s = if yi.is_fake() { 1.0 } else { -1.0 };
                (1.0 - s * xi.dot(&w)).max(0.0)
            })
            .sum::<f64>()
            / x.len() as f64;
        if !hinge.is_finite() {
            return Err(LinearError::Diverged(epoch + 1));
        }
        losses.push(hinge);
    }
    if skipped > 0 {
        log::warn!("passive-aggressive: skipped {skipped} zero-vector update(s) with nonzero hinge loss");
    }
    Ok(LinearModel {
        kind: LinearKind::PassiveAggressive,
        weights: w,
        bias: 0.0,
        meta: TrainingMeta {
            seed: cfg.seed,
            epochs: cfg.epochs,
            hyperparameters: BTreeMap::from([("c".into(), cfg.c)]),
            epoch_losses: losses,
        },
    })
}

/// Tokenizer and vocabulary options for the TF-IDF front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TfIdfConfig {
    pub remove_stopwords: bool,
    pub min_count: usize,
    pub max_vocab: Option<usize>,
}

impl Default for TfIdfConfig {
    fn default() -> Self {
        TfIdfConfig {
            remove_stopwords: true,
            min_count: 1,
            max_vocab: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearTrainer {
    Logistic(LogisticConfig),
    PassiveAggressive(PassiveAggressiveConfig),
}

/// A TF-IDF encoder paired with a linear model; classifies raw text.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    pub tfidf: TfIdfModel,
    pub model: LinearModel,
    /// Free-form provenance (config hash, corpus hashes, ...), stored in the
    /// model file.
    pub provenance: BTreeMap<String, String>,
}

impl LinearClassifier {
    /// Fit the TF-IDF encoder and the model on a training corpus.
    pub fn fit(
        train: &Corpus,
        tfidf_cfg: &TfIdfConfig,
        stopwords: &StopWords,
        trainer: &LinearTrainer,
    ) -> Result<Self, LinearError> {
        let tokenizer = if tfidf_cfg.remove_stopwords {
            Tokenizer::with_stopwords(stopwords.clone())
        } else {
            Tokenizer::plain()
        };
        let lists: Vec<Vec<String>> = crate::par::map(
            crate::par::Execution::default(),
            train.documents(),
            |d| tokenizer.tokens(&d.text),
        );
        if lists.is_empty() {
            return Err(LinearError::Empty);
        }
        let vocab = Vocabulary::from_token_lists(
            lists.iter().map(Vec::as_slice),
            tfidf_cfg.max_vocab,
            tfidf_cfg.min_count,
        )?;
        let tfidf = TfIdfModel::fit_tokens(&lists, vocab, tokenizer)?;
        let x: Vec<SparseVector> = crate::par::map(crate::par::Execution::default(), &lists, |t| {
            tfidf.transform_tokens(t)
        });
        let y: Vec<Label> = train.documents().iter().map(|d| d.label).collect();
        let model = match trainer {
            LinearTrainer::Logistic(cfg) => train_logistic(&x, &y, tfidf.dim(), cfg)?,
            LinearTrainer::PassiveAggressive(cfg) => {
                train_passive_aggressive(&x, &y, tfidf.dim(), cfg)?
            }
        };
        Ok(LinearClassifier {
            tfidf,
            model,
            provenance: BTreeMap::new(),
        })
    }

    /// Model coefficient for a vocabulary word, if present.
    pub fn coefficient(&self, word: &str) -> Option<f64> {
        self.tfidf
            .vocabulary
            .index_of(word)
            .map(|ix| self.model.weights[ix as usize - 1])
    }

    pub fn to_json(&self) -> Result<String, LinearError> {
        let file = ModelFile {
            format: FORMAT.into(),
            version: FILE_VERSION,
            tool_version: crate::TOOL_VERSION.into(),
            kind: self.model.kind,
            vocab_size: self.tfidf.dim(),
            vocab_hash: self.tfidf.vocabulary.content_hash_hex(),
            seed: self.model.meta.seed,
            training: self.model.meta.clone(),
            provenance: self.provenance.clone(),
            tfidf: self.tfidf.clone(),
            bias: hex_f64::encode(&[self.model.bias]),
            weights: hex_f64::encode(&self.model.weights),
        };
        serde_json::to_string_pretty(&file).map_err(|e| LinearError::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self, LinearError> {
        let file: ModelFile =
            serde_json::from_str(s).map_err(|e| LinearError::Format(e.to_string()))?;
        if file.format != FORMAT || file.version != FILE_VERSION {
            return Err(LinearError::Format(format!(
                "unsupported format {} v{}",
                file.format, file.version
            )));
        }
        let weights = hex_f64::decode(&file.weights).map_err(LinearError::Format)?;
        let bias = hex_f64::decode(&file.bias).map_err(LinearError::Format)?;
        if weights.len() != file.vocab_size || file.tfidf.dim() != file.vocab_size || bias.len() != 1 {
            return Err(LinearError::Format("weight/vocabulary size mismatch".into()));
        }
        if file.tfidf.vocabulary.content_hash_hex() != file.vocab_hash {
            return Err(LinearError::Format("vocabulary hash mismatch".into()));
        }
        if weights.iter().chain(&bias).any(|w| !w.is_finite()) {
            return Err(LinearError::Format("non-finite parameter".into()));
        }
        Ok(LinearClassifier {
            tfidf: file.tfidf,
            model: LinearModel {
                kind: file.kind,
                weights,
                bias: bias[0],
                meta: file.training,
            },
            provenance: file.provenance,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), LinearError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LinearError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// SHA-256 of the serialized model.
    pub fn content_hash(&self) -> String {
        hashing::sha256_hex(self.to_json().unwrap_or_default().as_bytes())
    }
}

impl TextClassifier for LinearClassifier {
    fn predict_proba(&self, text: &str) -> f64 {
        let x = self.tfidf.transform_text(text);
        predict_proba(&self.model, &x).expect("encoder and model share a vocabulary")
    }
}

const FORMAT: &str = "veritext-linear";
const FILE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    version: u32,
    tool_version: String,
    kind: LinearKind,
    vocab_size: usize,
    vocab_hash: String,
    seed: u64,
    training: TrainingMeta,
    provenance: BTreeMap<String, String>,
    tfidf: TfIdfModel,
    bias: String,
    weights: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;

    fn sv(pairs: &[(u32, f64)]) -> SparseVector {
        SparseVector::from_pairs(pairs.to_vec())
    }

    fn toy() -> (Vec<SparseVector>, Vec<Label>) {
        // separable by the sign of feature 0 minus feature 1
        let x = vec![
            sv(&[(0, 1.0), (2, 0.3)]),
            sv(&[(0, 0.8), (1, 0.1)]),
            sv(&[(1, 1.0), (2, 0.2)]),
            sv(&[(1, 0.9), (0, 0.1)]),
        ];
        let y = vec![Label::Fake, Label::Fake, Label::Real, Label::Real];
        (x, y)
    }

    #[test]
    fn zero_epochs_is_zero_model() {
        let (x, y) = toy();
        let m = train_logistic(&x, &y, 3, &LogisticConfig { epochs: 0, ..Default::default() }).unwrap();
        assert!(m.weights.iter().all(|&w| w == 0.0));
        assert_eq!(m.bias, 0.0);
        for xi in &x {
            assert_eq!(predict_proba(&m, xi).unwrap(), 0.5);
        }
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let (x, y) = toy();
        let cfg = LogisticConfig { epochs: 100, lr: 0.5, l2: 0.0, seed: 3 };
        let m = train_logistic(&x, &y, 3, &cfg).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(predict_proba(&m, xi).unwrap() >= 0.5, yi.is_fake());
        }
    }

    #[test]
    fn loss_non_increasing_at_small_lr() {
        let (x, y) = toy();
        let cfg = LogisticConfig { epochs: 50, lr: 0.01, l2: 1e-4, seed: 1 };
        let m = train_logistic(&x, &y, 3, &cfg).unwrap();
        let l = &m.meta.epoch_losses;
        assert_eq!(l.len(), 50);
        assert!(l.windows(2).all(|w| w[1] <= w[0]), "{l:?}");
        assert!(l[0] < 2f64.ln());
    }

    #[test]
    fn deterministic_given_seed() {
        let (x, y) = toy();
        let cfg = LogisticConfig { epochs: 7, ..Default::default() };
        let a = train_logistic(&x, &y, 3, &cfg).unwrap();
        let b = train_logistic(&x, &y, 3, &cfg).unwrap();
        let bits = |m: &LinearModel| m.weights.iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.bias.to_bits(), b.bias.to_bits());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = toy();
        let w = vec![0.3, -0.7, 0.2];
        let b = 0.1;
        let l2 = 0.05;
        let (gw, gb) = logistic_gradient(&w, b, &x, &y, l2);
        let h = 1e-6;
        for i in 0..3 {
            let mut p = w.clone();
            let mut m = w.clone();
            p[i] += h;
            m[i] -= h;
            let num = (logistic_objective(&p, b, &x, &y, l2) - logistic_objective(&m, b, &x, &y, l2)) / (2.0 * h);
            assert!((num - gw[i]).abs() / gw[i].abs().max(1e-8) < 1e-6, "{i}: {num} vs {}", gw[i]);
        }
        let num = (logistic_objective(&w, b + h, &x, &y, l2) - logistic_objective(&w, b - h, &x, &y, l2)) / (2.0 * h);
        assert!((num - gb).abs() / gb.abs() < 1e-6);
    }

    #[test]
    fn input_errors() {
        let (x, y) = toy();
        assert!(matches!(train_logistic(&[], &[], 3, &Default::default()), Err(LinearError::Empty)));
        assert!(matches!(
            train_logistic(&x, &y[..2], 3, &Default::default()),
            Err(LinearError::LengthMismatch { .. })
        ));
        let bad = vec![sv(&[(0, f64::NAN)])];
        assert!(matches!(
            train_logistic(&bad, &[Label::Fake], 3, &Default::default()),
            Err(LinearError::NonFiniteFeature(0))
        ));
        let m = LinearModel::zeros(LinearKind::Logistic, 2);
        assert!(matches!(predict_proba(&m, &sv(&[(5, 1.0)])), Err(LinearError::DimensionMismatch { .. })));
    }

    #[test]
    fn sigmoid_properties() {
        let mut m = LinearModel::zeros(LinearKind::Logistic, 2);
        let x = sv(&[(0, 1.0), (1, 2.0)]);
        assert_eq!(predict_proba(&m, &x).unwrap(), 0.5);
        m.weights = vec![400.0, 300.0];
        assert!(predict_proba(&m, &x).unwrap() > 1.0 - 1e-12);
        m.weights = vec![0.4, -0.1];
        m.bias = 0.3;
        let p = predict_proba(&m, &x).unwrap();
        let neg = LinearModel { weights: vec![-0.4, 0.1], bias: -0.3, ..m.clone() };
        assert!((predict_proba(&neg, &x).unwrap() - (1.0 - p)).abs() < 1e-15);
    }

    #[test]
    fn pa_passive_when_margin_met() {
        let mut w = vec![2.0, 0.0];
        let x = sv(&[(0, 1.0)]);
        passive_aggressive_step(&mut w, &x, Label::Fake, 1.0);
        assert_eq!(w, vec![2.0, 0.0]);
    }

    #[test]
    fn pa_single_step_closed_form() {
        for c in [0.1, 0.5, 1.0, 10.0] {
            let x = sv(&[(0, 0.6), (1, 0.8), (2, 1.5)]);
            let mut w = vec![0.0; 3];
            passive_aggressive_step(&mut w, &x, Label::Real, c);
            let nsq = x.norm_sq();
            let tau = c.min(1.0 / nsq);
            let margin = -x.dot(&w);
            assert!((margin - (tau * nsq)).abs() < 1e-12);
            assert!(margin >= (1.0f64).min(c * nsq) - 1e-12);
        }
    }

    #[test]
    fn pa_zero_c_never_updates_and_zero_vector_skipped() {
        let (x, y) = toy();
        let m = train_passive_aggressive(&x, &y, 3, &PassiveAggressiveConfig { c: 0.0, ..Default::default() }).unwrap();
        assert!(m.weights.iter().all(|&w| w == 0.0));
        let mut w = vec![0.0];
        assert!(!passive_aggressive_step(&mut w, &SparseVector::default(), Label::Fake, 1.0));
    }

    #[test]
    fn pa_decision_invariant_to_positive_scaling() {
        let (x, y) = toy();
        let m = train_passive_aggressive(&x, &y, 3, &Default::default()).unwrap();
        let scaled = LinearModel { weights: m.weights.iter().map(|w| w * 3.7).collect(), ..m.clone() };
        for xi in &x {
            assert_eq!(
                predict_proba(&m, xi).unwrap() >= 0.5,
                predict_proba(&scaled, xi).unwrap() >= 0.5
            );
        }
    }

    #[test]
    fn classifier_file_round_trip() {
        let docs = vec![
            Document::new("1", "the lizard people control the moon", Label::Fake),
            Document::new("2", "minister announces budget for schools", Label::Real),
            Document::new("3", "moon lizard shock secret", Label::Fake),
            Document::new("4", "parliament debates the budget", Label::Real),
        ];
        let c = Corpus::new("t", docs).unwrap();
        let clf = LinearClassifier::fit(
            &c,
            &TfIdfConfig::default(),
            &StopWords::english(),
            &LinearTrainer::Logistic(LogisticConfig { epochs: 30, lr: 0.5, ..Default::default() }),
        )
        .unwrap();
        assert!(clf.predict_proba("lizard moon") > 0.5);
        assert!(clf.predict_proba("budget parliament") < 0.5);
        let json = clf.to_json().unwrap();
        let back = LinearClassifier::from_json(&json).unwrap();
        assert_eq!(back, clf);
        assert_eq!(back.to_json().unwrap(), json);
        let broken = json.replace("\"version\": 1", "\"version\": 9");
        assert!(LinearClassifier::from_json(&broken).is_err());
    }
}
