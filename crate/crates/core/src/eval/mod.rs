//! Classification metrics and the cross-corpus experiment runner.
//!
//! Fake is the positive class throughout.

mod experiment;
mod table;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use experiment::{
    prepare_training, resolve_selection, run_experiment, table2_specs, CorpusSelector,
    ExperimentError, ExperimentResult, ExperimentSpec, Peak, Portion, PreparedTraining,
    Provenance, RunContext, RunRecord, Selection, TrainingOptions,
};
pub use table::{run_matrix, MatrixReport};

use crate::corpus::{Corpus, Label};
use crate::par::{self, Execution};
use crate::TextClassifier;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("cannot evaluate on an empty test set")]
    EmptyTest,
    #[error("{predicted} predictions for {truth} labels")]
    LengthMismatch { predicted: usize, truth: usize },
    #[error("classifier returned non-finite probability for document {0}")]
    NonFinite(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn n(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Fake, Label::Fake) => self.tp += 1,
            (Label::Real, Label::Fake) => self.fp += 1,
            (Label::Real, Label::Real) => self.tn += 1,
            (Label::Fake, Label::Real) => self.fn_ += 1,
        }
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Per-class recall; `None` when the class is absent from the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerClass {
    pub fake: Option<f64>,
    pub real: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub accuracy: f64,
    /// Mean of the per-class F1 scores that are defined.
    pub f1: f64,
    /// F1 with Fake as the positive class.
    pub f1_fake: Option<f64>,
    pub per_class_accuracy: PerClass,
    pub confusion: Confusion,
}

impl Metrics {
    /// `None` for an empty confusion matrix.
    pub fn from_confusion(c: Confusion) -> Option<Metrics> {
        let n = c.n();
        if n == 0 {
            return None;
        }
        let f1_fake = ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn_);
        let f1_real = ratio(2 * c.tn, 2 * c.tn + c.fn_ + c.fp);
        let defined: Vec<f64> = [f1_fake, f1_real].into_iter().flatten().collect();
        Some(Metrics {
            n,
            accuracy: (c.tp + c.tn) as f64 / n as f64,
            f1: defined.iter().sum::<f64>() / defined.len() as f64,
            f1_fake,
            per_class_accuracy: PerClass {
                fake: ratio(c.tp, c.tp + c.fn_),
                real: ratio(c.tn, c.tn + c.fp),
            },
            confusion: c,
        })
    }

    pub fn from_predictions(truth: &[Label], predicted: &[Label]) -> Result<Metrics, EvalError> {
        if truth.len() != predicted.len() {
            return Err(EvalError::LengthMismatch {
                predicted: predicted.len(),
                truth: truth.len(),
            });
        }
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            c.record(t, p);
        }
        Metrics::from_confusion(c).ok_or(EvalError::EmptyTest)
    }
}

/// Averages over repeated runs. Per-class values average the runs where
/// they are defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub runs: usize,
    pub accuracy: f64,
    pub f1: f64,
    pub f1_fake: Option<f64>,
    pub per_class_accuracy: PerClass,
}

fn mean_defined(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl MetricSummary {
    pub fn mean(runs: &[Metrics]) -> Option<MetricSummary> {
        if runs.is_empty() {
            return None;
        }
        let k = runs.len() as f64;
        Some(MetricSummary {
            runs: runs.len(),
            accuracy: runs.iter().map(|m| m.accuracy).sum::<f64>() / k,
            f1: runs.iter().map(|m| m.f1).sum::<f64>() / k,
            f1_fake: mean_defined(runs.iter().map(|m| m.f1_fake)),
            per_class_accuracy: PerClass {
                fake: mean_defined(runs.iter().map(|m| m.per_class_accuracy.fake)),
                real: mean_defined(runs.iter().map(|m| m.per_class_accuracy.real)),
            },
        })
    }
}

/// Score `model` on every document of `test`, predicting Fake when the
/// probability reaches `threshold`.
pub fn evaluate<C: TextClassifier + ?Sized>(
    model: &C,
    test: &Corpus,
    threshold: f64,
    exec: Execution,
) -> Result<Metrics, EvalError> {
    if test.is_empty() {
        return Err(EvalError::EmptyTest);
    }
    let probs = par::map(exec, test.documents(), |d| model.predict_proba(&d.text));
    let mut c = Confusion::default();
    for (d, p) in test.documents().iter().zip(&probs) {
        if !p.is_finite() {
            return Err(EvalError::NonFinite(d.id.clone()));
        }
        c.record(d.label, Label::from_fake(*p >= threshold));
    }
    Ok(Metrics::from_confusion(c).expect("test set is non-empty"))
}

/// Per-class value for tables: three decimals or "n/a".
pub fn fmt_ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.3}"))
}
