//! Model selection and a common wrapper over trained classifiers.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Corpus;
use crate::linear::{
    LinearClassifier, LinearError, LinearTrainer, LogisticConfig, PassiveAggressiveConfig,
    TfIdfConfig,
};
use crate::lstm::{LstmClassifier, LstmConfig, LstmError, TrainHistory};
use crate::par::Execution;
use crate::preprocess::StopWords;
use crate::TextClassifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Logistic,
    PassiveAggressive,
    Lstm,
}

impl ModelKind {
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Logistic => "Logistic Regression",
            ModelKind::PassiveAggressive => "Passive Aggressive",
            ModelKind::Lstm => "LSTM",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "logistic" | "lr" => Ok(ModelKind::Logistic),
            "passive-aggressive" | "pa" => Ok(ModelKind::PassiveAggressive),
            "lstm" => Ok(ModelKind::Lstm),
            other => Err(format!("unknown model kind {other:?}")),
        }
    }
}

/// Model family plus the hyperparameters of every family; only the block
/// matching `kind` is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default)]
    pub tfidf: TfIdfConfig,
    #[serde(default)]
    pub logistic: LogisticConfig,
    #[serde(default)]
    pub passive_aggressive: PassiveAggressiveConfig,
    #[serde(default)]
    pub lstm: LstmConfig,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            tfidf: TfIdfConfig::default(),
            logistic: LogisticConfig::default(),
            passive_aggressive: PassiveAggressiveConfig::default(),
            lstm: LstmConfig::default(),
        }
    }

    /// Copy of the spec with every seed set to `seed`.
    pub fn seeded(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.logistic.seed = seed;
        s.passive_aggressive.seed = seed;
        s.lstm.training.seed = seed;
        s.lstm.word2vec.seed = seed;
        s
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Linear(#[from] LinearError),
    #[error(transparent)]
    Lstm(#[from] LstmError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Linear(LinearClassifier),
    Lstm(LstmClassifier),
}

impl TrainedModel {
    /// Fit `spec` on `train`. Only the LSTM uses `valid`.
    pub fn fit(
        spec: &ModelSpec,
        train: &Corpus,
        valid: &Corpus,
        stopwords: &StopWords,
        exec: Execution,
    ) -> Result<Self, ModelError> {
        Ok(match spec.kind {
            ModelKind::Logistic => TrainedModel::Linear(LinearClassifier::fit(
                train,
                &spec.tfidf,
                stopwords,
                &LinearTrainer::Logistic(spec.logistic),
            )?),
            ModelKind::PassiveAggressive => TrainedModel::Linear(LinearClassifier::fit(
                train,
                &spec.tfidf,
                stopwords,
                &LinearTrainer::PassiveAggressive(spec.passive_aggressive),
            )?),
            ModelKind::Lstm => {
                let mut cfg = spec.lstm.clone();
                cfg.training.execution = exec;
                TrainedModel::Lstm(LstmClassifier::fit(train, valid, &cfg)?)
            }
        })
    }

    pub fn history(&self) -> Option<&TrainHistory> {
        match self {
            TrainedModel::Linear(_) => None,
            TrainedModel::Lstm(m) => m.history.as_ref(),
        }
    }

    pub fn provenance_mut(&mut self) -> &mut std::collections::BTreeMap<String, String> {
        match self {
            TrainedModel::Linear(m) => &mut m.provenance,
            TrainedModel::Lstm(m) => &mut m.provenance,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            TrainedModel::Linear(m) => match m.model.kind {
                crate::linear::LinearKind::Logistic => "logistic",
                crate::linear::LinearKind::PassiveAggressive => "passive-aggressive",
            },
            TrainedModel::Lstm(_) => "lstm",
        }
    }

    pub fn content_hash(&self) -> String {
        match self {
            TrainedModel::Linear(m) => m.content_hash(),
            TrainedModel::Lstm(m) => m.content_hash(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        match self {
            TrainedModel::Linear(m) => m.save(path)?,
            TrainedModel::Lstm(m) => m.save(path)?,
        }
        Ok(())
    }

    /// Load either model file format, telling them apart by their first
    /// bytes.
    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let bytes = std::fs::read(path)?;
        if bytes.starts_with(b"VTXLSTM\0") {
            Ok(TrainedModel::Lstm(LstmClassifier::read_from(&bytes[..])?))
        } else {
            let text = String::from_utf8(bytes)
                .map_err(|_| LinearError::Format("model file is neither LSTM nor JSON".into()))?;
            Ok(TrainedModel::Linear(LinearClassifier::from_json(&text)?))
        }
    }
}

impl TextClassifier for TrainedModel {
    fn predict_proba(&self, text: &str) -> f64 {
        match self {
            TrainedModel::Linear(m) => m.predict_proba(text),
            TrainedModel::Lstm(m) => m.predict_proba(text),
        }
    }
}
