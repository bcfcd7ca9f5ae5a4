use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{evaluate, EvalError, MetricSummary, Metrics};
use crate::augment::{augment_corpus_with, AugmentConfig, AugmentError, SynonymLexicon};
use crate::corpus::{rebalance, split, Corpus, CorpusError, Document, SplitRole};
use crate::lstm::TrainHistory;
use crate::model::{ModelError, ModelKind, ModelSpec, TrainedModel};
use crate::par::Execution;
use crate::preprocess::StopWords;
use crate::{hashing, seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Portion {
    /// The training part of the fixed stratified split.
    Subset1,
    /// The held-out part of the same split.
    Subset2,
    Full,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSelector {
    pub corpus: String,
    pub portion: Portion,
}

impl fmt::Display for CorpusSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.portion {
            Portion::Full => write!(f, "{}", self.corpus),
            p => write!(f, "{} {:?}", self.corpus, p),
        }
    }
}

/// Union of corpus portions, written `"SA1 Subset1 + US1 Subset1"`. A bare
/// corpus name means the whole corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Selection(pub Vec<CorpusSelector>);

impl Selection {
    pub fn parse(s: &str) -> Result<Selection, String> {
        let mut out = Vec::new();
        for part in s.split('+') {
            let words: Vec<&str> = part.split_whitespace().collect();
            let (corpus, portion) = match words.as_slice() {
                [c] => (*c, Portion::Full),
                [c, p] => {
                    let portion = match p.to_ascii_lowercase().as_str() {
                        "subset1" => Portion::Subset1,
                        "subset2" => Portion::Subset2,
                        "full" => Portion::Full,
                        other => return Err(format!("unknown portion {other:?} in {s:?}")),
                    };
                    (*c, portion)
                }
                _ => return Err(format!("cannot parse corpus selector {part:?}")),
            };
            if out.iter().any(|x: &CorpusSelector| x.corpus == corpus) {
                return Err(format!("corpus {corpus} selected twice in {s:?}"));
            }
            out.push(CorpusSelector {
                corpus: corpus.to_string(),
                portion,
            });
        }
        Ok(Selection(out))
    }

    fn overlaps(&self, other: &Selection) -> Option<String> {
        for a in &self.0 {
            for b in &other.0 {
                let disjoint = matches!(
                    (a.portion, b.portion),
                    (Portion::Subset1, Portion::Subset2) | (Portion::Subset2, Portion::Subset1)
                );
                if a.corpus == b.corpus && !disjoint {
                    return Some(format!("{a} overlaps {b}"));
                }
            }
        }
        None
    }

    pub fn corpora(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|s| s.corpus.as_str())
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl TryFrom<String> for Selection {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Selection::parse(&s)
    }
}

impl From<Selection> for String {
    fn from(s: Selection) -> String {
        s.to_string()
    }
}

/// Steps applied to a training corpus before fitting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingOptions {
    /// Synonym augmentation of the training part; `None` disables it.
    pub augment: Option<AugmentConfig>,
    /// Real documents kept per fake document; `None` keeps the corpus as is.
    pub imbalance: Option<f64>,
    /// Share of the training corpus held out for LSTM model selection.
    pub validation_fraction: f64,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        TrainingOptions {
            augment: None,
            imbalance: None,
            validation_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub model: ModelSpec,
    pub train: Selection,
    pub test: Selection,
    #[serde(default)]
    pub options: TrainingOptions,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Fixes the Subset1/Subset2 split; run `r` trains with seed
    /// `seed_base + r`.
    #[serde(default)]
    pub seed_base: u64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_repetitions() -> usize {
    5
}

fn default_test_fraction() -> f64 {
    0.2
}

fn default_threshold() -> f64 {
    0.5
}

impl ExperimentSpec {
    pub fn new(name: impl Into<String>, model: ModelSpec, train: &str, test: &str) -> Self {
        ExperimentSpec {
            name: name.into(),
            model,
            train: Selection::parse(train).expect("valid selector"),
            test: Selection::parse(test).expect("valid selector"),
            options: TrainingOptions::default(),
            repetitions: default_repetitions(),
            seed_base: 0,
            test_fraction: default_test_fraction(),
            threshold: default_threshold(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        if self.train.0.is_empty() || self.test.0.is_empty() {
            return bad("train and test selections must be non-empty".into());
        }
        if let Some(m) = self.train.overlaps(&self.test) {
            return bad(format!("train and test are not disjoint: {m}"));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction {} outside (0, 1)", self.test_fraction));
        }
        let v = self.options.validation_fraction;
        if !(v > 0.0 && v < 1.0) {
            return bad(format!("validation_fraction {v} outside (0, 1)"));
        }
        if matches!(self.options.imbalance, Some(r) if !(r > 0.0 && r.is_finite())) {
            return bad("imbalance must be a positive ratio".into());
        }
        Ok(())
    }

    /// SHA-256 of the spec's JSON form.
    pub fn config_hash(&self) -> String {
        hashing::sha256_hex(&serde_json::to_vec(self).expect("spec serializes"))
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("unknown corpus {0:?}")]
    UnknownCorpus(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Augment(#[from] AugmentError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Shared inputs for running experiments.
#[derive(Debug, Clone, Copy)]
pub struct RunContext<'a> {
    pub corpora: &'a BTreeMap<String, Corpus>,
    pub stopwords: &'a StopWords,
    pub lexicon: &'a SynonymLexicon,
    pub execution: Execution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
    pub corpus_hashes: BTreeMap<String, String>,
    pub split_seed: u64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub metrics: Metrics,
    pub train_size: usize,
    pub valid_size: usize,
    pub test_size: usize,
    pub model_hash: String,
    pub history: Option<TrainHistory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub run: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub runs: Vec<RunRecord>,
    pub mean: Option<MetricSummary>,
    pub peak: Option<Peak>,
    pub provenance: Provenance,
    /// Set when the experiment stopped early; `runs` holds what finished.
    pub error: Option<String>,
}

fn portion_of(
    corpus: &Corpus,
    portion: Portion,
    test_fraction: f64,
    split_seed: u64,
) -> Result<Corpus, CorpusError> {
    Ok(match portion {
        Portion::Full => corpus.clone(),
        Portion::Subset1 => split(corpus, test_fraction, split_seed, true)?.0,
        Portion::Subset2 => split(corpus, test_fraction, split_seed, true)?.1,
    })
}

/// Materialize a selection. Subsets come from one stratified split per
/// corpus, fixed by `split_seed`; unions prefix ids with the corpus key.
pub fn resolve_selection(
    sel: &Selection,
    corpora: &BTreeMap<String, Corpus>,
    test_fraction: f64,
    split_seed: u64,
    role: SplitRole,
) -> Result<Corpus, ExperimentError> {
    let mut parts = Vec::new();
    for s in &sel.0 {
        let c = corpora
            .get(&s.corpus)
            .ok_or_else(|| ExperimentError::UnknownCorpus(s.corpus.clone()))?;
        parts.push((s, portion_of(c, s.portion, test_fraction, split_seed)?));
    }
    if parts.len() == 1 {
        let (_, c) = parts.pop().expect("one part");
        return Ok(c.with_role(role));
    }
    // ids are only unique within a corpus
    let docs: Vec<Document> = parts
        .into_iter()
        .flat_map(|(s, c)| {
            c.into_documents().into_iter().map(move |d| Document {
                id: format!("{}:{}", s.corpus, d.id),
                ..d
            })
        })
        .collect();
    Ok(Corpus::new(sel.to_string(), docs)?.with_role(role))
}

/// Training corpus after rebalancing, validation hold-out and
/// augmentation.
#[derive(Debug, Clone)]
pub struct PreparedTraining {
    pub fit: Corpus,
    /// Empty unless a validation split was requested.
    pub valid: Corpus,
}

/// Rebalance, optionally hold out a stratified validation split, then
/// augment what remains for fitting. The validation part is never augmented.
pub fn prepare_training(
    train: &Corpus,
    opts: &TrainingOptions,
    hold_out_validation: bool,
    run_seed: u64,
    lexicon: &SynonymLexicon,
    exec: Execution,
) -> Result<PreparedTraining, ExperimentError> {
    let train = match opts.imbalance {
        Some(r) => rebalance(train, r, run_seed)?,
        None => train.clone(),
    };
    let (fit, valid) = if hold_out_validation {
        let s = seed::derive(run_seed, &["validation"]);
        split(&train, opts.validation_fraction, s, true)?
    } else {
        (train.with_role(SplitRole::Train), Corpus::empty("validation"))
    };
    let fit = match &opts.augment {
        Some(a) => augment_corpus_with(&fit, lexicon, a.copies_per_doc, a.replace_prob, run_seed, exec)?,
        None => fit,
    };
    Ok(PreparedTraining { fit, valid })
}

fn one_run(
    spec: &ExperimentSpec,
    train: &Corpus,
    test: &Corpus,
    run_seed: u64,
    ctx: &RunContext<'_>,
) -> Result<RunRecord, ExperimentError> {
    let is_lstm = spec.model.kind == ModelKind::Lstm;
    let prepared = prepare_training(train, &spec.options, is_lstm, run_seed, ctx.lexicon, ctx.execution)?;
    let model = TrainedModel::fit(
        &spec.model.seeded(run_seed),
        &prepared.fit,
        &prepared.valid,
        ctx.stopwords,
        ctx.execution,
    )?;
    let metrics = evaluate(&model, test, spec.threshold, ctx.execution)?;
    Ok(RunRecord {
        seed: run_seed,
        metrics,
        train_size: prepared.fit.len(),
        valid_size: prepared.valid.len(),
        test_size: test.len(),
        model_hash: model.content_hash(),
        history: model.history().cloned(),
    })
}

/// Train and evaluate `spec.repetitions` times. Failures end the loop and
/// are reported in the result together with the runs that completed.
pub fn run_experiment(spec: &ExperimentSpec, ctx: &RunContext<'_>) -> ExperimentResult {
    let mut corpus_hashes = BTreeMap::new();
    for name in spec.train.corpora().chain(spec.test.corpora()) {
        if let Some(c) = ctx.corpora.get(name) {
            corpus_hashes
                .entry(name.to_string())
                .or_insert_with(|| c.content_hash());
        }
    }
    let mut result = ExperimentResult {
        spec: spec.clone(),
        runs: Vec::new(),
        mean: None,
        peak: None,
        provenance: Provenance {
            tool_version: crate::TOOL_VERSION.to_string(),
            config_hash: spec.config_hash(),
            corpus_hashes,
            split_seed: spec.seed_base,
            seeds: (0..spec.repetitions as u64).map(|r| spec.seed_base + r).collect(),
        },
        error: None,
    };
    let prepared = spec.validate().and_then(|_| {
        Ok((
            resolve_selection(&spec.train, ctx.corpora, spec.test_fraction, spec.seed_base, SplitRole::Train)?,
            resolve_selection(&spec.test, ctx.corpora, spec.test_fraction, spec.seed_base, SplitRole::Test)?,
        ))
    });
    let (train, test) = match prepared {
        Ok(p) => p,
        Err(e) => {
            result.error = Some(e.to_string());
            return result;
        }
    };
    for &run_seed in &result.provenance.seeds.clone() {
        log::info!("{}: run with seed {run_seed}", spec.name);
        match one_run(spec, &train, &test, run_seed, ctx) {
            Ok(r) => result.runs.push(r),
            Err(e) => {
                result.error = Some(format!("run with seed {run_seed}: {e}"));
                break;
            }
        }
    }
    let metrics: Vec<Metrics> = result.runs.iter().map(|r| r.metrics).collect();
    result.mean = MetricSummary::mean(&metrics);
    result.peak = metrics
        .iter()
        .enumerate()
        .fold(None, |best: Option<Peak>, (i, m)| match best {
            Some(b) if b.accuracy >= m.accuracy => Some(b),
            _ => Some(Peak { run: i, accuracy: m.accuracy }),
        });
    result
}

/// The sixteen train/test configurations of the cross-corpus study, with
/// default hyperparameters. Corpora are keyed `SA1`, `US1` and `US2`.
pub fn table2_specs() -> Vec<ExperimentSpec> {
    let lr = ModelSpec::new(ModelKind::Logistic);
    let lstm = ModelSpec::new(ModelKind::Lstm);
    let aug = Some(AugmentConfig::default());
    let rows: [(&str, &ModelSpec, &str, &str, Option<f64>, Option<AugmentConfig>); 16] = [
        ("Logistic Regression (Base)", &lr, "US1 Subset1", "US1 Subset2", Some(1.0), None),
        ("Logistic Regression (Base)", &lr, "US1 Subset1", "SA1", Some(1.0), None),
        ("Logistic Regression (Base)", &lr, "SA1 Subset1", "SA1 Subset2", Some(1.0), None),
        ("Logistic Regression (Base)", &lr, "SA1 Subset1", "US1", Some(1.0), None),
        ("LSTM (Base - Balanced Classes)", &lstm, "SA1 Subset1", "SA1 Subset2", Some(1.0), None),
        ("LSTM (Base - Balanced Classes)", &lstm, "US1 Subset1", "US1 Subset2", Some(1.0), None),
        ("LSTM (Class Imbalance)", &lstm, "SA1 Subset1", "SA1 Subset2", Some(2.0), None),
        ("LSTM (Class Imbalance)", &lstm, "SA1 Subset1", "US1", Some(2.0), None),
        ("LSTM", &lstm, "US1 Subset1", "SA1", None, None),
        ("LSTM (Wordnet Augmentation)", &lstm, "SA1 Subset1", "SA1 Subset2", Some(2.0), aug),
        ("LSTM (Wordnet Augmentation)", &lstm, "SA1 Subset1", "US1", Some(2.0), aug),
        ("LSTM (Wordnet Augmentation)", &lstm, "US1 Subset1", "US1 Subset2", None, aug),
        ("LSTM (Wordnet Augmentation)", &lstm, "US1 Subset1", "SA1", None, aug),
        (
            "LSTM (Wordnet Augmentation)",
            &lstm,
            "SA1 Subset1 + US1 Subset1",
            "SA1 Subset2 + US1 Subset2",
            None,
            aug,
        ),
        ("LSTM", &lstm, "US2 Subset1", "US2 Subset2", None, None),
        ("LSTM", &lstm, "US2 Subset1", "SA1", None, None),
    ];
    rows.into_iter()
        .map(|(name, model, train, test, imbalance, augment)| {
            let mut s = ExperimentSpec::new(name, model.clone(), train, test);
            s.options.imbalance = imbalance;
            s.options.augment = augment;
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::eval::run_matrix;
    use crate::lstm::{Architecture, TrainConfig};

    fn toy(name: &str, n: usize, fake_word: &str, real_word: &str) -> Corpus {
        let docs = (0..n)
            .map(|i| {
                let fake = i % 3 == 0;
                let w = if fake { fake_word } else { real_word };
                let text = format!("story {i} about {w} and more {w} words filler text");
                Document::new(format!("{i}"), text, Label::from_fake(fake))
            })
            .collect();
        Corpus::new(name, docs).unwrap()
    }

    fn corpora() -> BTreeMap<String, Corpus> {
        let mut m = BTreeMap::new();
        m.insert("A".to_string(), toy("A", 60, "shocking", "minister"));
        m.insert("B".to_string(), toy("B", 45, "outrage", "council"));
        m
    }

    fn with_ctx<R>(f: impl FnOnce(&RunContext<'_>) -> R) -> R {
        let corpora = corpora();
        let sw = StopWords::english();
        let lex = SynonymLexicon::bundled();
        f(&RunContext {
            corpora: &corpora,
            stopwords: &sw,
            lexicon: &lex,
            execution: Execution::default(),
        })
    }

    #[test]
    fn selectors_round_trip() {
        let s = Selection::parse("SA1 Subset1 + US1").unwrap();
        assert_eq!(s.to_string(), "SA1 Subset1 + US1");
        assert_eq!(s.0[1].portion, Portion::Full);
        assert!(Selection::parse("SA1 Subset3").is_err());
        assert!(Selection::parse("SA1 Subset1 + SA1 Subset2").is_err());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Selection>(&json).unwrap(), s);
    }

    #[test]
    fn overlapping_train_and_test_rejected() {
        let lr = ModelSpec::new(ModelKind::Logistic);
        for (train, test) in [("A", "A Subset2"), ("A Subset1", "A Subset1"), ("A Subset1 + B", "B Subset2")] {
            let spec = ExperimentSpec::new("x", lr.clone(), train, test);
            assert!(spec.validate().is_err(), "{train} / {test}");
        }
        assert!(ExperimentSpec::new("x", lr, "A Subset1", "A Subset2 + B").validate().is_ok());
    }

    #[test]
    fn deterministic_runs_average_to_themselves() {
        with_ctx(|ctx| {
            let spec = ExperimentSpec::new("lr", ModelSpec::new(ModelKind::Logistic), "A Subset1", "A Subset2");
            let r = run_experiment(&spec, ctx);
            assert!(r.error.is_none(), "{:?}", r.error);
            assert_eq!(r.runs.len(), 5);
            assert_eq!(r.provenance.seeds, vec![0, 1, 2, 3, 4]);
            assert_eq!(r.runs[0].test_size, 12);
            assert_eq!(r.mean.unwrap().accuracy, 1.0);
            assert_eq!(r.peak.as_ref().unwrap().run, 0);
            assert_eq!(r, run_experiment(&spec, ctx));
        });
    }

    #[test]
    fn single_repetition_mean_equals_peak() {
        with_ctx(|ctx| {
            let mut spec = ExperimentSpec::new("pa", ModelSpec::new(ModelKind::PassiveAggressive), "A", "B");
            spec.repetitions = 1;
            let r = run_experiment(&spec, ctx);
            let m = r.mean.unwrap();
            assert_eq!(m.accuracy, r.peak.unwrap().accuracy);
            assert_eq!(m.accuracy, r.runs[0].metrics.accuracy);
            assert!(r.provenance.corpus_hashes.contains_key("A"));
            assert!(r.provenance.corpus_hashes.contains_key("B"));
        });
    }

    #[test]
    fn union_and_rebalance_and_augment_sizes() {
        with_ctx(|ctx| {
            let mut spec = ExperimentSpec::new("lr", ModelSpec::new(ModelKind::Logistic), "A Subset1 + B Subset1", "A Subset2 + B Subset2");
            spec.repetitions = 1;
            spec.options.imbalance = Some(1.0);
            spec.options.augment = Some(AugmentConfig::default());
            let r = run_experiment(&spec, ctx);
            assert!(r.error.is_none(), "{:?}", r.error);
            // A: 20 fake / 40 real -> subset1 16 / 32; B: 15 / 30 -> 12 / 24
            // balanced: 28 + 28, then one augmented copy each
            assert_eq!(r.runs[0].train_size, 112);
            assert_eq!(r.runs[0].test_size, 12 + 9);
        });
    }

    #[test]
    fn lstm_holds_out_validation() {
        with_ctx(|ctx| {
            let mut model = ModelSpec::new(ModelKind::Lstm);
            model.lstm.word2vec.dim = 8;
            model.lstm.word2vec.epochs = 1;
            model.lstm.architecture = Architecture {
                seq_len: 16,
                filters: 4,
                kernel: 3,
                pool: 2,
                hidden1: 4,
                hidden2: 4,
                dense1: 4,
                dense2: 2,
                dropout: 0.1,
            };
            model.lstm.training = TrainConfig { epochs: 2, ..Default::default() };
            let mut spec = ExperimentSpec::new("lstm", model, "A Subset1", "A Subset2");
            spec.repetitions = 2;
            let r = run_experiment(&spec, ctx);
            assert!(r.error.is_none(), "{:?}", r.error);
            let run = &r.runs[0];
            assert_eq!(run.train_size + run.valid_size, 48);
            assert_eq!(run.valid_size, 5);
            assert_eq!(run.history.as_ref().unwrap().train_size, 43);
        });
    }

    #[test]
    fn failures_are_reported_with_partial_results() {
        with_ctx(|ctx| {
            let spec = ExperimentSpec::new("x", ModelSpec::new(ModelKind::Logistic), "Z Subset1", "A");
            let r = run_experiment(&spec, ctx);
            assert!(r.error.as_deref().unwrap().contains("unknown corpus"));
            assert!(r.runs.is_empty() && r.mean.is_none());
            let mut bad = ExperimentSpec::new("y", ModelSpec::new(ModelKind::Logistic), "A Subset1", "A Subset2");
            bad.options.imbalance = Some(10.0);
            let r = run_experiment(&bad, ctx);
            assert!(r.error.is_some());
        });
    }

    #[test]
    fn matrix_rows_and_markers() {
        with_ctx(|ctx| {
            let empty = run_matrix(&[], ctx);
            assert_eq!(empty.to_text().lines().count(), 2);
            assert!(empty.to_text().starts_with("Model | Data Trained | Data Tested | Average Accuracy | F1 Score | Per Class Accuracy"));
            let mut ok = ExperimentSpec::new("LR", ModelSpec::new(ModelKind::Logistic), "A Subset1", "A Subset2");
            ok.repetitions = 1;
            let one = run_matrix(std::slice::from_ref(&ok), ctx);
            assert_eq!(one.to_text().lines().count(), 3);
            assert!(one.to_text().contains("Fake: 1.000 | Real: 1.000"));
            let broken = ExperimentSpec::new("bad", ModelSpec::new(ModelKind::Logistic), "Q", "A");
            let two = run_matrix(&[ok, broken], ctx);
            assert!(two.has_errors());
            assert!(two.to_text().lines().nth(3).unwrap().contains("ERROR: unknown corpus"));
            let back: MatrixReportJson = serde_json::from_str(&two.to_json()).unwrap();
            assert_eq!(back.rows.len(), 2);
        });
    }

    #[derive(Deserialize)]
    struct MatrixReportJson {
        rows: Vec<serde_json::Value>,
    }

    #[test]
    fn sixteen_reference_rows() {
        let specs = table2_specs();
        assert_eq!(specs.len(), 16);
        assert!(specs.iter().all(|s| s.validate().is_ok()));
        assert_eq!(specs.iter().filter(|s| s.model.kind == ModelKind::Logistic).count(), 4);
        assert_eq!(specs.iter().filter(|s| s.options.augment.is_some()).count(), 5);
        assert_eq!(specs[13].train.to_string(), "SA1 Subset1 + US1 Subset1");
    }
}
