//! Run configuration: one TOML document, overridden by command-line flags.
//!
//! Precedence, lowest first: built-in defaults, the `--config` file, flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use serde::{Deserialize, Serialize};
use veritext::augment::SynonymLexicon;
use veritext::corpus::{load_corpus, CorpusFormat, LoadOptions};
use veritext::eval::{ExperimentSpec, Selection, TrainingOptions};
use veritext::explain::{LimeConfig, Method, DEFAULT_TOP_K};
use veritext::hashing;
use veritext::model::{ModelKind, ModelSpec};
use veritext::par::Execution;
use veritext::preprocess::StopWords;
use veritext::{Corpus, Source};

use crate::failure::{Failure, ResultExt};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub path: PathBuf,
    /// `jsonl`, `csv` or `dir`; inferred from the path when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(default)]
    pub allow_empty: bool,
    /// SA1, US1, US2 or Other; defaults to the corpus key.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Resources {
    /// Stopword list; the bundled English list when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<PathBuf>,
    /// Synonym lexicon TSV; the bundled lexicon when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplainSettings {
    pub method: Method,
    pub top_k: usize,
    pub lime: LimeConfig,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        ExplainSettings {
            method: Method::Lime,
            top_k: DEFAULT_TOP_K,
            lime: LimeConfig {
                num_features: DEFAULT_TOP_K,
                ..LimeConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Global seed; every random stream is derived from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// Run every data-parallel loop sequentially.
    pub deterministic: bool,
    /// Held-out share used for `Subset1` / `Subset2`.
    pub test_fraction: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train: Option<Selection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<Selection>,
    pub corpora: BTreeMap<String, CorpusEntry>,
    pub resources: Resources,
    pub model: ModelSpec,
    pub training: TrainingOptions,
    pub explain: ExplainSettings,
    pub experiments: Vec<ExperimentSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            output_dir: PathBuf::from("veritext-out"),
            jobs: None,
            deterministic: false,
            test_fraction: 0.2,
            threshold: 0.5,
            train: None,
            test: None,
            corpora: BTreeMap::new(),
            resources: Resources::default(),
            model: ModelSpec::new(ModelKind::Logistic),
            training: TrainingOptions::default(),
            explain: ExplainSettings::default(),
            experiments: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))
            .user()?;
        Self::parse(&text)
            .with_context(|| format!("parsing config {}", path.display()))
            .user()
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes to TOML")
    }

    /// Hash of the settings that influence results. Output location, worker
    /// count and corpus paths are left out; corpora are identified by their
    /// content hashes instead.
    pub fn config_hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.jobs = None;
        for e in c.corpora.values_mut() {
            e.path = PathBuf::new();
        }
        hashing::sha256_hex(&serde_json::to_vec(&c).expect("config serializes"))
    }

    pub fn execution(&self) -> Execution {
        if self.deterministic {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    /// Write `<command>.config.toml` with every default spelled out.
    pub fn write_resolved(&self, dir: &Path, command: &str) -> Result<PathBuf, Failure> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .runtime()?;
        let path = dir.join(format!("{command}.config.toml"));
        std::fs::write(&path, self.to_toml())
            .with_context(|| format!("writing {}", path.display()))
            .runtime()?;
        Ok(path)
    }

    pub fn stopwords(&self) -> Result<StopWords, Failure> {
        match &self.resources.stopwords {
            Some(p) => StopWords::load(p)
                .with_context(|| format!("reading stopwords {}", p.display()))
                .user(),
            None => Ok(StopWords::english()),
        }
    }

    pub fn lexicon(&self) -> Result<SynonymLexicon, Failure> {
        match &self.resources.lexicon {
            Some(p) => SynonymLexicon::load(p)
                .with_context(|| format!("reading lexicon {}", p.display()))
                .user(),
            None => Ok(SynonymLexicon::bundled()),
        }
    }

    /// Load every configured corpus, keyed by name.
    pub fn load_corpora(&self) -> Result<BTreeMap<String, Corpus>, Failure> {
        self.corpora
            .iter()
            .map(|(name, e)| Ok((name.clone(), load_entry(name, e)?)))
            .collect()
    }
}

pub fn load_entry(name: &str, e: &CorpusEntry) -> Result<Corpus, Failure> {
    let format = match &e.format {
        Some(f) => f.parse::<CorpusFormat>().map_err(|m| anyhow!(m)).user()?,
        None => CorpusFormat::infer(&e.path),
    };
    let source: Source = e
        .source
        .as_deref()
        .unwrap_or(name)
        .parse()
        .unwrap_or_default();
    let opts = LoadOptions {
        allow_empty: e.allow_empty,
        default_source: source,
        name: Some(name.to_string()),
    };
    load_corpus(&e.path, format, &opts)
        .with_context(|| format!("loading corpus {name}"))
        .user()
}

/// Parse `NAME=PATH`; a bare path is named after its file stem.
pub fn parse_corpus_arg(arg: &str) -> anyhow::Result<(String, PathBuf)> {
    if let Some((name, path)) = arg.split_once('=') {
        if name.trim().is_empty() || path.is_empty() {
            bail!("expected NAME=PATH, got {arg:?}");
        }
        return Ok((name.trim().to_string(), PathBuf::from(path)));
    }
    let path = PathBuf::from(arg);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| anyhow!("cannot name corpus {arg:?}; use NAME=PATH"))?;
    Ok((name, path))
}
