use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use veritext::augment::augment_corpus_with;
use veritext::corpus::{save_jsonl, summarize_by_class, top_words, CorpusStats, SplitRole};
use veritext::eval::{
    evaluate as score, fmt_ratio, prepare_training, resolve_selection, run_matrix,
    table2_specs, ExperimentError, MatrixReport, Metrics, RunContext, Selection,
};
use veritext::explain::{
    intrinsic_explain, lime_explain, render_html, ExplainError, Explanation, Method,
    SCHEMA_VERSION,
};
use veritext::linear::LinearError;
use veritext::lstm::{LstmError, TrainHistory};
use veritext::model::{ModelError, ModelKind, TrainedModel};
use veritext::{par, Corpus, Document, Label, TextClassifier, TOOL_VERSION};

use crate::config::{load_entry, parse_corpus_arg, CorpusEntry, RunConfig};
use crate::failure::{Failure, ResultExt};
use crate::{AugmentArgs, Common, EvaluateArgs, ExplainArgs, MatrixArgs, StatsArgs, TrainArgs};

/// Defaults, then the config file, then flags.
fn resolve(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(d) = &common.out_dir {
        cfg.output_dir = d.clone();
    }
    if common.jobs.is_some() {
        cfg.jobs = common.jobs;
    }
    cfg.deterministic |= common.deterministic;
    for arg in &common.corpora {
        let (name, path) = parse_corpus_arg(arg).user()?;
        cfg.corpora.insert(name, entry(path, common.allow_empty));
    }
    if common.allow_empty {
        cfg.corpora.values_mut().for_each(|e| e.allow_empty = true);
    }
    if common.stopwords.is_some() {
        cfg.resources.stopwords = common.stopwords.clone();
    }
    if common.lexicon.is_some() {
        cfg.resources.lexicon = common.lexicon.clone();
    }
    if let Some(j) = cfg.jobs {
        if j == 0 {
            return Err(Failure::user("--jobs must be at least 1"));
        }
        par::set_worker_limit(j);
    }
    Ok(cfg)
}

fn entry(path: PathBuf, allow_empty: bool) -> CorpusEntry {
    CorpusEntry {
        path,
        format: None,
        allow_empty,
        source: None,
    }
}

/// Stamped into every artifact.
#[derive(Debug, Clone, Serialize)]
struct ArtifactProvenance {
    tool_version: String,
    config_hash: String,
    corpus_hashes: BTreeMap<String, String>,
    seeds: Vec<u64>,
}

impl ArtifactProvenance {
    fn new(cfg: &RunConfig, corpora: &BTreeMap<String, Corpus>, seeds: Vec<u64>) -> Self {
        ArtifactProvenance {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: cfg.config_hash(),
            corpus_hashes: corpora
                .iter()
                .map(|(k, c)| (k.clone(), c.content_hash()))
                .collect(),
            seeds,
        }
    }

    fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("tool_version".into(), self.tool_version.clone());
        m.insert("config_hash".into(), self.config_hash.clone());
        for (k, h) in &self.corpus_hashes {
            m.insert(format!("corpus_hash.{k}"), h.clone());
        }
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        m.insert("seeds".into(), seeds.join(","));
        m
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).runtime()?;
    std::fs::write(path, text + "\n")
        .with_context(|| format!("writing {}", path.display()))
        .runtime()
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Failure> {
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating {}", dir.display()))
        .runtime()?;
    Ok(dir)
}

fn model_failure(e: ModelError) -> Failure {
    let user = matches!(
        &e,
        ModelError::Linear(LinearError::InvalidConfig(_) | LinearError::Empty)
            | ModelError::Lstm(LstmError::InvalidConfig(_) | LstmError::MissingClass { .. })
    );
    if user {
        Failure::User(e.into())
    } else {
        Failure::Runtime(e.into())
    }
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Model(m) => model_failure(m),
        ExperimentError::Eval(_) => Failure::Runtime(e.into()),
        _ => Failure::User(e.into()),
    }
}

/// The configured selection, or the only configured corpus in full.
fn selection_or_default(
    sel: Option<Selection>,
    cfg: &RunConfig,
    what: &str,
) -> Result<Selection, Failure> {
    if let Some(s) = sel {
        return Ok(s);
    }
    match cfg.corpora.keys().collect::<Vec<_>>().as_slice() {
        [only] => Selection::parse(only).map_err(Failure::user),
        _ => Err(Failure::user(format!(
            "no {what} selection: pass --{what} or set `{what}` in the config"
        ))),
    }
}

fn parse_selection(s: &str) -> Result<Selection, Failure> {
    Selection::parse(s).map_err(Failure::user)
}

/// Load only the corpora a selection mentions.
fn load_for(cfg: &RunConfig, sel: &Selection) -> Result<BTreeMap<String, Corpus>, Failure> {
    let mut out = BTreeMap::new();
    for name in sel.corpora() {
        if out.contains_key(name) {
            continue;
        }
        let e = cfg
            .corpora
            .get(name)
            .ok_or_else(|| Failure::user(format!("unknown corpus {name:?}; add it with --corpus {name}=PATH")))?;
        out.insert(name.to_string(), load_entry(name, e)?);
    }
    Ok(out)
}

fn render_table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        padded.join(" | ").trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
    }
    out
}

#[derive(Serialize)]
struct StatsColumn {
    name: String,
    stats: CorpusStats,
    top_words: Vec<(String, usize)>,
}

#[derive(Serialize)]
struct StatsReport {
    provenance: ArtifactProvenance,
    columns: Vec<String>,
    rows: Vec<(String, Vec<String>)>,
    detail: Vec<StatsColumn>,
}

pub fn stats(common: &Common, a: &StatsArgs) -> Result<(), Failure> {
    let mut cfg = resolve(common)?;
    if !a.paths.is_empty() {
        cfg.corpora.clear();
        for p in &a.paths {
            let (name, path) = parse_corpus_arg(p).user()?;
            cfg.corpora.insert(name, entry(path, common.allow_empty));
        }
    }
    if cfg.corpora.is_empty() {
        return Err(Failure::user("no corpora given"));
    }
    let stopwords = cfg.stopwords()?;
    let corpora = cfg.load_corpora()?;
    let mut columns = Vec::new();
    for (name, c) in &corpora {
        let by_class = summarize_by_class(c);
        for (label, s) in [(Label::Fake, by_class.fake), (Label::Real, by_class.real)] {
            columns.push(StatsColumn {
                name: format!("{name} {}", if label.is_fake() { "Fake" } else { "Real" }),
                stats: s,
                top_words: top_words(&c.subset(label), a.top, &stopwords),
            });
        }
    }
    let labels: Vec<&str> = CorpusStats::default().rows().iter().map(|r| r.0).collect();
    let rows: Vec<(String, Vec<String>)> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let vals = columns.iter().map(|c| c.stats.rows()[i].1.clone()).collect();
            (l.to_string(), vals)
        })
        .collect();
    let report = StatsReport {
        provenance: ArtifactProvenance::new(&cfg, &corpora, vec![]),
        columns: columns.iter().map(|c| c.name.clone()).collect(),
        rows,
        detail: columns,
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).runtime()?);
        return Ok(());
    }
    let mut header = vec![String::new()];
    header.extend(report.columns.iter().cloned());
    let body: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|(l, v)| std::iter::once(l.clone()).chain(v.iter().cloned()).collect())
        .collect();
    print!("{}", render_table(&header, &body));
    for c in &report.detail {
        println!("\nTop {} words: {}", c.top_words.len(), c.name);
        for (i, (w, n)) in c.top_words.iter().enumerate() {
            println!("{:>4}  {w:<24} {n}", i + 1);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    provenance: ArtifactProvenance,
    model_kind: &'a str,
    model_file: String,
    model_hash: String,
    train_selection: String,
    train_size: usize,
    valid_size: usize,
    augmented: bool,
    history: Option<&'a TrainHistory>,
}

pub fn train(common: &Common, a: &TrainArgs) -> Result<(), Failure> {
    let mut cfg = resolve(common)?;
    if let Some(k) = a.model {
        cfg.model.kind = k;
    }
    if let Some(e) = a.epochs {
        match cfg.model.kind {
            ModelKind::Logistic => cfg.model.logistic.epochs = e,
            ModelKind::PassiveAggressive => cfg.model.passive_aggressive.epochs = e,
            ModelKind::Lstm => cfg.model.lstm.training.epochs = e,
        }
    }
    if let Some(t) = &a.train {
        cfg.train = Some(parse_selection(t)?);
    }
    if a.augment && cfg.training.augment.is_none() {
        cfg.training.augment = Some(Default::default());
    }
    if a.imbalance.is_some() {
        cfg.training.imbalance = a.imbalance;
    }
    let sel = selection_or_default(cfg.train.clone(), &cfg, "train")?;
    cfg.train = Some(sel.clone());

    let exec = cfg.execution();
    let corpora = load_for(&cfg, &sel)?;
    let stopwords = cfg.stopwords()?;
    let lexicon = cfg.lexicon()?;
    let train = resolve_selection(&sel, &corpora, cfg.test_fraction, cfg.seed, SplitRole::Train)
        .map_err(experiment_failure)?;
    let is_lstm = cfg.model.kind == ModelKind::Lstm;
    let prepared = prepare_training(&train, &cfg.training, is_lstm, cfg.seed, &lexicon, exec)
        .map_err(experiment_failure)?;
    log::info!(
        "training {} on {} documents ({} held out)",
        cfg.model.kind.display_name(),
        prepared.fit.len(),
        prepared.valid.len()
    );
    let spec = cfg.model.seeded(cfg.seed);
    let mut model = TrainedModel::fit(&spec, &prepared.fit, &prepared.valid, &stopwords, exec)
        .map_err(model_failure)?;

    let prov = ArtifactProvenance::new(&cfg, &corpora, vec![cfg.seed]);
    let stamp = model.provenance_mut();
    stamp.extend(prov.to_map());
    stamp.insert("train_selection".into(), sel.to_string());

    let dir = out_dir(&cfg)?;
    let file = dir.join(if is_lstm { "model.vtx" } else { "model.json" });
    model
        .save(&file)
        .with_context(|| format!("writing {}", file.display()))
        .runtime()?;
    cfg.write_resolved(&dir, "train")?;
    let hash = model.content_hash();
    let summary = TrainSummary {
        provenance: prov,
        model_kind: model.kind_name(),
        model_file: file.display().to_string(),
        model_hash: hash.clone(),
        train_selection: sel.to_string(),
        train_size: prepared.fit.len(),
        valid_size: prepared.valid.len(),
        augmented: cfg.training.augment.is_some(),
        history: model.history(),
    };
    write_json(&dir.join("train.json"), &summary)?;
    println!(
        "trained {} on {} documents ({} validation): {} sha256:{}",
        model.kind_name(),
        prepared.fit.len(),
        prepared.valid.len(),
        file.display(),
        hash
    );
    Ok(())
}

fn metrics_line(m: &Metrics) -> String {
    format!(
        "accuracy {:.3} | f1 {:.3} | Fake: {} | Real: {} | n {}",
        m.accuracy,
        m.f1,
        fmt_ratio(m.per_class_accuracy.fake),
        fmt_ratio(m.per_class_accuracy.real),
        m.n
    )
}

#[derive(Serialize)]
struct EvaluationReport {
    provenance: ArtifactProvenance,
    model_kind: &'static str,
    model_hash: String,
    test_selection: String,
    threshold: f64,
    metrics: Metrics,
}

fn load_model(path: &Path) -> Result<TrainedModel, Failure> {
    TrainedModel::load(path)
        .with_context(|| format!("loading model {}", path.display()))
        .user()
}

pub fn evaluate(common: &Common, a: &EvaluateArgs) -> Result<(), Failure> {
    let mut cfg = resolve(common)?;
    if let Some(t) = &a.test {
        cfg.test = Some(parse_selection(t)?);
    }
    if let Some(t) = a.threshold {
        if !(0.0..=1.0).contains(&t) {
            return Err(Failure::user(format!("threshold {t} outside [0, 1]")));
        }
        cfg.threshold = t;
    }
    let sel = selection_or_default(cfg.test.clone(), &cfg, "test")?;
    cfg.test = Some(sel.clone());
    let model = load_model(&a.model)?;
    let corpora = load_for(&cfg, &sel)?;
    let test = resolve_selection(&sel, &corpora, cfg.test_fraction, cfg.seed, SplitRole::Test)
        .map_err(experiment_failure)?;
    let metrics = score(&model, &test, cfg.threshold, cfg.execution()).runtime()?;
    let dir = out_dir(&cfg)?;
    cfg.write_resolved(&dir, "evaluate")?;
    let report = EvaluationReport {
        provenance: ArtifactProvenance::new(&cfg, &corpora, vec![cfg.seed]),
        model_kind: model.kind_name(),
        model_hash: model.content_hash(),
        test_selection: sel.to_string(),
        threshold: cfg.threshold,
        metrics,
    };
    write_json(&dir.join("evaluation.json"), &report)?;
    println!("{} on {sel}: {}", model.kind_name(), metrics_line(&metrics));
    Ok(())
}

#[derive(Serialize)]
struct MatrixOutput<'a> {
    provenance: ArtifactProvenance,
    report: &'a MatrixReport,
}

pub fn matrix(common: &Common, a: &MatrixArgs) -> Result<(), Failure> {
    let mut cfg = resolve(common)?;
    if a.table2 || cfg.experiments.is_empty() {
        cfg.experiments = table2_specs();
        for s in &mut cfg.experiments {
            s.seed_base = cfg.seed;
        }
    }
    if let Some(seed) = common.seed {
        cfg.experiments.iter_mut().for_each(|s| s.seed_base = seed);
    }
    if let Some(r) = a.repetitions {
        if r == 0 {
            return Err(Failure::user("--repetitions must be at least 1"));
        }
        cfg.experiments.iter_mut().for_each(|s| s.repetitions = r);
    }
    let corpora = cfg.load_corpora()?;
    let stopwords = cfg.stopwords()?;
    let lexicon = cfg.lexicon()?;
    let ctx = RunContext {
        corpora: &corpora,
        stopwords: &stopwords,
        lexicon: &lexicon,
        execution: cfg.execution(),
    };
    let report = run_matrix(&cfg.experiments, &ctx);
    let dir = out_dir(&cfg)?;
    cfg.write_resolved(&dir, "matrix")?;
    let mut seeds: Vec<u64> = report
        .rows
        .iter()
        .flat_map(|r| r.provenance.seeds.iter().copied())
        .collect();
    seeds.sort_unstable();
    seeds.dedup();
    let text = report.to_text();
    std::fs::write(dir.join("matrix.txt"), &text).runtime()?;
    write_json(
        &dir.join("matrix.json"),
        &MatrixOutput {
            provenance: ArtifactProvenance::new(&cfg, &corpora, seeds),
            report: &report,
        },
    )?;
    print!("{text}");
    if report.has_errors() {
        return Err(Failure::Runtime(anyhow::anyhow!(
            "some experiments failed; see {}",
            dir.join("matrix.json").display()
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct AugmentProvenance {
    provenance: ArtifactProvenance,
    output_hash: String,
    input_size: usize,
    output_size: usize,
    copies_per_doc: usize,
    replace_prob: f64,
}

pub fn augment(common: &Common, a: &AugmentArgs) -> Result<(), Failure> {
    let mut cfg = resolve(common)?;
    let (name, path) = parse_corpus_arg(&a.input).user()?;
    let e = match cfg.corpora.get(&name) {
        Some(e) if e.path == path => e.clone(),
        _ => entry(path, common.allow_empty),
    };
    cfg.corpora = BTreeMap::from([(name.clone(), e.clone())]);
    let mut aug = cfg.training.augment.unwrap_or_default();
    if let Some(k) = a.copies {
        aug.copies_per_doc = k;
    }
    if let Some(p) = a.replace_prob {
        aug.replace_prob = p;
    }
    cfg.training.augment = Some(aug);
    if let Some(parent) = a.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        cfg.output_dir = parent.to_path_buf();
    } else {
        cfg.output_dir = PathBuf::from(".");
    }

    let corpus = load_entry(&name, &e)?;
    let lexicon = cfg.lexicon()?;
    let out = augment_corpus_with(
        &corpus,
        &lexicon,
        aug.copies_per_doc,
        aug.replace_prob,
        cfg.seed,
        cfg.execution(),
    )
    .user()?;
    let dir = out_dir(&cfg)?;
    save_jsonl(&out, &a.output)
        .with_context(|| format!("writing {}", a.output.display()))
        .runtime()?;
    cfg.write_resolved(&dir, "augment")?;
    let corpora = BTreeMap::from([(name, corpus)]);
    let mut sidecar = a.output.clone().into_os_string();
    sidecar.push(".provenance.json");
    write_json(
        Path::new(&sidecar),
        &AugmentProvenance {
            provenance: ArtifactProvenance::new(&cfg, &corpora, vec![cfg.seed]),
            output_hash: out.content_hash(),
            input_size: corpora.values().next().map_or(0, Corpus::len),
            output_size: out.len(),
            copies_per_doc: aug.copies_per_doc,
            replace_prob: aug.replace_prob,
        },
    )?;
    println!("wrote {} documents to {}", out.len(), a.output.display());
    Ok(())
}

fn read_article(input: Option<&Path>) -> Result<(String, String), Failure> {
    match input {
        None => read_stdin(),
        Some(p) if p.as_os_str() == "-" => read_stdin(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading {}", p.display()))
                .user()?;
            let id = p
                .file_stem()
                .map_or_else(|| "article".into(), |s| s.to_string_lossy().into_owned());
            Ok((id, text))
        }
    }
}

fn read_stdin() -> Result<(String, String), Failure> {
    let mut text = String::new();
    std::io::stdin()
        .read_to_string(&mut text)
        .context("reading stdin")
        .user()?;
    Ok(("stdin".into(), text))
}

/// Report for a document with nothing to explain.
fn empty_explanation(model: &TrainedModel, doc: &Document, method: Method, top_k: usize) -> Explanation {
    let probability = model.predict_proba(&doc.text);
    Explanation {
        schema_version: SCHEMA_VERSION,
        doc_id: doc.id.clone(),
        predicted_label: Label::from_fake(probability >= 0.5),
        probability,
        method,
        top_k,
        word_weights: Vec::new(),
        seed: None,
        model_hash: None,
        surrogate_score: None,
        warnings: vec![format!("document {} has no tokens to explain", doc.id)],
        provenance: BTreeMap::new(),
    }
}

pub fn explain(common: &Common, a: &ExplainArgs) -> Result<(), Failure> {
    let mut cfg = resolve(common)?;
    if let Some(m) = a.method {
        cfg.explain.method = m;
    }
    if let Some(k) = a.top_k {
        if k == 0 {
            return Err(Failure::user("--top-k must be at least 1"));
        }
        cfg.explain.top_k = k;
    }
    if let Some(n) = a.samples {
        cfg.explain.lime.num_samples = n;
    }
    cfg.explain.lime.seed = cfg.seed;
    cfg.explain.lime.num_features = cfg.explain.top_k;

    let model = load_model(&a.model)?;
    if cfg.explain.method == Method::Intrinsic && !matches!(model, TrainedModel::Lstm(_)) {
        return Err(Failure::user("method requires lstm model"));
    }
    let (file_id, text) = read_article(a.input.as_deref())?;
    let doc = Document::new(a.id.clone().unwrap_or(file_id), text, Label::Real);
    let top_k = cfg.explain.top_k;
    let mut expl = match (&model, cfg.explain.method) {
        (TrainedModel::Lstm(m), Method::Intrinsic) => intrinsic_explain(m, &doc, top_k),
        (_, Method::Intrinsic) => unreachable!("checked above"),
        (_, Method::Lime) => {
            let mut lc = cfg.explain.lime.clone();
            lc.execution = cfg.execution();
            match lime_explain(&model, &doc, &lc) {
                Ok(e) => e,
                Err(ExplainError::NoTokens(_)) => empty_explanation(&model, &doc, Method::Lime, top_k),
                Err(e @ (ExplainError::TooFewSamples(_) | ExplainError::InvalidConfig(_))) => {
                    return Err(Failure::User(e.into()))
                }
                Err(e) => return Err(Failure::Runtime(e.into())),
            }
        }
    };
    expl.model_hash = Some(model.content_hash());
    if cfg.explain.method == Method::Lime {
        expl.seed = Some(cfg.seed);
    }
    let mut prov = ArtifactProvenance::new(&cfg, &BTreeMap::new(), vec![cfg.seed]).to_map();
    let trained_on = match &model {
        TrainedModel::Linear(m) => &m.provenance,
        TrainedModel::Lstm(m) => &m.provenance,
    };
    for (k, v) in trained_on {
        if k.starts_with("corpus_hash.") {
            prov.insert(k.clone(), v.clone());
        }
    }
    expl.provenance = prov;

    let dir = out_dir(&cfg)?;
    cfg.write_resolved(&dir, "explain")?;
    expl.save_json(&dir.join("explanation.json")).runtime()?;
    let html = dir.join("explanation.html");
    std::fs::write(&html, render_html(&expl, &doc))
        .with_context(|| format!("writing {}", html.display()))
        .runtime()?;
    for w in &expl.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", html.display());
    Ok(())
}
