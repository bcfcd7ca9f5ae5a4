use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use super::{Corpus, CorpusError, Document, Label, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
    FlatDir,
}

impl CorpusFormat {
    /// Directories are flat-dir corpora, `.csv` is CSV, anything else JSONL.
    pub fn infer(path: &Path) -> CorpusFormat {
        if path.is_dir() {
            CorpusFormat::FlatDir
        } else if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
        {
            CorpusFormat::Csv
        } else {
            CorpusFormat::Jsonl
        }
    }
}

impl std::str::FromStr for CorpusFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" | "json" => Ok(CorpusFormat::Jsonl),
            "dir" | "flat_dir" | "flat-dir" => Ok(CorpusFormat::FlatDir),
            other => Err(format!("unknown corpus format {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Keep documents whose text is empty.
    pub allow_empty: bool,
    /// Source used when a record does not name one.
    pub default_source: Source,
    /// Corpus name; defaults to the file stem.
    pub name: Option<String>,
}

pub fn load_corpus(
    path: &Path,
    format: CorpusFormat,
    opts: &LoadOptions,
) -> Result<Corpus, CorpusError> {
    if !path.exists() {
        return Err(CorpusError::Missing {
            path: path.to_path_buf(),
        });
    }
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let docs = match format {
        CorpusFormat::Jsonl => {
            let reader = BufReader::new(File::open(path).map_err(io_err)?);
            read_jsonl(reader, opts).map_err(|e| match e {
                ReadError::Io(e) => io_err(e),
                ReadError::Corpus(e) => e,
            })?
        }
        CorpusFormat::Csv => read_csv(path, opts)?,
        CorpusFormat::FlatDir => read_flat_dir(path, opts)?,
    };
    let empty = docs.iter().filter(|d| d.is_empty()).count();
    if empty > 0 {
        log::warn!("{}: {empty} empty document(s) retained", path.display());
    }
    let name = opts.name.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "corpus".to_owned())
    });
    Corpus::new(name, docs)
}

enum ReadError {
    Io(std::io::Error),
    Corpus(CorpusError),
}

impl From<CorpusError> for ReadError {
    fn from(e: CorpusError) -> Self {
        ReadError::Corpus(e)
    }
}

fn value_to_string(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn check_record(
    doc: Document,
    line: usize,
    opts: &LoadOptions,
    seen: &mut std::collections::HashSet<String>,
) -> Result<Document, CorpusError> {
    if !opts.allow_empty && doc.is_empty() {
        return Err(CorpusError::EmptyText { line, id: doc.id });
    }
    if !seen.insert(doc.id.clone()) {
        return Err(CorpusError::DuplicateId { id: doc.id });
    }
    Ok(doc)
}

fn read_jsonl<R: BufRead>(reader: R, opts: &LoadOptions) -> Result<Vec<Document>, ReadError> {
    let mut docs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(ReadError::Io)?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| CorpusError::Malformed {
            line: line_no,
            message,
        };
        let value: Value = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| malformed("expected a JSON object".into()))?;
        let get = |k: &str| obj.get(k).filter(|v| !v.is_null());
        let id = get("id")
            .and_then(value_to_string)
            .ok_or_else(|| malformed("missing field `id`".into()))?;
        let text = match get("text") {
            Some(Value::String(s)) => s.clone(),
            Some(_) => return Err(malformed("field `text` must be a string".into()).into()),
            None => return Err(malformed("missing field `text`".into()).into()),
        };
        let raw_label = get("label")
            .and_then(value_to_string)
            .ok_or_else(|| malformed("missing field `label`".into()))?;
        let label = Label::parse(&raw_label).ok_or_else(|| CorpusError::UnknownLabel {
            line: line_no,
            id: id.clone(),
            label: raw_label.clone(),
        })?;
        let source = get("source")
            .and_then(Value::as_str)
            .map(|s| s.parse().expect("infallible"))
            .unwrap_or(opts.default_source);
        let doc = Document {
            id,
            text,
            label,
            source,
            title: get("title").and_then(value_to_string),
            origin_url: get("origin_url").and_then(value_to_string),
        };
        docs.push(check_record(doc, line_no, opts, &mut seen)?);
    }
    Ok(docs)
}

fn read_csv(path: &Path, opts: &LoadOptions) -> Result<Vec<Document>, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CorpusError::Malformed {
            line: 1,
            message: e.to_string(),
        })?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CorpusError::Malformed {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();
    let col = |names: &[&str]| headers.iter().position(|h| names.contains(&h.as_str()));
    let id_col = col(&["id", "", "unnamed: 0"]);
    let text_col = col(&["text", "content", "body"]).ok_or(CorpusError::Malformed {
        line: 1,
        message: "CSV header has no `text` column".into(),
    })?;
    let label_col = col(&["label", "class"]).ok_or(CorpusError::Malformed {
        line: 1,
        message: "CSV header has no `label` column".into(),
    })?;
    let source_col = col(&["source"]);
    let title_col = col(&["title"]);
    let url_col = col(&["origin_url", "url"]);

    let mut docs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CorpusError::Malformed {
            line: e.position().map_or(i + 2, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(i + 2, |p| p.line() as usize);
        let field = |c: Option<usize>| {
            c.and_then(|c| rec.get(c))
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
        };
        let id = field(id_col).unwrap_or_else(|| format!("row{}", i + 1));
        let raw_label = field(Some(label_col)).unwrap_or_default();
        let label = Label::parse(&raw_label).ok_or_else(|| CorpusError::UnknownLabel {
            line,
            id: id.clone(),
            label: raw_label.clone(),
        })?;
        let doc = Document {
            id,
            text: rec.get(text_col).unwrap_or_default().to_owned(),
            label,
            source: field(source_col)
                .map(|s| s.parse().expect("infallible"))
                .unwrap_or(opts.default_source),
            title: field(title_col),
            origin_url: field(url_col),
        };
        docs.push(check_record(doc, line, opts, &mut seen)?);
    }
    Ok(docs)
}

fn read_flat_dir(root: &Path, opts: &LoadOptions) -> Result<Vec<Document>, CorpusError> {
    let io_err = |path: &Path, source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut subdirs: Vec<(String, Label)> = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| io_err(root, e))? {
        let entry = entry.map_err(|e| io_err(root, e))?;
        if !entry.path().is_dir() {
            continue;
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        match name.to_ascii_lowercase().as_str() {
            "fake" => subdirs.push((name, Label::Fake)),
            "real" => subdirs.push((name, Label::Real)),
            _ => {}
        }
    }
    subdirs.sort();
    let mut docs = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (dir, label) in subdirs {
        let dir_path = root.join(&dir);
        let mut files: Vec<_> = fs::read_dir(&dir_path)
            .map_err(|e| io_err(&dir_path, e))?
            .filter_map(Result::ok)
            .map(|e| e.path())
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        for (i, file) in files.iter().enumerate() {
            let text = fs::read_to_string(file).map_err(|e| io_err(file, e))?;
            let fname = file.file_name().unwrap_or_default().to_string_lossy();
            let doc = Document {
                id: format!("{}/{}", dir.to_ascii_lowercase(), fname),
                text,
                label,
                source: opts.default_source,
                title: None,
                origin_url: None,
            };
            docs.push(check_record(doc, i + 1, opts, &mut seen)?);
        }
    }
    Ok(docs)
}

#[derive(Serialize)]
struct Record<'a> {
    id: &'a str,
    text: &'a str,
    label: Label,
    source: Source,
    #[serde(skip_serializing_if = "Option::is_none")]
    title: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    origin_url: Option<&'a str>,
}

/// Canonical JSONL: one object per line with fields in a fixed order.
pub fn write_jsonl<W: Write>(corpus: &Corpus, mut w: W) -> std::io::Result<()> {
    for d in corpus.documents() {
        let rec = Record {
            id: &d.id,
            text: &d.text,
            label: d.label,
            source: d.source,
            title: d.title.as_deref(),
            origin_url: d.origin_url.as_deref(),
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_jsonl(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    write_jsonl(corpus, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}
