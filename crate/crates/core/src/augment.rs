//! Synonym-substitution augmentation for training corpora.
//!
//! Substitution works on maximal runs of alphanumeric characters in the raw
//! text, so punctuation and layout survive untouched and the cleaned token
//! count of every document is preserved.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;
use std::sync::OnceLock;

use rand::Rng;
use thiserror::Error;

use crate::corpus::{Corpus, Document, SplitRole};
use crate::par::{self, Execution};
use crate::preprocess::clean_text;
use crate::seed;

const BUNDLED: &str = include_str!("../data/synonyms.tsv");

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("line {line}: malformed lexicon entry: {message}")]
    Malformed { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("refusing to augment corpus {0:?}: it is a test split")]
    TestSplit(String),
    #[error("replace probability must be in [0, 1], got {0}")]
    InvalidProbability(f64),
}

/// Word to single-word synonyms. No entry is empty and no word lists itself.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymLexicon {
    synonyms: BTreeMap<String, Vec<String>>,
}

impl SynonymLexicon {
    /// The bundled lexicon extracted from WordNet 3.0.
    pub fn bundled() -> Self {
        static CACHE: OnceLock<SynonymLexicon> = OnceLock::new();
        CACHE
            .get_or_init(|| Self::parse(BUNDLED.as_bytes()).expect("bundled lexicon is well formed"))
            .clone()
    }

    /// Parse `word<TAB>syn1,syn2,...` lines. Blank lines and `#` comments are
    /// skipped. Entries are lowercased; self-synonyms and synonyms that do not
    /// clean to exactly one token are dropped.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self, AugmentError> {
        let mut synonyms: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| AugmentError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let (word, syns) = line.split_once('\t').ok_or_else(|| AugmentError::Malformed {
                line: line_no,
                message: "expected `word<TAB>synonyms`".into(),
            })?;
            let word = word.trim().to_lowercase();
            if word.is_empty() || clean_text(&word) != word || word.contains(' ') {
                return Err(AugmentError::Malformed {
                    line: line_no,
                    message: format!("headword {word:?} is not a single token"),
                });
            }
            let entry = synonyms.entry(word.clone()).or_default();
            for s in syns.split(',') {
                let s = s.trim().to_lowercase();
                if s.is_empty() || s == word || clean_text(&s) != s || s.contains(' ') {
                    continue;
                }
                if !entry.contains(&s) {
                    entry.push(s);
                }
            }
        }
        synonyms.retain(|_, v| !v.is_empty());
        Ok(SynonymLexicon { synonyms })
    }

    pub fn load(path: &Path) -> Result<Self, AugmentError> {
        let f = std::fs::File::open(path).map_err(|source| AugmentError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(std::io::BufReader::new(f))
    }

    pub fn get(&self, word: &str) -> Option<&[String]> {
        self.synonyms.get(word).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.synonyms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synonyms.is_empty()
    }
}

pub fn load_lexicon(path: &Path) -> Result<SynonymLexicon, AugmentError> {
    SynonymLexicon::load(path)
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AugmentConfig {
    pub copies_per_doc: usize,
    pub replace_prob: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            copies_per_doc: 1,
            replace_prob: 0.2,
        }
    }
}

fn replace_words(text: &str, lexicon: &SynonymLexicon, p: f64, rng: &mut impl Rng) -> String {
    let mut out = String::with_capacity(text.len());
    let mut word_start: Option<usize> = None;
    let flush = |out: &mut String, word: &str, rng: &mut _| {
        let lower = word.to_lowercase();
        match lexicon.get(&lower) {
            Some(syns) if Rng::random::<f64>(rng) < p => {
                let pick = Rng::random_range(rng, 0..syns.len());
                out.push_str(&syns[pick]);
            }
            _ => out.push_str(word),
        }
    };
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            word_start.get_or_insert(i);
        } else {
            if let Some(s) = word_start.take() {
                flush(&mut out, &text[s..i], rng);
            }
            out.push(c);
        }
    }
    if let Some(s) = word_start {
        flush(&mut out, &text[s..], rng);
    }
    out
}

/// Replace each lexicon word independently with probability `replace_prob`
/// by a uniformly chosen synonym. The copy gets id `<parent>#aug<copy>`.
pub fn augment_document(
    doc: &Document,
    lexicon: &SynonymLexicon,
    replace_prob: f64,
    rng_seed: u64,
) -> Document {
    augment_copy(doc, lexicon, replace_prob, rng_seed, 1)
}

fn augment_copy(
    doc: &Document,
    lexicon: &SynonymLexicon,
    replace_prob: f64,
    global_seed: u64,
    copy: usize,
) -> Document {
    let copy_label = copy.to_string();
    let mut rng = seed::rng(
        global_seed,
        &[seed::STREAM_AUGMENT, doc.id.as_str(), copy_label.as_str()],
    );
    Document {
        id: format!("{}#aug{copy}", doc.id),
        text: replace_words(&doc.text, lexicon, replace_prob, &mut rng),
        ..doc.clone()
    }
}

/// Originals followed by `copies_per_doc` augmented copies of each, in
/// document order. Each copy draws from its own stream keyed by document id,
/// so the result does not depend on scheduling.
pub fn augment_corpus(
    train: &Corpus,
    lexicon: &SynonymLexicon,
    copies_per_doc: usize,
    replace_prob: f64,
    seed: u64,
) -> Result<Corpus, AugmentError> {
    augment_corpus_with(train, lexicon, copies_per_doc, replace_prob, seed, Execution::default())
}

pub fn augment_corpus_with(
    train: &Corpus,
    lexicon: &SynonymLexicon,
    copies_per_doc: usize,
    replace_prob: f64,
    seed: u64,
    exec: Execution,
) -> Result<Corpus, AugmentError> {
    if train.role() == SplitRole::Test {
        return Err(AugmentError::TestSplit(train.name().to_owned()));
    }
    if !(0.0..=1.0).contains(&replace_prob) {
        return Err(AugmentError::InvalidProbability(replace_prob));
    }
    let groups = par::map(exec, train.documents(), |d| {
        let mut out = Vec::with_capacity(copies_per_doc + 1);
        out.push(d.clone());
        for k in 1..=copies_per_doc {
            out.push(augment_copy(d, lexicon, replace_prob, seed, k));
        }
        out
    });
    let docs: Vec<Document> = groups.into_iter().flatten().collect();
    let corpus = Corpus::new(format!("{}+aug{copies_per_doc}", train.name()), docs)
        .map_err(|e| AugmentError::Malformed {
            line: 0,
            message: e.to_string(),
        })?;
    Ok(corpus.with_role(train.role()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;
    use crate::preprocess::tokenize;
    use proptest::prelude::*;

    fn lex(s: &str) -> SynonymLexicon {
        SynonymLexicon::parse(s.as_bytes()).unwrap()
    }

    #[test]
    fn lexicon_parsing() {
        let l = lex("good\tfine,great\n");
        assert_eq!(l.get("good").unwrap(), &["fine".to_string(), "great".to_string()]);
        assert!(lex("good\tgood\n").is_empty());
        assert!(lex("").is_empty());
        // uppercase folded, multi-word and hyphenated synonyms dropped
        let l = lex("# c\nBig\tLarge, very large,well-sized,huge\n");
        assert_eq!(l.get("big").unwrap(), &["large".to_string(), "huge".to_string()]);
        assert!(matches!(
            SynonymLexicon::parse("ok\tfine\nbroken line\n".as_bytes()),
            Err(AugmentError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn bundled_lexicon_loads() {
        let l = SynonymLexicon::bundled();
        assert!(l.len() > 10_000);
        assert!(l.get("good").is_some());
    }

    #[test]
    fn zero_probability_is_identity() {
        let d = Document::new("a", "Good day, good sir!", Label::Fake);
        let out = augment_document(&d, &lex("good\tfine\n"), 0.0, 3);
        assert_eq!(out.text, d.text);
        assert_eq!(out.id, "a#aug1");
    }

    #[test]
    fn certain_replacement() {
        let d = Document::new("a", "good day", Label::Real);
        let out = augment_document(&d, &lex("good\tfine\n"), 1.0, 42);
        assert_eq!(out.text, "fine day");
        assert_eq!(out.label, Label::Real);
        let d = Document::new("b", "big red dog", Label::Fake);
        let out = augment_document(&d, &lex("big\thuge\nred\tcrimson\ndog\thound\n"), 1.0, 1);
        assert_eq!(out.text, "huge crimson hound");
    }

    #[test]
    fn deterministic_by_seed() {
        let l = SynonymLexicon::bundled();
        let d = Document::new("x", "The good people say the deep pain is real.", Label::Fake);
        assert_eq!(augment_document(&d, &l, 0.5, 7), augment_document(&d, &l, 0.5, 7));
    }

    fn small_corpus() -> Corpus {
        Corpus::new(
            "c",
            (0..100)
                .map(|i| {
                    let label = if i % 3 == 0 { Label::Fake } else { Label::Real };
                    Document::new(format!("d{i}"), "good people say deep pain", label)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn corpus_sizes_and_ratio() {
        let c = small_corpus();
        let l = SynonymLexicon::bundled();
        let same = augment_corpus(&c, &l, 0, 0.5, 1).unwrap();
        assert_eq!(same.documents(), c.documents());
        let out = augment_corpus(&c, &l, 2, 0.5, 1).unwrap();
        assert_eq!(out.len(), 300);
        assert_eq!(out.count(Label::Fake), 3 * c.count(Label::Fake));
        assert_eq!(out.count(Label::Real), 3 * c.count(Label::Real));
    }

    #[test]
    fn refuses_test_split() {
        let c = small_corpus().with_role(SplitRole::Test);
        assert!(matches!(
            augment_corpus(&c, &SynonymLexicon::bundled(), 1, 0.2, 0),
            Err(AugmentError::TestSplit(_))
        ));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let c = small_corpus();
        let l = SynonymLexicon::bundled();
        let a = augment_corpus_with(&c, &l, 2, 0.5, 9, Execution::Sequential).unwrap();
        let b = augment_corpus_with(&c, &l, 2, 0.5, 9, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn verbatim_copies_without_lexicon() {
        let c = small_corpus();
        let out = augment_corpus(&c, &SynonymLexicon::default(), 2, 1.0, 3).unwrap();
        for chunk in out.documents().chunks(3) {
            assert!(chunk.iter().all(|d| d.text == chunk[0].text));
        }
    }

    proptest! {
        #[test]
        fn token_counts_preserved(text in "[A-Za-z ,.!]{0,80}", p in 0.0f64..=1.0, s in any::<u64>()) {
            static LEX: OnceLock<SynonymLexicon> = OnceLock::new();
            let l = LEX.get_or_init(SynonymLexicon::bundled);
            let d = Document::new("p", text.clone(), Label::Fake);
            let out = augment_document(&d, l, p, s);
            prop_assert_eq!(tokenize(&clean_text(&out.text)).len(), tokenize(&clean_text(&text)).len());
        }
    }
}
