use std::collections::HashMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{PreprocessError, Tokenizer};
use crate::corpus::Corpus;
use crate::hashing;

/// Frequency-ordered word index. Index 0 is reserved for padding, words
/// occupy `1..=len()`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Build from token lists: descending frequency, ties lexicographic.
    pub fn from_token_lists<'a, I>(
        lists: I,
        max_size: Option<usize>,
        min_count: usize,
    ) -> Result<Self, PreprocessError>
    where
        I: IntoIterator<Item = &'a [String]>,
    {
        if min_count == 0 {
            return Err(PreprocessError::InvalidMinCount);
        }
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut n_lists = 0usize;
        for list in lists {
            n_lists += 1;
            for tok in list {
                *counts.entry(tok.as_str()).or_default() += 1;
            }
        }
        if n_lists == 0 {
            return Err(PreprocessError::EmptyCorpus);
        }
        let mut ranked: Vec<(&str, usize)> =
            counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if let Some(max) = max_size {
            ranked.truncate(max);
        }
        Self::from_words(ranked.into_iter().map(|(w, _)| w.to_owned()).collect())
    }

    /// Words in index order (position 0 gets index 1).
    pub fn from_words(words: Vec<String>) -> Result<Self, PreprocessError> {
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if w.is_empty() {
                return Err(PreprocessError::InvalidVocabulary("empty word".into()));
            }
            if index.insert(w.clone(), i as u32 + 1).is_some() {
                return Err(PreprocessError::InvalidVocabulary(format!(
                    "duplicate word {w:?}"
                )));
            }
        }
        Ok(Vocabulary { words, index })
    }

    /// Number of words, excluding padding.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Word at a 1-based index; `None` for padding or out of range.
    pub fn word(&self, index: u32) -> Option<&str> {
        if index == 0 {
            return None;
        }
        self.words.get(index as usize - 1).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn content_hash(&self) -> [u8; 32] {
        hashing::sha256(&serde_json::to_vec(&self.words).expect("string list serializes"))
    }

    pub fn content_hash_hex(&self) -> String {
        hex::encode(self.content_hash())
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<(), PreprocessError> {
        serde_json::to_writer(w, &self.words)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self, PreprocessError> {
        let words: Vec<String> = serde_json::from_reader(r)?;
        Self::from_words(words)
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = PreprocessError;
    fn try_from(words: Vec<String>) -> Result<Self, Self::Error> {
        Self::from_words(words)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.words
    }
}

/// Build a vocabulary from a (training) corpus using `tokenizer`.
pub fn build_vocabulary(
    corpus: &Corpus,
    tokenizer: &Tokenizer,
    max_size: Option<usize>,
    min_count: usize,
) -> Result<Vocabulary, PreprocessError> {
    if corpus.is_empty() {
        return Err(PreprocessError::EmptyCorpus);
    }
    let lists: Vec<Vec<String>> = corpus
        .documents()
        .iter()
        .map(|d| tokenizer.tokens(&d.text))
        .collect();
    Vocabulary::from_token_lists(lists.iter().map(Vec::as_slice), max_size, min_count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::tokenize;

    fn vocab(text: &str, min_count: usize) -> Vocabulary {
        let toks = tokenize(text);
        Vocabulary::from_token_lists([toks.as_slice()], None, min_count).unwrap()
    }

    #[test]
    fn frequency_order() {
        let v = vocab("a a b", 1);
        assert_eq!(v.index_of("a"), Some(1));
        assert_eq!(v.index_of("b"), Some(2));
        assert_eq!(v.word(2), Some("b"));
        assert_eq!(v.word(0), None);
    }

    #[test]
    fn min_count_and_ties() {
        let v = vocab("a a b", 2);
        assert_eq!(v.len(), 1);
        assert_eq!(v.index_of("b"), None);
        let t = vocab("y y x x", 1);
        assert_eq!(t.index_of("x"), Some(1));
        assert_eq!(t.index_of("y"), Some(2));
    }

    #[test]
    fn max_size_truncates_tail() {
        let toks = tokenize("c c c b b a");
        let v = Vocabulary::from_token_lists([toks.as_slice()], Some(2), 1).unwrap();
        assert_eq!(v.words(), &["c".to_string(), "b".to_string()]);
    }

    #[test]
    fn errors() {
        let none: Vec<&[String]> = vec![];
        assert!(matches!(
            Vocabulary::from_token_lists(none, None, 1),
            Err(PreprocessError::EmptyCorpus)
        ));
        let toks = tokenize("a");
        assert!(matches!(
            Vocabulary::from_token_lists([toks.as_slice()], None, 0),
            Err(PreprocessError::InvalidMinCount)
        ));
        assert!(Vocabulary::from_words(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn json_is_index_ordered_array() {
        let v = vocab("a a b", 1);
        let mut buf = Vec::new();
        v.write_json(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), r#"["a","b"]"#);
        let back = Vocabulary::read_json(buf.as_slice()).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.content_hash(), v.content_hash());
    }

    #[test]
    fn indices_are_contiguous_inverses() {
        let v = vocab("the quick brown fox jumps over the lazy dog the end", 1);
        for i in 1..=v.len() as u32 {
            assert_eq!(v.index_of(v.word(i).unwrap()), Some(i));
        }
    }
}
