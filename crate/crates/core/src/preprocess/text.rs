use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use super::stopwords::StopWords;

/// Lowercase, replace every character that is not a letter, digit or
/// whitespace with a space, collapse whitespace runs and trim.
///
/// Input is NFC-normalized first; letters from any script are kept.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.nfc().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            pending_space = true;
        }
    }
    // lowercasing can emit decomposed sequences; renormalize so the output is stable
    if out.is_ascii() {
        out
    } else {
        let renormalized: String = out.nfc().collect();
        if renormalized == out {
            out
        } else {
            clean_text(&renormalized)
        }
    }
}

/// Split cleaned text on whitespace.
pub fn tokenize(cleaned: &str) -> Vec<String> {
    cleaned.split_whitespace().map(str::to_owned).collect()
}

/// Raw text to token list, with optional stopword filtering.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Tokenizer {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopwords: Option<StopWords>,
}

impl Tokenizer {
    pub fn plain() -> Self {
        Tokenizer { stopwords: None }
    }

    pub fn with_stopwords(stopwords: StopWords) -> Self {
        Tokenizer {
            stopwords: Some(stopwords),
        }
    }

    pub fn tokens(&self, raw: &str) -> Vec<String> {
        let tokens = tokenize(&clean_text(raw));
        match &self.stopwords {
            Some(sw) => super::remove_stopwords(tokens, sw),
            None => tokens,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cleaning_examples() {
        assert_eq!(clean_text("Hello, World!"), "hello world");
        assert_eq!(clean_text(""), "");
        assert_eq!(clean_text("R1,000-worth"), "r1 000 worth");
        assert_eq!(clean_text("  \t Ümlaut\nÇA va?  "), "ümlaut ça va");
        assert_eq!(clean_text("Привет, МИР"), "привет мир");
    }

    #[test]
    fn nfc_composition() {
        // "e" + combining acute composes to a single letter
        assert_eq!(clean_text("Cafe\u{301}"), "caf\u{e9}");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("hello world"), vec!["hello", "world"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a  b\tc"), vec!["a", "b", "c"]);
    }

    proptest! {
        #[test]
        fn clean_is_idempotent(s in "\\PC{0,40}") {
            let once = clean_text(&s);
            prop_assert_eq!(clean_text(&once), once);
        }

        #[test]
        fn clean_output_has_no_empty_tokens(s in "\\PC{0,40}") {
            let cleaned = clean_text(&s);
            prop_assert!(!cleaned.starts_with(' ') && !cleaned.ends_with(' '));
            prop_assert!(!cleaned.contains("  "));
        }
    }
}
