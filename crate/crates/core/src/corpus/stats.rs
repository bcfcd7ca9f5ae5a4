use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Corpus, Label};
use crate::par::{self, Execution};
use crate::preprocess::{clean_text, tokenize, StopWords};

/// Per-corpus summary statistics. Lengths are whitespace tokens of the
/// cleaned text, before stopword removal. JSON keys follow the row names
/// of the summary table.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    #[serde(rename = "Article Count")]
    pub article_count: usize,
    #[serde(rename = "Mean Article Length")]
    pub mean_len: f64,
    #[serde(rename = "Min Article Length")]
    pub min_len: usize,
    #[serde(rename = "Max Article Length")]
    pub max_len: usize,
    #[serde(rename = "Articles Above Mean")]
    pub above_mean: usize,
    #[serde(rename = "Articles Above 500")]
    pub above_500: usize,
    /// Per-article unique token counts summed over articles.
    #[serde(rename = "Unique Tokens")]
    pub unique_tokens_total: usize,
    #[serde(rename = "Unique Tokens Per Article Mean")]
    pub unique_per_article_mean: f64,
    #[serde(rename = "Unique Tokens Per Article Min")]
    pub unique_per_article_min: usize,
    #[serde(rename = "Unique Tokens Per Article Max")]
    pub unique_per_article_max: usize,
}

impl CorpusStats {
    /// Row label and formatted value, in table order.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("Article Count", self.article_count.to_string()),
            ("Mean Article Length", format!("{:.2}", self.mean_len)),
            ("Min Article Length", self.min_len.to_string()),
            ("Max Article Length", self.max_len.to_string()),
            ("Articles Above Mean", self.above_mean.to_string()),
            ("Articles Above 500", self.above_500.to_string()),
            ("Unique Tokens", self.unique_tokens_total.to_string()),
            (
                "Unique Tokens Per Article Mean",
                format!("{:.2}", self.unique_per_article_mean),
            ),
            ("Unique Tokens Per Article Min", self.unique_per_article_min.to_string()),
            ("Unique Tokens Per Article Max", self.unique_per_article_max.to_string()),
        ]
    }

    fn from_measurements(m: &[(usize, usize)]) -> Self {
        if m.is_empty() {
            return CorpusStats::default();
        }
        let n = m.len();
        let total: usize = m.iter().map(|x| x.0).sum();
        let mean_len = total as f64 / n as f64;
        let unique_total: usize = m.iter().map(|x| x.1).sum();
        CorpusStats {
            article_count: n,
            mean_len,
            min_len: m.iter().map(|x| x.0).min().unwrap_or(0),
            max_len: m.iter().map(|x| x.0).max().unwrap_or(0),
            above_mean: m.iter().filter(|x| x.0 as f64 > mean_len).count(),
            above_500: m.iter().filter(|x| x.0 > 500).count(),
            unique_tokens_total: unique_total,
            unique_per_article_mean: unique_total as f64 / n as f64,
            unique_per_article_min: m.iter().map(|x| x.1).min().unwrap_or(0),
            unique_per_article_max: m.iter().map(|x| x.1).max().unwrap_or(0),
        }
    }
}

fn measure(text: &str) -> (usize, usize) {
    let cleaned = clean_text(text);
    let tokens: Vec<&str> = cleaned.split_whitespace().collect();
    let unique: HashSet<&str> = tokens.iter().copied().collect();
    (tokens.len(), unique.len())
}

pub fn summarize(corpus: &Corpus) -> CorpusStats {
    let m = par::map(Execution::default(), corpus.documents(), |d| measure(&d.text));
    CorpusStats::from_measurements(&m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub fake: CorpusStats,
    pub real: CorpusStats,
}

pub fn summarize_by_class(corpus: &Corpus) -> ClassStats {
    let m = par::map(Execution::default(), corpus.documents(), |d| {
        (d.label, measure(&d.text))
    });
    let pick = |label: Label| -> Vec<(usize, usize)> {
        m.iter().filter(|x| x.0 == label).map(|x| x.1).collect()
    };
    ClassStats {
        fake: CorpusStats::from_measurements(&pick(Label::Fake)),
        real: CorpusStats::from_measurements(&pick(Label::Real)),
    }
}

/// Most frequent cleaned, stopword-filtered tokens; ties broken
/// lexicographically.
pub fn top_words(corpus: &Corpus, n: usize, stopwords: &StopWords) -> Vec<(String, usize)> {
    let mut counts: HashMap<String, usize> = HashMap::new();
    for d in corpus.documents() {
        for tok in tokenize(&clean_text(&d.text)) {
            if !stopwords.contains(&tok) {
                *counts.entry(tok).or_default() += 1;
            }
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use proptest::prelude::*;

    fn corpus(texts: &[&str]) -> Corpus {
        Corpus::new(
            "t",
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document::new(i.to_string(), *t, Label::Fake))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_document() {
        let s = summarize(&corpus(&["one, two three!"]));
        assert_eq!(s.article_count, 1);
        assert_eq!((s.mean_len, s.min_len, s.max_len), (3.0, 3, 3));
        assert_eq!(s.above_500, 0);
        assert_eq!(s.above_mean, 0);
    }

    #[test]
    fn above_mean_and_500() {
        let a = vec!["w"; 400].join(" ");
        let b = vec!["w"; 600].join(" ");
        let s = summarize(&corpus(&[&a, &b]));
        assert_eq!(s.mean_len, 500.0);
        assert_eq!((s.above_mean, s.above_500), (1, 1));
        assert_eq!(s.unique_tokens_total, 2);
        // exactly 500 is not above 500
        let c = vec!["w"; 500].join(" ");
        assert_eq!(summarize(&corpus(&[&c])).above_500, 0);
    }

    #[test]
    fn empty_corpus_zeroed() {
        assert_eq!(summarize(&corpus(&[])), CorpusStats::default());
    }

    #[test]
    fn unique_counts() {
        let s = summarize(&corpus(&["a a b", "c", ""]));
        assert_eq!(s.unique_tokens_total, 3);
        assert_eq!(s.unique_per_article_min, 0);
        assert_eq!(s.unique_per_article_max, 2);
        assert_eq!(s.min_len, 0);
    }

    #[test]
    fn per_class_split() {
        let c = Corpus::new(
            "t",
            vec![
                Document::new("1", "a b", Label::Fake),
                Document::new("2", "a b c d", Label::Real),
            ],
        )
        .unwrap();
        let s = summarize_by_class(&c);
        assert_eq!(s.fake.mean_len, 2.0);
        assert_eq!(s.real.mean_len, 4.0);
    }

    #[test]
    fn top_words_examples() {
        let c = corpus(&["a a b"]);
        assert_eq!(
            top_words(&c, 10, &StopWords::default()),
            vec![("a".to_string(), 2), ("b".to_string(), 1)]
        );
        let sw: StopWords = ["a"].into_iter().collect();
        assert_eq!(top_words(&c, 10, &sw), vec![("b".to_string(), 1)]);
    }

    proptest! {
        #[test]
        fn summarize_is_order_invariant(texts in prop::collection::vec("[a-d ,.]{0,30}", 0..12), rot in 0usize..12) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let mut rotated = refs.clone();
            if !rotated.is_empty() { let k = rot % rotated.len(); rotated.rotate_left(k); }
            let a = summarize(&corpus(&refs));
            let b = summarize(&corpus(&rotated));
            prop_assert_eq!(a.article_count, b.article_count);
            prop_assert_eq!((a.min_len, a.max_len, a.above_mean, a.above_500), (b.min_len, b.max_len, b.above_mean, b.above_500));
            prop_assert!((a.mean_len - b.mean_len).abs() < 1e-12);
            prop_assert!(a.min_len as f64 <= a.mean_len + 1e-12 && a.mean_len <= a.max_len as f64 + 1e-12);
        }

        #[test]
        fn top_words_prefix(texts in prop::collection::vec("[a-f ]{0,40}", 1..8), n in 1usize..8) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let c = corpus(&refs);
            let small = top_words(&c, n, &StopWords::default());
            let big = top_words(&c, n + 1, &StopWords::default());
            prop_assert_eq!(&big[..small.len()], &small[..]);
            prop_assert!(small.windows(2).all(|w| w[0].1 >= w[1].1));
        }
    }
}
