use serde::{Deserialize, Serialize};

use super::Vocabulary;

pub const DEFAULT_MAX_LEN: usize = 500;

/// Fixed-length index sequence, zero-padded at the tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub indices: Vec<u32>,
    pub true_length: usize,
}

impl TokenSequence {
    pub fn max_len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_all_padding(&self) -> bool {
        self.true_length == 0
    }
}

/// Encode tokens as vocabulary indices. Out-of-vocabulary tokens are dropped,
/// the first `max_len` survivors kept, and the rest padded with zeros.
pub fn encode_sequence(tokens: &[String], vocab: &Vocabulary, max_len: usize) -> TokenSequence {
    encode_with_positions(tokens, vocab, max_len).0
}

/// Like [`encode_sequence`], also returning for each kept slot the position of
/// its token in `tokens`.
pub fn encode_with_positions(
    tokens: &[String],
    vocab: &Vocabulary,
    max_len: usize,
) -> (TokenSequence, Vec<usize>) {
    let mut indices = Vec::with_capacity(max_len);
    let mut positions = Vec::new();
    for (pos, tok) in tokens.iter().enumerate() {
        if indices.len() == max_len {
            break;
        }
        if let Some(ix) = vocab.index_of(tok) {
            indices.push(ix);
            positions.push(pos);
        }
    }
    let true_length = indices.len();
    indices.resize(max_len, 0);
    (
        TokenSequence {
            indices,
            true_length,
        },
        positions,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vocab() -> Vocabulary {
        Vocabulary::from_words(vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    fn toks(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn pads_at_tail() {
        let s = encode_sequence(&toks(&["a", "b", "c"]), &vocab(), DEFAULT_MAX_LEN);
        assert_eq!(s.indices.len(), 500);
        assert_eq!(&s.indices[..3], &[1, 2, 3]);
        assert!(s.indices[3..].iter().all(|&i| i == 0));
        assert_eq!(s.true_length, 3);
    }

    #[test]
    fn truncates_to_first_max_len() {
        let long: Vec<String> = (0..600).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
        let s = encode_sequence(&long, &vocab(), 500);
        assert_eq!(s.true_length, 500);
        assert_eq!(s.indices[499], [1, 2, 3][499 % 3]);
    }

    #[test]
    fn oov_dropped() {
        let (s, pos) = encode_with_positions(&toks(&["x", "a", "y", "c"]), &vocab(), 4);
        assert_eq!(s.indices, vec![1, 3, 0, 0]);
        assert_eq!(pos, vec![1, 3]);
        let s = encode_sequence(&toks(&["x", "y"]), &vocab(), 500);
        assert!(s.is_all_padding());
        assert!(s.indices.iter().all(|&i| i == 0));
    }

    proptest! {
        #[test]
        fn length_always_max_len(words in prop::collection::vec("[abcxyz]", 0..80), max_len in 1usize..60) {
            let s = encode_sequence(&words, &vocab(), max_len);
            prop_assert_eq!(s.indices.len(), max_len);
            prop_assert!(s.indices[s.true_length..].iter().all(|&i| i == 0));
            prop_assert!(s.indices[..s.true_length].iter().all(|&i| i >= 1 && i <= 3));
        }
    }
}
