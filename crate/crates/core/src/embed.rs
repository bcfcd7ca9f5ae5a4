//! Skip-gram word embeddings with negative sampling.
//!
//! The exported matrix has one row per vocabulary index; row 0 is the
//! padding row and is always zero.

use std::io::{Read, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::Vocabulary;
use crate::seed;

const MAGIC: &[u8; 8] = b"VTXEMBD\0";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("vocabulary is empty")]
    EmptyVocabulary,
    #[error("corpus has no in-vocabulary bigrams")]
    NoBigrams,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("word {0:?} is not in the vocabulary")]
    OutOfVocabulary(String),
    #[error("embedding file was built for a different vocabulary")]
    VocabularyMismatch,
    #[error("invalid embedding file: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// `(V + 1) × dim` row-major matrix tied to a vocabulary by content hash.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    dim: usize,
    rows: Vec<f64>,
    vocab_hash: [u8; 32],
}

impl EmbeddingMatrix {
    pub fn from_rows(dim: usize, rows: Vec<f64>, vocab: &Vocabulary) -> Result<Self, EmbedError> {
        if dim == 0 || rows.len() != (vocab.len() + 1) * dim {
            return Err(EmbedError::Format(format!(
                "expected {} values, got {}",
                (vocab.len() + 1) * dim,
                rows.len()
            )));
        }
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::Format("non-finite entry".into()));
        }
        let mut m = EmbeddingMatrix {
            dim,
            rows,
            vocab_hash: vocab.content_hash(),
        };
        m.row_mut(0).fill(0.0);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of rows including padding.
    pub fn n_rows(&self) -> usize {
        self.rows.len() / self.dim
    }

    pub fn row(&self, index: u32) -> &[f64] {
        let s = index as usize * self.dim;
        &self.rows[s..s + self.dim]
    }

    fn row_mut(&mut self, index: u32) -> &mut [f64] {
        let s = index as usize * self.dim;
        &mut self.rows[s..s + self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.rows
    }

    pub fn vocab_hash(&self) -> &[u8; 32] {
        &self.vocab_hash
    }

    pub fn matches(&self, vocab: &Vocabulary) -> bool {
        self.vocab_hash == vocab.content_hash() && self.n_rows() == vocab.len() + 1
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&((self.n_rows() - 1) as u64).to_le_bytes())?;
        w.write_all(&(self.dim as u64).to_le_bytes())?;
        w.write_all(&self.vocab_hash)?;
        let mut buf = Vec::with_capacity(self.rows.len() * 8);
        for v in &self.rows {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)
    }

    /// Read a matrix and check it against `vocab`. Nothing is returned
    /// unless the whole file is present and consistent.
    pub fn read_from<R: Read>(mut r: R, vocab: &Vocabulary) -> Result<Self, EmbedError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        let header = 8 + 4 + 8 + 8 + 32;
        if bytes.len() < header {
            return Err(EmbedError::Format("truncated header".into()));
        }
        if &bytes[..8] != MAGIC {
            return Err(EmbedError::Format("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(EmbedError::Format(format!("unsupported version {version}")));
        }
        let v = u64_at(12) as usize;
        let dim = u64_at(20) as usize;
        let mut hash = [0u8; 32];
        hash.copy_from_slice(&bytes[28..60]);
        let expected = (v + 1)
            .checked_mul(dim)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| EmbedError::Format("size overflow".into()))?;
        if bytes.len() - header != expected {
            return Err(EmbedError::Format(format!(
                "expected {expected} data bytes, found {}",
                bytes.len() - header
            )));
        }
        if hash != vocab.content_hash() || v != vocab.len() {
            return Err(EmbedError::VocabularyMismatch);
        }
        let rows: Vec<f64> = bytes[header..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if dim == 0 || rows.iter().any(|x| !x.is_finite()) {
            return Err(EmbedError::Format("invalid matrix contents".into()));
        }
        Ok(EmbeddingMatrix {
            dim,
            rows,
            vocab_hash: hash,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), EmbedError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_to(&mut f)?;
        f.flush()?;
        Ok(())
    }

    pub fn load(path: &Path, vocab: &Vocabulary) -> Result<Self, EmbedError> {
        Self::read_from(std::fs::File::open(path)?, vocab)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Word2VecConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for Word2VecConfig {
    fn default() -> Self {
        Word2VecConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr: 0.025,
            seed: 0,
        }
    }
}

/// Loss and gradients of one (center, context) pair with sampled negatives.
pub mod skipgram {
    fn sigmoid(x: f64) -> f64 {
        if x >= 0.0 {
            1.0 / (1.0 + (-x).exp())
        } else {
            let e = x.exp();
            e / (1.0 + e)
        }
    }

    fn log_sigmoid(x: f64) -> f64 {
        if x >= 0.0 {
            -(-x).exp().ln_1p()
        } else {
            x - x.exp().ln_1p()
        }
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    /// `-log σ(u_o·v) - Σ_k log σ(-u_k·v)`.
    pub fn pair_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
        let mut loss = -log_sigmoid(dot(context, center));
        for n in negatives {
            loss -= log_sigmoid(-dot(n, center));
        }
        loss
    }

    pub struct PairGradients {
        pub center: Vec<f64>,
        pub context: Vec<f64>,
        pub negatives: Vec<Vec<f64>>,
    }

    pub fn pair_gradients(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradients {
        let g_pos = sigmoid(dot(context, center)) - 1.0;
        let mut g_center: Vec<f64> = context.iter().map(|u| g_pos * u).collect();
        let g_context = center.iter().map(|v| g_pos * v).collect();
        let mut g_negs = Vec::with_capacity(negatives.len());
        for n in negatives {
            let g = sigmoid(dot(n, center));
            for (gc, u) in g_center.iter_mut().zip(n.iter()) {
                *gc += g * u;
            }
            g_negs.push(center.iter().map(|v| g * v).collect());
        }
        PairGradients {
            center: g_center,
            context: g_context,
            negatives: g_negs,
        }
    }

    pub(super) fn sgd_step(
        center: &mut [f64],
        outputs: &mut [f64],
        dim: usize,
        targets: &[(usize, f64)],
        lr: f64,
        scratch: &mut [f64],
    ) {
        scratch.fill(0.0);
        for &(row, label) in targets {
            let u = &mut outputs[row * dim..(row + 1) * dim];
            let g = (sigmoid(dot(u, center)) - label) * lr;
            for ((s, ui), vi) in scratch.iter_mut().zip(u.iter_mut()).zip(center.iter()) {
                *s += g * *ui;
                *ui -= g * vi;
            }
        }
        for (v, s) in center.iter_mut().zip(scratch.iter()) {
            *v -= s;
        }
    }
}

/// Train skip-gram embeddings on index sequences (out-of-vocabulary tokens
/// already dropped). Single-threaded and deterministic given the seed.
pub fn train_word2vec(
    sequences: &[Vec<u32>],
    vocab: &Vocabulary,
    cfg: &Word2VecConfig,
) -> Result<EmbeddingMatrix, EmbedError> {
    if cfg.dim == 0 || cfg.window == 0 || cfg.negatives == 0 {
        return Err(EmbedError::InvalidConfig(
            "dim, window and negatives must be at least 1".into(),
        ));
    }
    if !(cfg.lr.is_finite() && cfg.lr >= 0.0) {
        return Err(EmbedError::InvalidConfig(format!("learning rate {}", cfg.lr)));
    }
    if vocab.is_empty() {
        return Err(EmbedError::EmptyVocabulary);
    }
    let v = vocab.len();
    let dim = cfg.dim;
    let mut rng = seed::rng(cfg.seed, &[seed::STREAM_WORD2VEC, seed::STREAM_INIT]);
    let half = 0.5 / dim as f64;
    let mut input: Vec<f64> = (0..(v + 1) * dim)
        .map(|_| rng.random_range(-half..=half))
        .collect();
    input[..dim].fill(0.0);

    let in_vocab = |i: &u32| *i >= 1 && (*i as usize) <= v;
    if !sequences
        .iter()
        .any(|s| s.iter().filter(|i| in_vocab(i)).count() >= 2)
    {
        return Err(EmbedError::NoBigrams);
    }
    if cfg.epochs == 0 {
        return EmbeddingMatrix::from_rows(dim, input, vocab);
    }

    let mut counts = vec![0u64; v + 1];
    for s in sequences {
        for i in s.iter().filter(|i| in_vocab(i)) {
            counts[*i as usize] += 1;
        }
    }
    let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
    let noise = WeightedIndex::new(&weights).expect("at least one word has a count");
    let total_tokens: u64 = counts.iter().sum();
    let total_steps = (total_tokens * cfg.epochs as u64).max(1) as f64;

    let mut output = vec![0.0; (v + 1) * dim];
    let mut scratch = vec![0.0; dim];
    let mut targets: Vec<(usize, f64)> = Vec::with_capacity(cfg.negatives + 1);
    let mut step = 0u64;
    let mut rng = seed::rng(cfg.seed, &[seed::STREAM_WORD2VEC, seed::STREAM_SHUFFLE]);
    for _ in 0..cfg.epochs {
        for seq in sequences {
            let seq: Vec<usize> = seq.iter().filter(|i| in_vocab(i)).map(|&i| i as usize).collect();
            for (pos, &center) in seq.iter().enumerate() {
                let lr = cfg.lr * (1.0 - step as f64 / total_steps).max(1e-4);
                step += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window).min(seq.len() - 1);
                for (ctx_pos, &context) in seq.iter().enumerate().take(hi + 1).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    targets.clear();
                    targets.push((context, 1.0));
                    for _ in 0..cfg.negatives {
                        let n = noise.sample(&mut rng);
                        if n != context {
                            targets.push((n, 0.0));
                        }
                    }
                    let row = &mut input[center * dim..(center + 1) * dim];
                    skipgram::sgd_step(row, &mut output, dim, &targets, lr, &mut scratch);
                }
            }
        }
    }
    EmbeddingMatrix::from_rows(dim, input, vocab)
}

/// Most similar words by cosine similarity, excluding the query and padding.
pub fn nearest_neighbors(
    matrix: &EmbeddingMatrix,
    vocab: &Vocabulary,
    word: &str,
    k: usize,
) -> Result<Vec<(String, f64)>, EmbedError> {
    let q = vocab
        .index_of(word)
        .ok_or_else(|| EmbedError::OutOfVocabulary(word.to_owned()))?;
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let qv = matrix.row(q);
    let qn = norm(qv);
    let mut sims: Vec<(u32, f64)> = (1..matrix.n_rows() as u32)
        .filter(|&i| i != q)
        .map(|i| {
            let r = matrix.row(i);
            let d = norm(r) * qn;
            let s = if d > 0.0 {
                r.iter().zip(qv).map(|(a, b)| a * b).sum::<f64>() / d
            } else {
                0.0
            };
            (i, s)
        })
        .collect();
    sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    sims.truncate(k);
    Ok(sims
        .into_iter()
        .map(|(i, s)| (vocab.word(i).unwrap_or_default().to_owned(), s))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(words: &[&str]) -> Vocabulary {
        Vocabulary::from_words(words.iter().map(|s| s.to_string()).collect()).unwrap()
    }

    fn cfg(dim: usize, epochs: usize) -> Word2VecConfig {
        Word2VecConfig {
            dim,
            window: 2,
            negatives: 3,
            epochs,
            lr: 0.05,
            seed: 11,
        }
    }

    #[test]
    fn zero_epochs_is_initialization() {
        let v = vocab(&["a", "b", "c"]);
        let seqs = vec![vec![1, 2, 3, 1]];
        let m = train_word2vec(&seqs, &v, &cfg(8, 0)).unwrap();
        assert!(m.row(0).iter().all(|&x| x == 0.0));
        let bound = 0.5 / 8.0;
        assert!(m.as_slice()[8..].iter().all(|x| x.abs() <= bound));
        assert!(m.as_slice()[8..].iter().any(|&x| x != 0.0));
        assert_eq!(m, train_word2vec(&seqs, &v, &cfg(8, 0)).unwrap());
    }

    #[test]
    fn deterministic_and_padding_zero() {
        let v = vocab(&["a", "b", "c", "d"]);
        let seqs = vec![vec![1, 2, 3, 4, 1, 2], vec![4, 3, 0, 2]];
        let a = train_word2vec(&seqs, &v, &cfg(6, 3)).unwrap();
        let b = train_word2vec(&seqs, &v, &cfg(6, 3)).unwrap();
        assert_eq!(a, b);
        assert!(a.row(0).iter().all(|&x| x == 0.0));
        assert!(a.as_slice().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn errors() {
        let v = vocab(&["a"]);
        assert!(matches!(
            train_word2vec(&[vec![1]], &v, &cfg(4, 1)),
            Err(EmbedError::NoBigrams)
        ));
        let empty = Vocabulary::from_words(vec![]).unwrap();
        assert!(matches!(
            train_word2vec(&[vec![]], &empty, &cfg(4, 1)),
            Err(EmbedError::EmptyVocabulary)
        ));
        let mut bad = cfg(4, 1);
        bad.window = 0;
        assert!(matches!(
            train_word2vec(&[vec![1, 1]], &v, &bad),
            Err(EmbedError::InvalidConfig(_))
        ));
    }

    #[test]
    fn alternating_pair_are_neighbors() {
        // "a b a b ..." plus an unrelated "c d c d ..." stream
        let v = vocab(&["a", "b", "c", "d"]);
        let ab: Vec<u32> = (0..200).map(|i| 1 + (i % 2)).collect();
        let cd: Vec<u32> = (0..200).map(|i| 3 + (i % 2)).collect();
        let mut c = cfg(10, 10);
        c.window = 1;
        c.negatives = 2;
        let m = train_word2vec(&[ab, cd], &v, &c).unwrap();
        let nn = nearest_neighbors(&m, &v, "a", 1).unwrap();
        assert_eq!(nn[0].0, "b");
    }

    #[test]
    fn neighbor_query_edges() {
        let v = vocab(&["a", "b", "c"]);
        let rows = vec![0.0, 0.0, 1.0, 2.0, 1.0, 2.0, -1.0, 0.5];
        let m = EmbeddingMatrix::from_rows(2, rows, &v).unwrap();
        assert!(nearest_neighbors(&m, &v, "a", 0).unwrap().is_empty());
        let nn = nearest_neighbors(&m, &v, "a", 10).unwrap();
        assert_eq!(nn.len(), 2);
        assert_eq!(nn[0].0, "b");
        assert!((nn[0].1 - 1.0).abs() < 1e-12);
        assert!(matches!(
            nearest_neighbors(&m, &v, "zzz", 1),
            Err(EmbedError::OutOfVocabulary(_))
        ));
    }

    #[test]
    fn file_round_trip_and_checks() {
        let v = vocab(&["a", "b", "c"]);
        let m = train_word2vec(&[vec![1, 2, 3, 2, 1]], &v, &cfg(5, 2)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.bin");
        m.save(&p).unwrap();
        let back = EmbeddingMatrix::load(&p, &v).unwrap();
        assert_eq!(back, m);
        let bits = |m: &EmbeddingMatrix| m.as_slice().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&m));

        let other = vocab(&["a", "b", "d"]);
        assert!(matches!(
            EmbeddingMatrix::load(&p, &other),
            Err(EmbedError::VocabularyMismatch)
        ));
        let bytes = std::fs::read(&p).unwrap();
        std::fs::write(&p, &bytes[..bytes.len() - 3]).unwrap();
        assert!(matches!(EmbeddingMatrix::load(&p, &v), Err(EmbedError::Format(_))));
        std::fs::write(&p, &bytes[..20]).unwrap();
        assert!(matches!(EmbeddingMatrix::load(&p, &v), Err(EmbedError::Format(_))));
    }

    #[test]
    fn pair_loss_decreases_with_small_steps() {
        let dim = 4;
        let mut center = vec![0.1, -0.2, 0.05, 0.3];
        let mut outputs = vec![0.0; 4 * dim];
        for (i, x) in outputs.iter_mut().enumerate() {
            *x = ((i * 7 % 11) as f64 - 5.0) / 20.0;
        }
        let targets = [(1usize, 1.0), (2, 0.0), (3, 0.0)];
        let loss = |c: &[f64], o: &[f64]| {
            skipgram::pair_loss(c, &o[dim..2 * dim], &[&o[2 * dim..3 * dim], &o[3 * dim..]])
        };
        let mut scratch = vec![0.0; dim];
        let mut prev = loss(&center, &outputs);
        for _ in 0..50 {
            skipgram::sgd_step(&mut center, &mut outputs, dim, &targets, 0.01, &mut scratch);
            let l = loss(&center, &outputs);
            assert!(l < prev);
            prev = l;
        }
    }

    #[test]
    fn pair_gradient_matches_finite_differences() {
        let center = vec![0.3, -0.1, 0.25, 0.05, -0.4];
        let context = vec![-0.2, 0.15, 0.1, -0.3, 0.2];
        let negs = [vec![0.05, 0.2, -0.3, 0.1, 0.0], vec![-0.1, -0.25, 0.3, 0.2, 0.15]];
        let loss = |c: &[f64], o: &[f64], n0: &[f64], n1: &[f64]| skipgram::pair_loss(c, o, &[n0, n1]);
        let g = skipgram::pair_gradients(&center, &context, &[&negs[0], &negs[1]]);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        let mut check = |analytic: f64, plus: f64, minus: f64| {
            let numeric = (plus - minus) / (2.0 * h);
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        };
        for i in 0..5 {
            let (mut p, mut m) = (center.clone(), center.clone());
            p[i] += h;
            m[i] -= h;
            check(g.center[i], loss(&p, &context, &negs[0], &negs[1]), loss(&m, &context, &negs[0], &negs[1]));
            let (mut p, mut m) = (context.clone(), context.clone());
            p[i] += h;
            m[i] -= h;
            check(g.context[i], loss(&center, &p, &negs[0], &negs[1]), loss(&center, &m, &negs[0], &negs[1]));
            let (mut p, mut m) = (negs[1].clone(), negs[1].clone());
            p[i] += h;
            m[i] -= h;
            check(g.negatives[1][i], loss(&center, &context, &negs[0], &p), loss(&center, &context, &negs[0], &m));
        }
        assert!(worst < 1e-4, "max relative error {worst}");
    }
}
