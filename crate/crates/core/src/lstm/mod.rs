//! Conv + LSTM + attention classifier over frozen word embeddings.
//!
//! Pipeline: embedding lookup, inverted dropout (training only), a valid 1-D
//! convolution with ReLU, windowed max pooling, two stacked LSTM layers,
//! softmax attention over the pooled time steps, and three dense layers
//! ending in a sigmoid. All activations are ReLU or sigmoid; the LSTM cell
//! candidate and output squashing use ReLU.
//!
//! Attention is restricted to pooled steps that cover at least one real
//! token. A sequence made only of padding attends uniformly over all steps.

mod io;
mod net;
mod params;
mod train;

#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use net::{bce_with_logit, sigmoid, ForwardCache};
pub use params::{Architecture, LstmLayer, Params, Tensor, TENSOR_NAMES};
pub use train::{accuracy, train, Optimizer, TrainConfig, TrainHistory};

use crate::corpus::{Corpus, Label};
use crate::embed::{self, EmbedError, EmbeddingMatrix, Word2VecConfig};
use crate::hashing;
use crate::preprocess::{
    encode_with_positions, PreprocessError, TokenSequence, Tokenizer, Vocabulary,
};
use crate::{par, seed, TextClassifier};

#[derive(Debug, Error)]
pub enum LstmError {
    #[error("expected a sequence of length {expected}, got {got}")]
    SequenceLength { expected: usize, got: usize },
    #[error("embedding does not belong to the vocabulary")]
    VocabularyMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{split} split has no {label} documents")]
    MissingClass { split: String, label: Label },
    #[error("training diverged in epoch {epoch}, batch {batch} (running loss {loss})")]
    Diverged { epoch: usize, batch: usize, loss: f64 },
    #[error("invalid network file: {0}")]
    Format(String),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Output of [`LstmNetwork::forward`].
#[derive(Debug, Clone)]
pub struct Forward {
    pub probability: f64,
    /// Softmax weight of each pooled time step.
    pub attention: Vec<f64>,
    pub cache: ForwardCache,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmNetwork {
    arch: Architecture,
    embedding: EmbeddingMatrix,
    pub params: Params,
}

impl LstmNetwork {
    /// Glorot-initialised network; forget-gate biases start at one.
    pub fn new(arch: Architecture, embedding: EmbeddingMatrix, seed: u64) -> Result<Self, LstmError> {
        arch.validate().map_err(LstmError::InvalidConfig)?;
        let mut rng = seed::rng(seed, &[seed::STREAM_INIT]);
        let params = Params::init(&arch, embedding.dim(), &mut rng);
        Ok(LstmNetwork {
            arch,
            embedding,
            params,
        })
    }

    pub fn from_parts(
        arch: Architecture,
        embedding: EmbeddingMatrix,
        params: Params,
    ) -> Result<Self, LstmError> {
        arch.validate().map_err(LstmError::InvalidConfig)?;
        let expected = Params::zeros(&arch, embedding.dim());
        for ((name, a), (_, b)) in params.tensors().iter().zip(expected.tensors().iter()) {
            if a.shape != b.shape {
                return Err(LstmError::Format(format!(
                    "tensor {name} has shape {:?}, expected {:?}",
                    a.shape, b.shape
                )));
            }
        }
        Ok(LstmNetwork {
            arch,
            embedding,
            params,
        })
    }

    pub fn architecture(&self) -> &Architecture {
        &self.arch
    }

    pub fn embedding(&self) -> &EmbeddingMatrix {
        &self.embedding
    }

    /// SHA-256 over the little-endian bytes of the embedding matrix.
    pub fn embedding_hash(&self) -> String {
        hashing::sha256_hex(&io::f64_bytes(self.embedding.as_slice()))
    }

    fn check_len(&self, seq: &TokenSequence) -> Result<(), LstmError> {
        if seq.indices.len() != self.arch.seq_len {
            return Err(LstmError::SequenceLength {
                expected: self.arch.seq_len,
                got: seq.indices.len(),
            });
        }
        if seq.indices.iter().any(|&i| i as usize >= self.embedding.n_rows()) {
            return Err(LstmError::VocabularyMismatch);
        }
        Ok(())
    }

    /// Run the network. Dropout is active only when `train_mode` is set, and
    /// then draws from `rng`.
    pub fn forward(
        &self,
        seq: &TokenSequence,
        train_mode: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Forward, LstmError> {
        self.check_len(seq)?;
        let cache = self.forward_cache(seq, if train_mode { Some(rng) } else { None });
        Ok(Forward {
            probability: cache.probability(),
            attention: cache.attention.clone(),
            cache,
        })
    }

    pub(crate) fn forward_cache(
        &self,
        seq: &TokenSequence,
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> ForwardCache {
        net::forward(&self.arch, &self.embedding, &self.params, seq, dropout_rng)
    }

    /// Parameter gradients for an upstream logit gradient `dlogit`. The
    /// embedding has no entry: it is never trained.
    pub fn backward(&self, cache: &ForwardCache, dlogit: f64) -> Params {
        net::backward(&self.arch, self.embedding.dim(), &self.params, cache, dlogit)
    }

    /// Binary cross-entropy loss, probability and gradients for one example.
    pub fn loss_and_gradients(
        &self,
        seq: &TokenSequence,
        label: Label,
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> (f64, f64, Params) {
        train::example_gradients(self, seq, label, dropout_rng)
    }

    /// Inference-mode probability of Fake. Panics on a length mismatch.
    pub fn predict_encoded(&self, seq: &TokenSequence) -> f64 {
        self.check_len(seq).expect("sequence matches the network");
        self.forward_cache(seq, None).probability()
    }

    /// Attention mass per sequence slot, sorted by slot.
    ///
    /// Each pooled step hands its weight to one token: the conv position
    /// picked by the most filters in that step's max-pool (earliest on ties),
    /// read at the centre of its receptive field and clamped to the real
    /// tokens. Weights landing on the same slot are merged.
    pub fn extract_token_contributions(
        &self,
        seq: &TokenSequence,
    ) -> Result<Vec<(usize, f64)>, LstmError> {
        self.check_len(seq)?;
        if seq.true_length == 0 {
            return Ok(Vec::new());
        }
        let cache = self.forward_cache(seq, None);
        let a = &self.arch;
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for s in 0..a.pooled_len() {
            if !cache.is_active(s) {
                continue;
            }
            let mut votes = vec![0usize; a.pool];
            for f in 0..a.filters {
                votes[cache.pool_argmax(s, f, a.filters) - s * a.pool] += 1;
            }
            let mut pick = 0;
            for (j, &v) in votes.iter().enumerate() {
                if v > votes[pick] {
                    pick = j;
                }
            }
            let slot = (s * a.pool + pick + a.kernel / 2).min(seq.true_length - 1);
            *merged.entry(slot).or_insert(0.0) += cache.attention[s];
        }
        Ok(merged.into_iter().collect())
    }
}

/// Everything needed to train an [`LstmClassifier`] from raw documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LstmConfig {
    pub min_count: usize,
    pub max_vocab: Option<usize>,
    pub word2vec: Word2VecConfig,
    pub architecture: Architecture,
    pub training: TrainConfig,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            min_count: 1,
            max_vocab: None,
            word2vec: Word2VecConfig::default(),
            architecture: Architecture::default(),
            training: TrainConfig::default(),
        }
    }
}

/// A trained network bundled with its vocabulary and tokenizer.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmClassifier {
    pub vocab: Vocabulary,
    pub net: LstmNetwork,
    pub training: Option<TrainConfig>,
    pub history: Option<TrainHistory>,
    pub provenance: BTreeMap<String, String>,
}

impl LstmClassifier {
    pub fn new(vocab: Vocabulary, net: LstmNetwork) -> Result<Self, LstmError> {
        if !net.embedding().matches(&vocab) {
            return Err(LstmError::VocabularyMismatch);
        }
        Ok(LstmClassifier {
            vocab,
            net,
            training: None,
            history: None,
            provenance: BTreeMap::new(),
        })
    }

    /// Stopwords are kept: word order matters to the sequence model.
    pub fn tokenizer() -> Tokenizer {
        Tokenizer::plain()
    }

    /// Encode raw text; also returns the cleaned-token position of each
    /// filled slot.
    pub fn encode(&self, text: &str) -> (TokenSequence, Vec<usize>) {
        let tokens = Self::tokenizer().tokens(text);
        encode_with_positions(&tokens, &self.vocab, self.net.arch.seq_len)
    }

    /// Build the vocabulary and embeddings from `train`, then fit the
    /// network, keeping the weights that score best on `valid`.
    pub fn fit(train: &Corpus, valid: &Corpus, cfg: &LstmConfig) -> Result<Self, LstmError> {
        let tokenizer = Self::tokenizer();
        let exec = cfg.training.execution;
        let lists: Vec<Vec<String>> =
            par::map(exec, train.documents(), |d| tokenizer.tokens(&d.text));
        let vocab = Vocabulary::from_token_lists(
            lists.iter().map(Vec::as_slice),
            cfg.max_vocab,
            cfg.min_count,
        )?;
        let index_lists: Vec<Vec<u32>> = lists
            .iter()
            .map(|l| l.iter().filter_map(|t| vocab.index_of(t)).collect())
            .collect();
        let embedding = embed::train_word2vec(&index_lists, &vocab, &cfg.word2vec)?;
        let net = LstmNetwork::new(cfg.architecture, embedding, cfg.training.seed)?;
        let mut clf = LstmClassifier::new(vocab, net)?;
        let encode = |c: &Corpus| -> Vec<(TokenSequence, Label)> {
            par::map(exec, c.documents(), |d| (clf.encode(&d.text).0, d.label))
        };
        let train_set = encode(train);
        let valid_set = encode(valid);
        let (net, history) = train::train(clf.net.clone(), &train_set, &valid_set, &cfg.training)?;
        clf.net = net;
        clf.training = Some(cfg.training.clone());
        clf.history = Some(history);
        Ok(clf)
    }

    /// Attention contributions keyed by cleaned-token position.
    pub fn token_contributions(&self, text: &str) -> Vec<(usize, f64)> {
        let (seq, positions) = self.encode(text);
        self.net
            .extract_token_contributions(&seq)
            .expect("encoder matches the network")
            .into_iter()
            .map(|(slot, w)| (positions[slot], w))
            .collect()
    }

    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        hashing::sha256_hex(&buf)
    }

    pub fn save(&self, path: &Path) -> Result<(), LstmError> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        std::io::Write::flush(&mut w)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LstmError> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

impl TextClassifier for LstmClassifier {
    fn predict_proba(&self, text: &str) -> f64 {
        self.net.predict_encoded(&self.encode(text).0)
    }
}
