use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::net::{bce_with_logit, sigmoid};
use super::params::Params;
use super::{LstmError, LstmNetwork};
use crate::corpus::Label;
use crate::hashing::hex_f64;
use crate::par::{self, Execution};
use crate::preprocess::TokenSequence;
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    Adam,
    SgdMomentum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Global gradient-norm cap; `None` (0 in config files) disables
    /// clipping.
    #[serde(with = "zero_is_none")]
    pub clip_norm: Option<f64>,
    /// Stop after this many epochs without a validation improvement. 0 in
    /// config files means never.
    #[serde(with = "zero_is_none")]
    pub patience: Option<usize>,
    #[serde(skip)]
    pub execution: Execution,
}

mod zero_is_none {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<T, S>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error>
    where
        T: Serialize + Default,
        S: Serializer,
    {
        match v {
            Some(x) => x.serialize(s),
            None => T::default().serialize(s),
        }
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<Option<T>, D::Error>
    where
        T: Deserialize<'de> + Default + PartialEq,
        D: Deserializer<'de>,
    {
        let v = T::deserialize(d)?;
        Ok((v != T::default()).then_some(v))
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            lr: 1e-3,
            seed: 0,
            optimizer: Optimizer::Adam,
            momentum: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            clip_norm: Some(5.0),
            patience: Some(3),
            execution: Execution::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LstmError> {
        let bad = |m: String| Err(LstmError::InvalidConfig(m));
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive".into());
        }
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return bad(format!("learning rate {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum)
            || !(0.0..1.0).contains(&self.beta1)
            || !(0.0..1.0).contains(&self.beta2)
        {
            return bad("momentum and beta coefficients must be in [0, 1)".into());
        }
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon {}", self.epsilon));
        }
        if matches!(self.clip_norm, Some(c) if !(c > 0.0)) {
            return bad("clip_norm must be positive".into());
        }
        if self.patience == Some(0) {
            return bad("patience must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    #[serde(with = "hex_f64")]
    pub train_loss: Vec<f64>,
    pub train_accuracy: Vec<f64>,
    pub valid_accuracy: Vec<f64>,
    /// Zero-based epoch whose weights were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
    pub train_size: usize,
    pub valid_size: usize,
}

enum OptState {
    Adam { m: Params, v: Params, t: i32 },
    Sgd { velocity: Params },
}

impl OptState {
    fn new(cfg: &TrainConfig, p: &Params) -> Self {
        match cfg.optimizer {
            Optimizer::Adam => OptState::Adam {
                m: p.zeros_like(),
                v: p.zeros_like(),
                t: 0,
            },
            Optimizer::SgdMomentum => OptState::Sgd {
                velocity: p.zeros_like(),
            },
        }
    }

    fn step(&mut self, cfg: &TrainConfig, p: &mut Params, g: &Params) {
        match self {
            OptState::Adam { m, v, t } => {
                *t += 1;
                let c1 = 1.0 - cfg.beta1.powi(*t);
                let c2 = 1.0 - cfg.beta2.powi(*t);
                m.zip_mut(g, |m, g| {
                    for (mi, gi) in m.data.iter_mut().zip(&g.data) {
                        *mi = cfg.beta1 * *mi + (1.0 - cfg.beta1) * gi;
                    }
                });
                v.zip_mut(g, |v, g| {
                    for (vi, gi) in v.data.iter_mut().zip(&g.data) {
                        *vi = cfg.beta2 * *vi + (1.0 - cfg.beta2) * gi * gi;
                    }
                });
                let ms = m.tensors();
                let vs = v.tensors();
                let mut i = 0;
                p.for_each_mut(|_, w| {
                    for ((wi, mi), vi) in w.data.iter_mut().zip(&ms[i].1.data).zip(&vs[i].1.data) {
                        *wi -= cfg.lr * (mi / c1) / ((vi / c2).sqrt() + cfg.epsilon);
                    }
                    i += 1;
                });
            }
            OptState::Sgd { velocity } => {
                velocity.scale(cfg.momentum);
                velocity.add_assign(g);
                p.zip_mut(velocity, |w, v| {
                    for (wi, vi) in w.data.iter_mut().zip(&v.data) {
                        *wi -= cfg.lr * vi;
                    }
                });
            }
        }
    }
}

fn check_split(data: &[(TokenSequence, Label)], name: &str, len: usize) -> Result<(), LstmError> {
    for label in [Label::Fake, Label::Real] {
        if !data.iter().any(|(_, l)| *l == label) {
            return Err(LstmError::MissingClass {
                split: name.into(),
                label,
            });
        }
    }
    if let Some((s, _)) = data.iter().find(|(s, _)| s.indices.len() != len) {
        return Err(LstmError::SequenceLength {
            expected: len,
            got: s.indices.len(),
        });
    }
    Ok(())
}

/// Fraction of `data` classified correctly at inference.
pub fn accuracy(net: &LstmNetwork, data: &[(TokenSequence, Label)], exec: Execution) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = par::map(exec, data, |(s, l)| {
        (net.predict_encoded(s) >= 0.5) == l.is_fake()
    });
    hits.iter().filter(|&&h| h).count() as f64 / data.len() as f64
}

/// Mini-batch training with binary cross-entropy. Returns the weights of
/// the epoch with the best validation accuracy (earliest on ties).
pub fn train(
    mut net: LstmNetwork,
    train: &[(TokenSequence, Label)],
    valid: &[(TokenSequence, Label)],
    cfg: &TrainConfig,
) -> Result<(LstmNetwork, TrainHistory), LstmError> {
    cfg.validate()?;
    let len = net.architecture().seq_len;
    check_split(train, "train", len)?;
    check_split(valid, "validation", len)?;
    let exec = cfg.execution;
    let mut opt = OptState::new(cfg, &net.params);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = TrainHistory {
        train_size: train.len(),
        valid_size: valid.len(),
        ..Default::default()
    };
    let mut best: Option<(f64, Params)> = None;
    let mut since_best = 0;

    for epoch in 0..cfg.epochs {
        let epoch_tag = epoch.to_string();
        order.shuffle(&mut seed::rng(cfg.seed, &[seed::STREAM_SHUFFLE, &epoch_tag]));
        let mut loss_sum = 0.0;
        let mut hits = 0usize;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let results = par::map(exec, batch, |&i| {
                let (seq, label) = &train[i];
                let mut rng = seed::rng(
                    cfg.seed,
                    &[seed::STREAM_DROPOUT, &epoch_tag, &i.to_string()],
                );
                net.loss_and_gradients(seq, *label, Some(&mut rng))
            });
            let mut grad = net.params.zeros_like();
            for (ix, (loss, prob, g)) in results.iter().enumerate() {
                loss_sum += loss;
                if (*prob >= 0.5) == train[batch[ix]].1.is_fake() {
                    hits += 1;
                }
                grad.add_assign(g);
            }
            grad.scale(1.0 / batch.len() as f64);
            if let Some(c) = cfg.clip_norm {
                let n = grad.norm();
                if n > c {
                    grad.scale(c / n);
                }
            }
            opt.step(cfg, &mut net.params, &grad);
            if !net.params.all_finite() || !loss_sum.is_finite() {
                return Err(LstmError::Diverged {
                    epoch,
                    batch: b,
                    loss: loss_sum,
                });
            }
        }
        history.train_loss.push(loss_sum / train.len() as f64);
        history.train_accuracy.push(hits as f64 / train.len() as f64);
        let acc = accuracy(&net, valid, exec);
        history.valid_accuracy.push(acc);
        log::info!(
            "epoch {}: loss {:.4} train acc {:.4} valid acc {:.4}",
            epoch + 1,
            loss_sum / train.len() as f64,
            hits as f64 / train.len() as f64,
            acc
        );
        if best.as_ref().is_none_or(|(b, _)| acc > *b) {
            best = Some((acc, net.params.clone()));
            history.best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if cfg.patience.is_some_and(|p| since_best >= p) {
                history.stopped_early = true;
                break;
            }
        }
    }
    if let Some((_, p)) = best {
        net.params = p;
    }
    Ok((net, history))
}

/// Per-example loss, probability and gradients under binary cross-entropy.
pub(crate) fn example_gradients(
    net: &LstmNetwork,
    seq: &TokenSequence,
    label: Label,
    dropout_rng: Option<&mut rand_chacha::ChaCha8Rng>,
) -> (f64, f64, Params) {
    let cache = net.forward_cache(seq, dropout_rng);
    let y = label.target();
    let prob = sigmoid(cache.logit);
    let loss = bce_with_logit(cache.logit, y);
    let grads = net.backward(&cache, prob - y);
    (loss, prob, grads)
}
