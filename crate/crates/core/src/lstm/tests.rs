use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::par::Execution;

fn tiny_arch() -> Architecture {
    Architecture {
        seq_len: 8,
        filters: 3,
        kernel: 3,
        pool: 2,
        hidden1: 4,
        hidden2: 4,
        dense1: 4,
        dense2: 3,
        dropout: 0.25,
    }
}

fn vocab(n: usize) -> Vocabulary {
    Vocabulary::from_words((0..n).map(|i| format!("w{i}")).collect()).unwrap()
}

fn random_embedding(v: &Vocabulary, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..(v.len() + 1) * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    EmbeddingMatrix::from_rows(dim, rows, v).unwrap()
}

/// Network with every tensor, biases included, drawn from U(-0.5, 0.5).
fn tiny_net(seed: u64) -> LstmNetwork {
    let arch = tiny_arch();
    let v = vocab(6);
    let mut net = LstmNetwork::new(arch, random_embedding(&v, 4, seed), seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
    net.params.for_each_mut(|_, t| {
        for x in &mut t.data {
            *x = rng.random_range(-0.5..0.5);
        }
    });
    net
}

fn seq(indices: &[u32], len: usize) -> TokenSequence {
    let mut ix = indices.to_vec();
    ix.resize(len, 0);
    TokenSequence {
        indices: ix,
        true_length: indices.len(),
    }
}

fn loss_with(net: &LstmNetwork, s: &TokenSequence, label: Label, mask_seed: Option<u64>) -> f64 {
    let mut rng = mask_seed.map(ChaCha8Rng::seed_from_u64);
    let cache = net.forward_cache(s, rng.as_mut());
    bce_with_logit(cache.logit, label.target())
}

fn max_gradient_error(net: &LstmNetwork, s: &TokenSequence, label: Label, mask_seed: Option<u64>) -> f64 {
    let mut rng = mask_seed.map(ChaCha8Rng::seed_from_u64);
    let (_, _, analytic) = net.loss_and_gradients(s, label, rng.as_mut());
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let grads = analytic.tensors();
    for (ti, (name, g)) in grads.iter().enumerate() {
        for j in 0..g.len() {
            let perturbed = |delta: f64| {
                let mut n = net.clone();
                let mut k = 0;
                n.params.for_each_mut(|_, t| {
                    if k == ti {
                        t.data[j] += delta;
                    }
                    k += 1;
                });
                loss_with(&n, s, label, mask_seed)
            };
            let numeric = (perturbed(h) - perturbed(-h)) / (2.0 * h);
            let a = g.data[j];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-7);
            assert!(err.is_finite(), "{name}[{j}]");
            if err > worst {
                worst = err;
            }
            assert!(err < 1e-4, "{name}[{j}]: analytic {a} numeric {numeric}");
        }
    }
    worst
}

#[test]
fn gradients_match_finite_differences() {
    let net = tiny_net(7);
    let full = seq(&[1, 4, 2, 6, 3, 5, 2, 1], 8);
    let short = seq(&[3, 1, 6], 8);
    for label in [Label::Fake, Label::Real] {
        for s in [&full, &short] {
            max_gradient_error(&net, s, label, None);
            max_gradient_error(&net, s, label, Some(11));
        }
    }
}

#[test]
fn gradients_match_on_all_padding_input() {
    let net = tiny_net(3);
    max_gradient_error(&net, &seq(&[], 8), Label::Fake, None);
}

#[test]
fn zero_upstream_gradient_gives_zero_gradients() {
    let net = tiny_net(1);
    let cache = net.forward_cache(&seq(&[1, 2, 3], 8), None);
    let g = net.backward(&cache, 0.0);
    assert!(g.tensors().iter().all(|(_, t)| t.data.iter().all(|&x| x == 0.0)));
}

#[test]
fn zero_network_outputs_one_half() {
    let arch = tiny_arch();
    let v = vocab(6);
    let net = LstmNetwork::from_parts(arch, random_embedding(&v, 4, 0), Params::zeros(&arch, 4)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = net.forward(&seq(&[1, 2, 3, 4], 8), false, &mut rng).unwrap();
    assert_eq!(out.probability, 0.5);
    // scores are all zero, so attention is uniform over the real steps
    assert_eq!(out.attention, vec![0.5, 0.5, 0.0]);
}

#[test]
fn padding_only_conv_is_relu_of_bias() {
    let mut net = tiny_net(2);
    net.params.conv_b.data = vec![0.3, -0.2, 0.5];
    let cache = net.forward_cache(&seq(&[], 8), None);
    for t in 0..6 {
        assert_eq!(&cache.conv[t * 3..t * 3 + 3], &[0.3, 0.0, 0.5]);
    }
    // no real steps: attention falls back to every step
    assert!(cache.active.iter().all(|&a| a));
}

#[test]
fn inference_is_deterministic() {
    let net = tiny_net(4);
    let s = seq(&[5, 4, 3, 2, 1], 8);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let a = net.forward(&s, false, &mut rng).unwrap();
    let b = net.forward(&s, false, &mut rng).unwrap();
    assert_eq!(a.probability.to_bits(), b.probability.to_bits());
    assert_eq!(a.attention, b.attention);
}

#[test]
fn wrong_length_is_rejected() {
    let net = tiny_net(4);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let err = net.forward(&seq(&[1], 9), false, &mut rng).unwrap_err();
    assert!(matches!(err, LstmError::SequenceLength { expected: 8, got: 9 }));
    assert!(net.extract_token_contributions(&seq(&[1], 7)).is_err());
}

#[test]
fn inverted_dropout_preserves_expectation() {
    let net = tiny_net(5);
    let s = seq(&[1, 2, 3, 4, 5, 6, 1, 2], 8);
    let clean = net.forward_cache(&s, None).x;
    let n = 20_000;
    let mut mean = vec![0.0; clean.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..n {
        let x = net.forward_cache(&s, Some(&mut rng)).x;
        for (m, v) in mean.iter_mut().zip(&x) {
            *m += v / n as f64;
        }
    }
    let p = net.architecture().dropout;
    for (m, c) in mean.iter().zip(&clean) {
        let sigma = c.abs() * (p / (1.0 - p) / n as f64).sqrt();
        assert!((m - c).abs() <= 5.0 * sigma + 1e-12, "{m} vs {c}");
    }
}

#[test]
fn contributions_cover_real_tokens_only() {
    let net = tiny_net(6);
    let s = seq(&[1, 2, 3, 4, 5], 8);
    let c = net.extract_token_contributions(&s).unwrap();
    assert!(!c.is_empty());
    assert!(c.iter().all(|&(slot, w)| slot < 5 && w >= 0.0));
    let total: f64 = c.iter().map(|(_, w)| w).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(net.extract_token_contributions(&seq(&[], 8)).unwrap().is_empty());
}

#[test]
fn uniform_attention_spreads_evenly() {
    let mut net = tiny_net(8);
    net.params.attn_w.data.fill(0.0);
    let c = net
        .extract_token_contributions(&seq(&[1, 2, 3, 4, 5, 6, 1, 2], 8))
        .unwrap();
    assert_eq!(c.len(), 3);
    for (_, w) in c {
        assert!((w - 1.0 / 3.0).abs() < 1e-15);
    }
}

#[test]
fn peaked_attention_lands_on_one_token() {
    let mut net = tiny_net(8);
    let s = seq(&[1, 2, 3, 4, 5, 6, 1, 2], 8);
    // scale the scoring vector until the softmax saturates
    net.params.attn_w.data.iter_mut().for_each(|w| *w *= 1e6);
    let c = net.extract_token_contributions(&s).unwrap();
    let best = c.iter().map(|(_, w)| *w).fold(0.0, f64::max);
    assert_eq!(best, 1.0);
}

fn toy_data(n: usize, len: usize, vocab_size: u32, seed: u64) -> Vec<(TokenSequence, Label)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let l = rng.random_range(len / 2..=len);
            let ix: Vec<u32> = (0..l).map(|_| rng.random_range(1..=vocab_size)).collect();
            (seq(&ix, len), Label::from_fake(i % 2 == 0))
        })
        .collect()
}

fn small_net(seed: u64) -> LstmNetwork {
    let arch = Architecture {
        seq_len: 16,
        filters: 16,
        kernel: 3,
        pool: 2,
        hidden1: 16,
        hidden2: 16,
        dense1: 16,
        dense2: 8,
        dropout: 0.0,
    };
    let v = vocab(30);
    LstmNetwork::new(arch, random_embedding(&v, 6, seed), seed).unwrap()
}

#[test]
fn memorizes_twenty_documents() {
    for seed in 1..=3 {
        let data = toy_data(20, 16, 30, seed);
        let cfg = TrainConfig {
            epochs: 200,
            batch_size: 4,
            lr: 0.01,
            seed,
            patience: None,
            ..Default::default()
        };
        let (net, hist) = train(small_net(seed), &data, &data, &cfg).unwrap();
        assert_eq!(accuracy(&net, &data, Execution::Sequential), 1.0, "seed {seed}");
        assert_eq!(hist.valid_accuracy[hist.best_epoch], 1.0);
        assert_eq!(hist.train_loss.len(), hist.valid_accuracy.len());
        assert_eq!(hist.train_accuracy.len(), hist.valid_accuracy.len());
    }
}

#[test]
fn zero_learning_rate_changes_nothing() {
    let data = toy_data(10, 16, 30, 2);
    for optimizer in [Optimizer::Adam, Optimizer::SgdMomentum] {
        let net = small_net(2);
        let cfg = TrainConfig {
            epochs: 3,
            lr: 0.0,
            optimizer,
            patience: None,
            ..Default::default()
        };
        let (trained, hist) = train(net.clone(), &data, &data, &cfg).unwrap();
        assert_eq!(trained.params, net.params);
        for w in hist.train_loss.windows(2) {
            assert!((w[0] - w[1]).abs() < 1e-12);
        }
        assert!(hist.valid_accuracy.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn training_is_reproducible_across_execution_modes() {
    let data = toy_data(12, 16, 30, 3);
    let mut arch_net = small_net(3);
    arch_net.arch.dropout = 0.3;
    let base = TrainConfig {
        epochs: 3,
        batch_size: 5,
        seed: 9,
        ..Default::default()
    };
    let seq_cfg = TrainConfig { execution: Execution::Sequential, ..base.clone() };
    let par_cfg = TrainConfig { execution: Execution::Parallel, ..base };
    let (a, ha) = train(arch_net.clone(), &data, &data, &seq_cfg).unwrap();
    let (b, hb) = train(arch_net.clone(), &data, &data, &par_cfg).unwrap();
    let (c, _) = train(arch_net, &data, &data, &seq_cfg).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.params, c.params);
    assert_eq!(ha, hb);
}

#[test]
fn training_never_touches_the_embedding() {
    let data = toy_data(10, 16, 30, 4);
    let net = small_net(4);
    let before = net.embedding_hash();
    let cfg = TrainConfig { epochs: 2, lr: 0.05, ..Default::default() };
    let (trained, _) = train(net, &data, &data, &cfg).unwrap();
    assert_eq!(trained.embedding_hash(), before);
}

#[test]
fn missing_class_is_an_error() {
    let data = toy_data(10, 16, 30, 5);
    let fakes: Vec<_> = data.iter().filter(|(_, l)| l.is_fake()).cloned().collect();
    let err = train(small_net(5), &data, &fakes, &TrainConfig::default()).unwrap_err();
    assert!(matches!(err, LstmError::MissingClass { .. }));
}

#[test]
fn divergence_is_reported() {
    let data = toy_data(10, 16, 30, 6);
    let cfg = TrainConfig {
        epochs: 5,
        lr: 1e300,
        optimizer: Optimizer::SgdMomentum,
        clip_norm: None,
        patience: None,
        ..Default::default()
    };
    let err = train(small_net(6), &data, &data, &cfg).unwrap_err();
    assert!(matches!(err, LstmError::Diverged { .. }), "{err}");
}

#[test]
fn classifier_file_round_trips() {
    let net = small_net(7);
    let v = vocab(30);
    let mut clf = LstmClassifier::new(v, net).unwrap();
    clf.provenance.insert("seed".into(), "7".into());
    let mut buf = Vec::new();
    clf.write_to(&mut buf).unwrap();
    let back = LstmClassifier::read_from(&buf[..]).unwrap();
    assert_eq!(back, clf);
    let mut again = Vec::new();
    back.write_to(&mut again).unwrap();
    assert_eq!(buf, again);
    let text = "w1 w2 unknown w3 w29";
    assert_eq!(back.predict_proba(text).to_bits(), clf.predict_proba(text).to_bits());

    // flip one byte inside the embedding block
    let mut bad = buf.clone();
    let n = bad.len();
    let tail = clf.net.params.n_values() * 8 + 400;
    bad[n - tail] ^= 1;
    assert!(LstmClassifier::read_from(&bad[..]).is_err());
    assert!(LstmClassifier::read_from(&buf[..buf.len() - 3]).is_err());
}

#[test]
fn contributions_map_to_cleaned_positions() {
    let clf = LstmClassifier::new(vocab(30), small_net(8)).unwrap();
    let text = "zz w1 zz w2 w3 w4";
    let c = clf.token_contributions(text);
    let tokens = LstmClassifier::tokenizer().tokens(text);
    for (pos, w) in &c {
        assert!(tokens[*pos].starts_with('w'));
        assert!(*w >= 0.0);
    }
    assert!((c.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn attention_is_a_distribution(ix in proptest::collection::vec(1u32..=6, 0..=8), s in 0u64..20) {
        let net = tiny_net(s);
        let cache = net.forward_cache(&seq(&ix, 8), None);
        let total: f64 = cache.attention.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        prop_assert!(cache.attention.iter().all(|&a| a >= 0.0));
        let c = net.extract_token_contributions(&seq(&ix, 8)).unwrap();
        if ix.is_empty() {
            prop_assert!(c.is_empty());
        } else {
            let sum: f64 = c.iter().map(|(_, w)| w).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            prop_assert!(c.iter().all(|&(slot, w)| slot < ix.len() && w >= 0.0));
        }
    }
}


#[test]
fn disabled_clip_and_patience_serialize_as_zero() {
    let cfg = TrainConfig { clip_norm: None, patience: None, ..TrainConfig::default() };
    let json = serde_json::to_string(&cfg).unwrap();
    assert!(json.contains("\"clip_norm\":0.0") && json.contains("\"patience\":0"), "{json}");
    let back: TrainConfig = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cfg);
    let default: TrainConfig = serde_json::from_str("{}").unwrap();
    assert_eq!((default.clip_norm, default.patience), (Some(5.0), Some(3)));
}
