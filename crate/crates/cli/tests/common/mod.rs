#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use veritext::{Corpus, Document, Label};

pub const FAKE_WORDS: [&str; 8] = [
    "hoax", "shocking", "exposed", "conspiracy", "miracle", "banned", "secret", "outrage",
];
pub const REAL_WORDS: [&str; 8] = [
    "minister", "parliament", "budget", "council", "quarterly", "tribunal", "statement", "treasury",
];
pub const NEUTRAL_WORDS: [&str; 12] = [
    "city", "people", "week", "morning", "region", "market", "school", "road", "family", "weather",
    "station", "village",
];

/// Two-class corpus: every document mixes neutral words with markers of its
/// own class (probability `signal` per token). Fake when `i % period == 0`.
pub fn synthetic(name: &str, n: usize, period: usize, signal: f64, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = (0..n)
        .map(|i| {
            let fake = i % period == 0;
            let markers: &[&str] = if fake { &FAKE_WORDS } else { &REAL_WORDS };
            let len = rng.random_range(15..45);
            let words: Vec<&str> = (0..len)
                .map(|_| {
                    if rng.random::<f64>() < signal {
                        markers[rng.random_range(0..markers.len())]
                    } else {
                        NEUTRAL_WORDS[rng.random_range(0..NEUTRAL_WORDS.len())]
                    }
                })
                .collect();
            Document::new(format!("{name}-{i}"), words.join(" "), Label::from_fake(fake))
        })
        .collect();
    Corpus::new(name, docs).unwrap()
}

pub fn write_corpus(dir: &Path, file: &str, corpus: &Corpus) -> PathBuf {
    let path = dir.join(file);
    veritext::corpus::save_jsonl(corpus, &path).unwrap();
    path
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_veritext"))
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small LSTM settings so a CLI run takes well under a second.
pub const SMALL_LSTM: &str = r#"
[model]
kind = "lstm"
[model.lstm.word2vec]
dim = 8
epochs = 2
[model.lstm.architecture]
seq_len = 64
filters = 8
kernel = 3
pool = 2
hidden1 = 8
hidden2 = 8
dense1 = 8
dense2 = 4
[model.lstm.training]
epochs = 3
batch_size = 8
lr = 0.01
"#;
