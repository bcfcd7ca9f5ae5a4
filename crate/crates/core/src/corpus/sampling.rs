use rand::seq::SliceRandom;

use super::{Corpus, CorpusError, Label, SplitRole};
use crate::seed;

fn indices_of(corpus: &Corpus, label: Label) -> Vec<usize> {
    corpus
        .documents()
        .iter()
        .enumerate()
        .filter(|(_, d)| d.label == label)
        .map(|(i, _)| i)
        .collect()
}

fn take(corpus: &Corpus, mut idx: Vec<usize>, name: String, role: SplitRole) -> Corpus {
    idx.sort_unstable();
    let docs = idx.iter().map(|&i| corpus.documents()[i].clone()).collect();
    Corpus::from_parts(name, docs, role)
}

/// Deterministic train/test split. Both halves keep corpus order.
///
/// With `stratified`, each class contributes `round(n_class * test_fraction)`
/// documents to the test side, clamped so both sides keep at least one.
pub fn split(
    corpus: &Corpus,
    test_fraction: f64,
    seed: u64,
    stratified: bool,
) -> Result<(Corpus, Corpus), CorpusError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(test_fraction));
    }
    let mut rng = seed::rng(seed, &[seed::STREAM_SPLIT]);
    let mut test_idx = Vec::new();
    let mut train_idx = Vec::new();
    let groups: Vec<Vec<usize>> = if stratified {
        [Label::Fake, Label::Real]
            .into_iter()
            .map(|label| {
                let idx = indices_of(corpus, label);
                if idx.len() < 2 {
                    Err(CorpusError::TooFewInClass {
                        label,
                        count: idx.len(),
                    })
                } else {
                    Ok(idx)
                }
            })
            .collect::<Result<_, _>>()?
    } else {
        vec![(0..corpus.len()).collect()]
    };
    for mut idx in groups {
        idx.shuffle(&mut rng);
        let mut n_test = (idx.len() as f64 * test_fraction).round() as usize;
        if stratified {
            n_test = n_test.clamp(1, idx.len() - 1);
        }
        train_idx.extend_from_slice(&idx[n_test..]);
        test_idx.extend_from_slice(&idx[..n_test]);
    }
    Ok((
        take(corpus, train_idx, format!("{}/train", corpus.name()), SplitRole::Train),
        take(corpus, test_idx, format!("{}/test", corpus.name()), SplitRole::Test),
    ))
}

/// Subsample the majority class so that `real / fake == real_per_fake`.
///
/// The minority class (Fake on ties) is always kept whole; a ratio that would
/// need more majority documents than exist is an error.
pub fn rebalance(corpus: &Corpus, real_per_fake: f64, seed: u64) -> Result<Corpus, CorpusError> {
    if !(real_per_fake.is_finite() && real_per_fake > 0.0) {
        return Err(CorpusError::InvalidRatio(real_per_fake));
    }
    let fake = corpus.count(Label::Fake);
    let real = corpus.count(Label::Real);
    let (minority, majority) = if fake <= real {
        (Label::Fake, Label::Real)
    } else {
        (Label::Real, Label::Fake)
    };
    let n_min = corpus.count(minority);
    let n_maj = corpus.count(majority);
    let needed = match majority {
        Label::Real => (n_min as f64 * real_per_fake).round() as usize,
        Label::Fake => (n_min as f64 / real_per_fake).round() as usize,
    };
    if needed > n_maj || (needed == 0 && n_min > 0) {
        return Err(CorpusError::InsufficientDocuments {
            ratio: real_per_fake,
            label: majority,
            needed,
            available: n_maj,
        });
    }
    let mut rng = seed::rng(seed, &[seed::STREAM_REBALANCE]);
    let mut maj_idx = indices_of(corpus, majority);
    maj_idx.shuffle(&mut rng);
    maj_idx.truncate(needed);
    let mut keep = indices_of(corpus, minority);
    keep.extend(maj_idx);
    Ok(take(corpus, keep, corpus.name().to_owned(), corpus.role()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn corpus(fake: usize, real: usize) -> Corpus {
        let docs = (0..fake)
            .map(|i| Document::new(format!("f{i}"), "x", Label::Fake))
            .chain((0..real).map(|i| Document::new(format!("r{i}"), "y", Label::Real)))
            .collect();
        Corpus::new("c", docs).unwrap()
    }

    fn ids(c: &Corpus) -> HashSet<String> {
        c.documents().iter().map(|d| d.id.clone()).collect()
    }

    #[test]
    fn stratified_balanced() {
        let (train, test) = split(&corpus(50, 50), 0.2, 1, true).unwrap();
        assert_eq!(test.count(Label::Fake), 10);
        assert_eq!(test.count(Label::Real), 10);
        assert_eq!(train.len(), 80);
        assert_eq!(test.role(), SplitRole::Test);
        assert_eq!(train.role(), SplitRole::Train);
    }

    #[test]
    fn deterministic() {
        let c = corpus(30, 70);
        let a = split(&c, 0.3, 9, true).unwrap();
        let b = split(&c, 0.3, 9, true).unwrap();
        assert_eq!(ids(&a.1), ids(&b.1));
        let other = split(&c, 0.3, 10, true).unwrap();
        assert_ne!(ids(&a.1), ids(&other.1));
    }

    #[test]
    fn sa1_sized_split() {
        let (train, test) = split(&corpus(807, 1614), 0.2, 3, true).unwrap();
        assert_eq!(test.count(Label::Fake), 161);
        assert_eq!(test.count(Label::Real), 323);
        assert_eq!(train.len() + test.len(), 2421);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            split(&corpus(1, 10), 0.2, 0, true),
            Err(CorpusError::TooFewInClass { label: Label::Fake, count: 1 })
        ));
        assert!(split(&corpus(1, 10), 0.2, 0, false).is_ok());
        assert!(matches!(split(&corpus(5, 5), 0.0, 0, true), Err(CorpusError::InvalidFraction(_))));
        assert!(matches!(split(&corpus(5, 5), 1.0, 0, true), Err(CorpusError::InvalidFraction(_))));
    }

    #[test]
    fn rebalance_examples() {
        let sa1 = corpus(807, 1614);
        let bal = rebalance(&sa1, 1.0, 4).unwrap();
        assert_eq!((bal.count(Label::Fake), bal.count(Label::Real)), (807, 807));
        let native = rebalance(&sa1, 2.0, 4).unwrap();
        assert_eq!(native, sa1);
        assert!(matches!(
            rebalance(&sa1, 10.0, 4),
            Err(CorpusError::InsufficientDocuments { label: Label::Real, needed: 8070, .. })
        ));
        assert!(matches!(rebalance(&sa1, 0.0, 4), Err(CorpusError::InvalidRatio(_))));
        // deterministic by seed
        assert_eq!(rebalance(&sa1, 1.0, 4).unwrap(), bal);
        assert_ne!(ids(&rebalance(&sa1, 1.0, 5).unwrap()), ids(&bal));
    }

    proptest! {
        #[test]
        fn stratified_split_properties(fake in 2usize..60, real in 2usize..60, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let c = corpus(fake, real);
            let (train, test) = split(&c, frac, seed, true).unwrap();
            let tr = ids(&train);
            let te = ids(&test);
            prop_assert!(tr.is_disjoint(&te));
            prop_assert_eq!(tr.len() + te.len(), c.len());
            for (label, n) in [(Label::Fake, fake), (Label::Real, real)] {
                let expected = test.len() as f64 * n as f64 / c.len() as f64;
                prop_assert!((test.count(label) as f64 - expected).abs() <= 1.0 + 1e-9,
                    "{:?}: {} vs {}", label, test.count(label), expected);
            }
        }
    }
}
