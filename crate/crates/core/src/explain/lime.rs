use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{document_tokens, ExplainError, Explanation, Method, WordWeight, SCHEMA_VERSION};
use crate::corpus::{Document, Label};
use crate::par::{self, Execution};
use crate::{seed, TextClassifier};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimeConfig {
    pub num_samples: usize,
    pub kernel_width: f64,
    pub num_features: usize,
    pub ridge: f64,
    pub seed: u64,
    #[serde(skip)]
    pub execution: Execution,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            num_samples: 1000,
            kernel_width: 0.75,
            num_features: 10,
            ridge: 1e-3,
            seed: 0,
            execution: Execution::default(),
        }
    }
}

/// Presence masks over `d` features. The first mask keeps everything; each
/// other one drops a uniformly drawn number (1..=d) of uniformly chosen
/// features.
pub fn sample_masks(d: usize, n: usize, rng: &mut impl Rng) -> Vec<Vec<bool>> {
    let mut masks = Vec::with_capacity(n);
    if n > 0 {
        masks.push(vec![true; d]);
    }
    for _ in 1..n {
        let mut m = vec![true; d];
        let k = rng.random_range(1..=d);
        for j in index::sample(rng, d, k) {
            m[j] = false;
        }
        masks.push(m);
    }
    masks
}

/// Cosine distance between a mask and the all-ones mask.
fn cosine_distance(mask: &[bool]) -> f64 {
    let on = mask.iter().filter(|&&b| b).count();
    1.0 - (on as f64 / mask.len() as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    /// Weighted coefficient of determination on the fitting samples.
    pub score: f64,
}

impl Surrogate {
    pub fn predict(&self, mask: &[bool]) -> f64 {
        self.intercept
            + mask
                .iter()
                .zip(&self.coefficients)
                .filter(|(&m, _)| m)
                .map(|(_, c)| c)
                .sum::<f64>()
    }
}

/// Weighted ridge regression of `y` on the masks. The intercept is not
/// penalised.
pub fn fit_surrogate(
    masks: &[Vec<bool>],
    y: &[f64],
    weights: &[f64],
    ridge: f64,
) -> Result<Surrogate, ExplainError> {
    let d = masks.first().map_or(0, Vec::len);
    let wsum: f64 = weights.iter().sum();
    let mut zbar = vec![0.0; d];
    for (m, w) in masks.iter().zip(weights) {
        for (z, &on) in zbar.iter_mut().zip(m) {
            if on {
                *z += w;
            }
        }
    }
    zbar.iter_mut().for_each(|z| *z /= wsum);
    // Shifting y by a constant only moves the intercept; using y[0] keeps a
    // constant response exactly zero.
    let y0 = y[0];
    let mut a = vec![0.0; d * d];
    let mut b = vec![0.0; d];
    let mut zc = vec![0.0; d];
    for ((m, &yi), &w) in masks.iter().zip(y).zip(weights) {
        for j in 0..d {
            zc[j] = if m[j] { 1.0 } else { 0.0 } - zbar[j];
        }
        let r = yi - y0;
        for j in 0..d {
            let wz = w * zc[j];
            b[j] += wz * r;
            let row = &mut a[j * d..j * d + j + 1];
            for (k, v) in row.iter_mut().enumerate() {
                *v += wz * zc[k];
            }
        }
    }
    for j in 0..d {
        a[j * d + j] += ridge;
    }
    let coefficients = cholesky_solve(&mut a, d, &b).ok_or(ExplainError::Singular)?;
    let ybar = y.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / wsum;
    let intercept = ybar - coefficients.iter().zip(&zbar).map(|(c, z)| c * z).sum::<f64>();
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    let s = Surrogate {
        intercept,
        coefficients,
        score: 0.0,
    };
    for ((m, &yi), &w) in masks.iter().zip(y).zip(weights) {
        ss_res += w * (yi - s.predict(m)).powi(2);
        ss_tot += w * (yi - ybar).powi(2);
    }
    let score = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(Surrogate { score, ..s })
}

/// Solve `A x = b` for symmetric positive definite `A`, of which only the
/// lower triangle is read. `A` is overwritten by its Cholesky factor.
fn cholesky_solve(a: &mut [f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) {
            return None;
        }
        let l = diag.sqrt();
        a[j * n + j] = l;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / l;
        }
    }
    let mut x = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= a[i * n + k] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            x[i] -= a[k * n + i] * x[k];
        }
        x[i] /= a[i * n + i];
    }
    Some(x)
}

/// Explain `model`'s prediction on `doc` with a local linear surrogate over
/// word presence.
pub fn lime_explain<C: TextClassifier + ?Sized>(
    model: &C,
    doc: &Document,
    cfg: &LimeConfig,
) -> Result<Explanation, ExplainError> {
    if cfg.num_samples < 10 {
        return Err(ExplainError::TooFewSamples(cfg.num_samples));
    }
    if !(cfg.kernel_width > 0.0 && cfg.kernel_width.is_finite()) {
        return Err(ExplainError::InvalidConfig(format!("kernel_width {}", cfg.kernel_width)));
    }
    if !(cfg.ridge > 0.0 && cfg.ridge.is_finite()) {
        return Err(ExplainError::InvalidConfig(format!("ridge {}", cfg.ridge)));
    }
    let tokens = document_tokens(&doc.text);
    if tokens.is_empty() {
        return Err(ExplainError::NoTokens(doc.id.clone()));
    }
    // unique tokens in order of first appearance
    let mut features: Vec<(&str, usize)> = Vec::new();
    let mut feature_of = Vec::with_capacity(tokens.len());
    let mut seen = std::collections::HashMap::new();
    for (pos, t) in tokens.iter().enumerate() {
        let f = *seen.entry(t.as_str()).or_insert_with(|| {
            features.push((t.as_str(), pos));
            features.len() - 1
        });
        feature_of.push(f);
    }
    let d = features.len();

    let mut rng = seed::rng(cfg.seed, &[seed::STREAM_LIME, &doc.id]);
    let masks = sample_masks(d, cfg.num_samples, &mut rng);
    let y = par::map(cfg.execution, &masks, |m| {
        let kept: Vec<&str> = tokens
            .iter()
            .zip(&feature_of)
            .filter(|(_, &f)| m[f])
            .map(|(t, _)| t.as_str())
            .collect();
        model.predict_proba(&kept.join(" "))
    });
    if let Some((sample, &value)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(ExplainError::NonFinitePrediction { sample, value });
    }
    let kw2 = cfg.kernel_width * cfg.kernel_width;
    let weights: Vec<f64> = masks
        .iter()
        .map(|m| (-cosine_distance(m).powi(2) / kw2).exp())
        .collect();
    let surrogate = fit_surrogate(&masks, &y, &weights, cfg.ridge)?;

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        surrogate.coefficients[b]
            .abs()
            .total_cmp(&surrogate.coefficients[a].abs())
            .then(a.cmp(&b))
    });
    order.truncate(cfg.num_features);
    let word_weights = order
        .into_iter()
        .map(|f| WordWeight {
            token: features[f].0.to_string(),
            position: features[f].1,
            weight: surrogate.coefficients[f],
        })
        .collect();
    let probability = model.predict_proba(&doc.text);
    let mut warnings = Vec::new();
    if surrogate.coefficients.iter().all(|&c| c == 0.0) {
        warnings.push(format!(
            "prediction for document {} does not change when words are removed",
            doc.id
        ));
    }
    Ok(Explanation {
        schema_version: SCHEMA_VERSION,
        doc_id: doc.id.clone(),
        predicted_label: Label::from_fake(probability >= 0.5),
        probability,
        method: Method::Lime,
        top_k: cfg.num_features,
        word_weights,
        seed: Some(cfg.seed),
        model_hash: None,
        surrogate_score: Some(surrogate.score),
        warnings,
        provenance: Default::default(),
    })
}
