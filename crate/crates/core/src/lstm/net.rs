use rand::Rng;

use super::params::{axpy, dot, matvec_add, matvec_t_add, outer_add, Architecture, LstmLayer, Params};
use crate::embed::EmbeddingMatrix;
use crate::preprocess::TokenSequence;

/// Logistic sigmoid, stable for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Binary cross-entropy of a logit against a 0/1 target, computed without
/// forming the probability.
pub fn bce_with_logit(logit: f64, target: f64) -> f64 {
    // log(1 + e^z) - y z
    let softplus = if logit > 0.0 {
        logit + (-logit).exp().ln_1p()
    } else {
        logit.exp().ln_1p()
    };
    softplus - target * logit
}

#[derive(Debug, Clone)]
pub(crate) struct LayerCache {
    /// Activated gates per step: i, f, o, g blocks of `hidden`.
    gates: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

/// Intermediate values of one forward pass, kept for backpropagation and
/// attribution.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub(crate) x: Vec<f64>,
    pub(crate) conv: Vec<f64>,
    pub(crate) pool_arg: Vec<usize>,
    pub(crate) pooled: Vec<f64>,
    pub(crate) l1: LayerCache,
    pub(crate) l2: LayerCache,
    pub(crate) active: Vec<bool>,
    pub attention: Vec<f64>,
    pub(crate) ctx: Vec<f64>,
    pub(crate) y1: Vec<f64>,
    pub(crate) y2: Vec<f64>,
    pub logit: f64,
}

impl ForwardCache {
    pub fn probability(&self) -> f64 {
        sigmoid(self.logit)
    }

    /// Conv position chosen by max pooling for `(step, filter)`.
    pub fn pool_argmax(&self, step: usize, filter: usize, filters: usize) -> usize {
        self.pool_arg[step * filters + filter]
    }

    /// Whether pooled step `s` covers at least one real token.
    pub fn is_active(&self, step: usize) -> bool {
        self.active[step]
    }
}

fn lstm_forward(layer: &LstmLayer, input: &[f64], in_dim: usize, steps: usize) -> LayerCache {
    let h = layer.hidden();
    let mut cache = LayerCache {
        gates: vec![0.0; steps * 4 * h],
        c: vec![0.0; steps * h],
        h: vec![0.0; steps * h],
    };
    let mut z = vec![0.0; 4 * h];
    for s in 0..steps {
        z.copy_from_slice(&layer.b.data);
        matvec_add(&mut z, &layer.w.data, in_dim, &input[s * in_dim..(s + 1) * in_dim]);
        if s > 0 {
            let (prev, _) = cache.h.split_at(s * h);
            matvec_add(&mut z, &layer.u.data, h, &prev[(s - 1) * h..]);
        }
        let g = &mut cache.gates[s * 4 * h..(s + 1) * 4 * h];
        for j in 0..3 * h {
            g[j] = sigmoid(z[j]);
        }
        for j in 3 * h..4 * h {
            g[j] = relu(z[j]);
        }
        for j in 0..h {
            let c_prev = if s > 0 { cache.c[(s - 1) * h + j] } else { 0.0 };
            let c = g[h + j] * c_prev + g[j] * g[3 * h + j];
            cache.c[s * h + j] = c;
            cache.h[s * h + j] = g[2 * h + j] * relu(c);
        }
    }
    cache
}

/// Backpropagate through one LSTM layer. `dh` holds the loss gradient with
/// respect to each step's output; returns the gradient for the inputs.
fn lstm_backward(
    layer: &LstmLayer,
    grad: &mut LstmLayer,
    cache: &LayerCache,
    input: &[f64],
    in_dim: usize,
    dh: &[f64],
) -> Vec<f64> {
    let h = layer.hidden();
    let steps = cache.c.len() / h;
    let mut dx = vec![0.0; steps * in_dim];
    let mut dh_next = vec![0.0; h];
    let mut dc_next = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    for s in (0..steps).rev() {
        let g = &cache.gates[s * 4 * h..(s + 1) * 4 * h];
        for j in 0..h {
            let (i, f, o, cand) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
            let c = cache.c[s * h + j];
            let c_prev = if s > 0 { cache.c[(s - 1) * h + j] } else { 0.0 };
            let dhj = dh[s * h + j] + dh_next[j];
            let d_o = dhj * relu(c);
            let dc = dhj * o * if c > 0.0 { 1.0 } else { 0.0 } + dc_next[j];
            dz[j] = dc * cand * i * (1.0 - i);
            dz[h + j] = dc * c_prev * f * (1.0 - f);
            dz[2 * h + j] = d_o * o * (1.0 - o);
            dz[3 * h + j] = if cand > 0.0 { dc * i } else { 0.0 };
            dc_next[j] = dc * f;
        }
        outer_add(&mut grad.w.data, in_dim, &dz, &input[s * in_dim..(s + 1) * in_dim]);
        axpy(&mut grad.b.data, 1.0, &dz);
        matvec_t_add(&mut dx[s * in_dim..(s + 1) * in_dim], &layer.w.data, in_dim, &dz);
        dh_next.fill(0.0);
        if s > 0 {
            outer_add(&mut grad.u.data, h, &dz, &cache.h[(s - 1) * h..s * h]);
            matvec_t_add(&mut dh_next, &layer.u.data, h, &dz);
        }
    }
    dx
}

/// Forward pass. With `dropout_rng` set, inverted dropout is applied to the
/// embedded inputs.
pub(crate) fn forward<R: Rng>(
    arch: &Architecture,
    embedding: &EmbeddingMatrix,
    p: &Params,
    seq: &TokenSequence,
    dropout_rng: Option<&mut R>,
) -> ForwardCache {
    let d = embedding.dim();
    let t_len = arch.seq_len;
    let k = arch.kernel;
    let nf = arch.filters;
    let pool = arch.pool;
    let tc = arch.conv_len();
    let tp = arch.pooled_len();
    debug_assert_eq!(seq.indices.len(), t_len);

    let mut x = vec![0.0; t_len * d];
    for (t, &ix) in seq.indices.iter().enumerate() {
        if ix != 0 {
            x[t * d..(t + 1) * d].copy_from_slice(embedding.row(ix));
        }
    }
    if let Some(rng) = dropout_rng {
        if arch.dropout > 0.0 {
            let keep = 1.0 / (1.0 - arch.dropout);
            for v in &mut x {
                let u: f64 = rng.random();
                *v = if u < arch.dropout { 0.0 } else { *v * keep };
            }
        }
    }

    let mut conv = vec![0.0; tc * nf];
    for t in 0..tc {
        let out = &mut conv[t * nf..(t + 1) * nf];
        if t >= seq.true_length {
            // window holds only padding rows, which are zero
            for (o, b) in out.iter_mut().zip(&p.conv_b.data) {
                *o = relu(*b);
            }
            continue;
        }
        let window = &x[t * d..(t + k) * d];
        for (f, o) in out.iter_mut().enumerate() {
            let w = &p.conv_w.data[f * k * d..(f + 1) * k * d];
            *o = relu(p.conv_b.data[f] + dot(w, window));
        }
    }

    let mut pooled = vec![0.0; tp * nf];
    let mut pool_arg = vec![0; tp * nf];
    for s in 0..tp {
        for f in 0..nf {
            let mut best = s * pool;
            for t in s * pool + 1..(s + 1) * pool {
                if conv[t * nf + f] > conv[best * nf + f] {
                    best = t;
                }
            }
            pooled[s * nf + f] = conv[best * nf + f];
            pool_arg[s * nf + f] = best;
        }
    }

    let l1 = lstm_forward(&p.lstm1, &pooled, nf, tp);
    let l2 = lstm_forward(&p.lstm2, &l1.h, arch.hidden1, tp);

    let h2 = arch.hidden2;
    let mut active: Vec<bool> = (0..tp).map(|s| s * pool < seq.true_length).collect();
    if !active.iter().any(|&a| a) {
        active.fill(true);
    }
    let scores: Vec<f64> = (0..tp)
        .map(|s| dot(&p.attn_w.data, &l2.h[s * h2..(s + 1) * h2]))
        .collect();
    let max = scores
        .iter()
        .zip(&active)
        .filter(|(_, &a)| a)
        .map(|(v, _)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut attention: Vec<f64> = scores
        .iter()
        .zip(&active)
        .map(|(v, &a)| if a { (v - max).exp() } else { 0.0 })
        .collect();
    let total: f64 = attention.iter().sum();
    attention.iter_mut().for_each(|a| *a /= total);
    let mut ctx = vec![0.0; h2];
    for s in 0..tp {
        if attention[s] != 0.0 {
            axpy(&mut ctx, attention[s], &l2.h[s * h2..(s + 1) * h2]);
        }
    }

    let mut y1 = p.dense1_b.data.clone();
    matvec_add(&mut y1, &p.dense1_w.data, h2, &ctx);
    y1.iter_mut().for_each(|v| *v = relu(*v));
    let mut y2 = p.dense2_b.data.clone();
    matvec_add(&mut y2, &p.dense2_w.data, arch.dense1, &y1);
    y2.iter_mut().for_each(|v| *v = relu(*v));
    let logit = p.dense3_b.data[0] + dot(&p.dense3_w.data, &y2);

    ForwardCache {
        x,
        conv,
        pool_arg,
        pooled,
        l1,
        l2,
        active,
        attention,
        ctx,
        y1,
        y2,
        logit,
    }
}

/// Gradients of the loss with respect to every parameter, given
/// `dlogit = dL/dz` at the output logit.
pub(crate) fn backward(
    arch: &Architecture,
    embed_dim: usize,
    p: &Params,
    cache: &ForwardCache,
    dlogit: f64,
) -> Params {
    let mut g = p.zeros_like();
    let (h1, h2, n1) = (arch.hidden1, arch.hidden2, arch.dense1);
    let nf = arch.filters;
    let tp = arch.pooled_len();
    let k = arch.kernel;
    let d = embed_dim;

    g.dense3_b.data[0] = dlogit;
    axpy(&mut g.dense3_w.data, dlogit, &cache.y2);
    let mut da2: Vec<f64> = p.dense3_w.data.iter().map(|w| w * dlogit).collect();
    for (v, y) in da2.iter_mut().zip(&cache.y2) {
        if *y <= 0.0 {
            *v = 0.0;
        }
    }
    outer_add(&mut g.dense2_w.data, n1, &da2, &cache.y1);
    axpy(&mut g.dense2_b.data, 1.0, &da2);
    let mut da1 = vec![0.0; n1];
    matvec_t_add(&mut da1, &p.dense2_w.data, n1, &da2);
    for (v, y) in da1.iter_mut().zip(&cache.y1) {
        if *y <= 0.0 {
            *v = 0.0;
        }
    }
    outer_add(&mut g.dense1_w.data, h2, &da1, &cache.ctx);
    axpy(&mut g.dense1_b.data, 1.0, &da1);
    let mut dctx = vec![0.0; h2];
    matvec_t_add(&mut dctx, &p.dense1_w.data, h2, &da1);

    // attention
    let hs = &cache.l2.h;
    let mut dh2 = vec![0.0; tp * h2];
    let dalpha: Vec<f64> = (0..tp)
        .map(|s| dot(&dctx, &hs[s * h2..(s + 1) * h2]))
        .collect();
    let mean: f64 = (0..tp).map(|s| cache.attention[s] * dalpha[s]).sum();
    for s in 0..tp {
        let a = cache.attention[s];
        if a != 0.0 {
            axpy(&mut dh2[s * h2..(s + 1) * h2], a, &dctx);
        }
        if cache.active[s] {
            let dscore = a * (dalpha[s] - mean);
            axpy(&mut g.attn_w.data, dscore, &hs[s * h2..(s + 1) * h2]);
            axpy(&mut dh2[s * h2..(s + 1) * h2], dscore, &p.attn_w.data);
        }
    }

    let dh1 = lstm_backward(&p.lstm2, &mut g.lstm2, &cache.l2, &cache.l1.h, h1, &dh2);
    let dpooled = lstm_backward(&p.lstm1, &mut g.lstm1, &cache.l1, &cache.pooled, nf, &dh1);

    for s in 0..tp {
        for f in 0..nf {
            let dv = dpooled[s * nf + f];
            if dv == 0.0 {
                continue;
            }
            let t = cache.pool_arg[s * nf + f];
            if cache.conv[t * nf + f] <= 0.0 {
                continue;
            }
            g.conv_b.data[f] += dv;
            let window = &cache.x[t * d..(t + k) * d];
            axpy(&mut g.conv_w.data[f * k * d..(f + 1) * k * d], dv, window);
        }
    }
    g
}
