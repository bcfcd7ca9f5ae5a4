use rand::Rng;
use serde::{Deserialize, Serialize};

/// Row-major dense tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    fn glorot(shape: &[usize], fan_in: usize, fan_out: usize, rng: &mut impl Rng) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut t = Tensor::zeros(shape);
        for v in &mut t.data {
            *v = rng.random_range(-limit..limit);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Layer sizes and regularization. Embedding width comes from the
/// embedding matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Architecture {
    pub seq_len: usize,
    pub filters: usize,
    pub kernel: usize,
    pub pool: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub dense1: usize,
    pub dense2: usize,
    pub dropout: f64,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            seq_len: 500,
            filters: 64,
            kernel: 5,
            pool: 4,
            hidden1: 64,
            hidden2: 32,
            dense1: 32,
            dense2: 16,
            dropout: 0.3,
        }
    }
}

impl Architecture {
    pub fn conv_len(&self) -> usize {
        self.seq_len + 1 - self.kernel
    }

    pub fn pooled_len(&self) -> usize {
        self.conv_len() / self.pool
    }

    pub fn validate(&self) -> Result<(), String> {
        let sizes = [
            self.seq_len,
            self.filters,
            self.kernel,
            self.pool,
            self.hidden1,
            self.hidden2,
            self.dense1,
            self.dense2,
        ];
        if sizes.contains(&0) {
            return Err("all layer sizes must be positive".into());
        }
        if self.kernel > self.seq_len || self.pooled_len() == 0 {
            return Err(format!(
                "sequence length {} too short for kernel {} and pool {}",
                self.seq_len, self.kernel, self.pool
            ));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(format!("dropout {} must be in [0, 1)", self.dropout));
        }
        Ok(())
    }
}

/// Weights of one LSTM layer; gate blocks are stacked input, forget,
/// output, candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer {
    pub w: Tensor,
    pub u: Tensor,
    pub b: Tensor,
}

impl LstmLayer {
    fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let mut b = Tensor::zeros(&[4 * hidden]);
        b.data[hidden..2 * hidden].fill(1.0);
        LstmLayer {
            w: Tensor::glorot(&[4 * hidden, input], input, 4 * hidden, rng),
            u: Tensor::glorot(&[4 * hidden, hidden], hidden, 4 * hidden, rng),
            b,
        }
    }

    fn zeros(input: usize, hidden: usize) -> Self {
        LstmLayer {
            w: Tensor::zeros(&[4 * hidden, input]),
            u: Tensor::zeros(&[4 * hidden, hidden]),
            b: Tensor::zeros(&[4 * hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.u.shape[1]
    }
}

/// Every trainable tensor of the network. Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub conv_w: Tensor,
    pub conv_b: Tensor,
    pub lstm1: LstmLayer,
    pub lstm2: LstmLayer,
    pub attn_w: Tensor,
    pub dense1_w: Tensor,
    pub dense1_b: Tensor,
    pub dense2_w: Tensor,
    pub dense2_b: Tensor,
    pub dense3_w: Tensor,
    pub dense3_b: Tensor,
}

pub const TENSOR_NAMES: [&str; 15] = [
    "conv.w", "conv.b", "lstm1.w", "lstm1.u", "lstm1.b", "lstm2.w", "lstm2.u", "lstm2.b",
    "attn.w", "dense1.w", "dense1.b", "dense2.w", "dense2.b", "dense3.w", "dense3.b",
];

impl Params {
    pub fn init(arch: &Architecture, embed_dim: usize, rng: &mut impl Rng) -> Self {
        let a = arch;
        let conv_in = a.kernel * embed_dim;
        Params {
            conv_w: Tensor::glorot(&[a.filters, a.kernel, embed_dim], conv_in, a.filters, rng),
            conv_b: Tensor::zeros(&[a.filters]),
            lstm1: LstmLayer::init(a.filters, a.hidden1, rng),
            lstm2: LstmLayer::init(a.hidden1, a.hidden2, rng),
            attn_w: Tensor::glorot(&[a.hidden2], a.hidden2, 1, rng),
            dense1_w: Tensor::glorot(&[a.dense1, a.hidden2], a.hidden2, a.dense1, rng),
            dense1_b: Tensor::zeros(&[a.dense1]),
            dense2_w: Tensor::glorot(&[a.dense2, a.dense1], a.dense1, a.dense2, rng),
            dense2_b: Tensor::zeros(&[a.dense2]),
            dense3_w: Tensor::glorot(&[1, a.dense2], a.dense2, 1, rng),
            dense3_b: Tensor::zeros(&[1]),
        }
    }

    pub fn zeros(arch: &Architecture, embed_dim: usize) -> Self {
        let a = arch;
        Params {
            conv_w: Tensor::zeros(&[a.filters, a.kernel, embed_dim]),
            conv_b: Tensor::zeros(&[a.filters]),
            lstm1: LstmLayer::zeros(a.filters, a.hidden1),
            lstm2: LstmLayer::zeros(a.hidden1, a.hidden2),
            attn_w: Tensor::zeros(&[a.hidden2]),
            dense1_w: Tensor::zeros(&[a.dense1, a.hidden2]),
            dense1_b: Tensor::zeros(&[a.dense1]),
            dense2_w: Tensor::zeros(&[a.dense2, a.dense1]),
            dense2_b: Tensor::zeros(&[a.dense2]),
            dense3_w: Tensor::zeros(&[1, a.dense2]),
            dense3_b: Tensor::zeros(&[1]),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.for_each_mut(|_, t| t.data.fill(0.0));
        z
    }

    /// Tensors paired with their names, in [`TENSOR_NAMES`] order.
    pub fn tensors(&self) -> [(&'static str, &Tensor); 15] {
        [
            (TENSOR_NAMES[0], &self.conv_w),
            (TENSOR_NAMES[1], &self.conv_b),
            (TENSOR_NAMES[2], &self.lstm1.w),
            (TENSOR_NAMES[3], &self.lstm1.u),
            (TENSOR_NAMES[4], &self.lstm1.b),
            (TENSOR_NAMES[5], &self.lstm2.w),
            (TENSOR_NAMES[6], &self.lstm2.u),
            (TENSOR_NAMES[7], &self.lstm2.b),
            (TENSOR_NAMES[8], &self.attn_w),
            (TENSOR_NAMES[9], &self.dense1_w),
            (TENSOR_NAMES[10], &self.dense1_b),
            (TENSOR_NAMES[11], &self.dense2_w),
            (TENSOR_NAMES[12], &self.dense2_b),
            (TENSOR_NAMES[13], &self.dense3_w),
            (TENSOR_NAMES[14], &self.dense3_b),
        ]
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&'static str, &mut Tensor)) {
        let n = TENSOR_NAMES;
        f(n[0], &mut self.conv_w);
        f(n[1], &mut self.conv_b);
        f(n[2], &mut self.lstm1.w);
        f(n[3], &mut self.lstm1.u);
        f(n[4], &mut self.lstm1.b);
        f(n[5], &mut self.lstm2.w);
        f(n[6], &mut self.lstm2.u);
        f(n[7], &mut self.lstm2.b);
        f(n[8], &mut self.attn_w);
        f(n[9], &mut self.dense1_w);
        f(n[10], &mut self.dense1_b);
        f(n[11], &mut self.dense2_w);
        f(n[12], &mut self.dense2_b);
        f(n[13], &mut self.dense3_w);
        f(n[14], &mut self.dense3_b);
    }

    /// Visit matching tensors of `self` (mutable) and `other`.
    pub fn zip_mut(&mut self, other: &Params, mut f: impl FnMut(&mut Tensor, &Tensor)) {
        let others = other.tensors();
        let mut i = 0;
        self.for_each_mut(|_, t| {
            f(t, others[i].1);
            i += 1;
        });
    }

    pub fn add_assign(&mut self, other: &Params) {
        self.zip_mut(other, |a, b| {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        });
    }

    pub fn scale(&mut self, s: f64) {
        self.for_each_mut(|_, t| t.data.iter_mut().for_each(|x| *x *= s));
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(_, t)| t.data.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(_, t)| t.data.iter().all(|x| x.is_finite()))
    }

    pub fn n_values(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

// Dense helpers. Matrices are row-major `rows × cols`.

pub(crate) fn matvec_add(out: &mut [f64], m: &[f64], cols: usize, x: &[f64]) {
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += dot(row, x);
    }
}

/// `out += mᵀ · v`.
pub(crate) fn matvec_t_add(out: &mut [f64], m: &[f64], cols: usize, v: &[f64]) {
    for (row, &vi) in m.chunks_exact(cols).zip(v) {
        if vi != 0.0 {
            axpy(out, vi, row);
        }
    }
}

/// `m += a ⊗ b`.
pub(crate) fn outer_add(m: &mut [f64], cols: usize, a: &[f64], b: &[f64]) {
    for (row, &ai) in m.chunks_exact_mut(cols).zip(a) {
        if ai != 0.0 {
            axpy(row, ai, b);
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
