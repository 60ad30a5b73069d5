//! Fully connected network with ReLU hidden layers, a linear output layer
//! and hand-written batched backpropagation.
//!
//! Parameters live in one flat vector so optimizers, Polyak averaging and
//! finite-difference checks can treat them uniformly. Layer `l` stores its
//! weights row-major as `out x in`, followed by `out` biases.

use rand::Rng;

use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

/// Activations from a batched forward pass; `acts[0]` is the input and
/// `acts[l]` the output of layer `l - 1` (post-ReLU for hidden layers).
#[derive(Debug, Clone, Default)]
pub struct Cache {
    batch: usize,
    acts: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().map_or(&[], Vec::as_slice)
    }

    pub fn input(&self) -> &[f64] {
        self.acts.first().map_or(&[], Vec::as_slice)
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

fn param_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// Uniform `±1/sqrt(fan_in)` initialization for weights and biases.
    pub fn new(sizes: &[usize], rng: &mut Stream) -> Self {
        assert!(sizes.len() >= 2, "need at least input and output widths");
        let mut params = Vec::with_capacity(param_count(sizes));
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            for _ in 0..w[0] * w[1] + w[1] {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Self {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Self {
        assert_eq!(params.len(), param_count(sizes));
        Self {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Range of the last layer's parameters inside the flat vector.
    pub fn output_layer_range(&self) -> std::ops::Range<usize> {
        let n = self.sizes.len();
        let last = self.sizes[n - 2] * self.sizes[n - 1] + self.sizes[n - 1];
        self.params.len() - last..self.params.len()
    }

    /// Zero the last layer so every output starts at 0.
    pub fn zero_output_layer(&mut self) {
        let r = self.output_layer_range();
        self.params[r].fill(0.0);
    }

    /// Batched forward pass over `x` (`batch x input_dim`, row-major).
    pub fn forward(&self, x: &[f64], batch: usize, cache: &mut Cache) {
        assert_eq!(x.len(), batch * self.input_dim());
        let n_layers = self.sizes.len() - 1;
        cache.batch = batch;
        cache.acts.resize_with(n_layers + 1, Vec::new);
        cache.acts[0].clear();
        cache.acts[0].extend_from_slice(x);
        let mut offset = 0;
        for l in 0..n_layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let hidden = l + 1 < n_layers;
            let (done, rest) = cache.acts.split_at_mut(l + 1);
            let input = &done[l];
            let out = &mut rest[0];
            out.clear();
            out.reserve(batch * n_out);
            for xb in input.chunks_exact(n_in) {
                for (o, row) in w.chunks_exact(n_in).enumerate() {
                    let z = b[o] + dot(row, xb);
                    out.push(if hidden { z.max(0.0) } else { z });
                }
            }
        }
    }

    /// Convenience forward pass for a single input.
    pub fn forward_one(&self, x: &[f64]) -> Vec<f64> {
        let mut cache = Cache::default();
        self.forward(x, 1, &mut cache);
        cache.output().to_vec()
    }

    /// Smallest `|z|` over all hidden pre-activations for the batch; a
    /// finite-difference step much smaller than this never crosses a ReLU kink.
    pub fn min_hidden_margin(&self, x: &[f64], batch: usize) -> f64 {
        assert_eq!(x.len(), batch * self.input_dim());
        let n_layers = self.sizes.len() - 1;
        let mut input = x.to_vec();
        let mut offset = 0;
        let mut margin = f64::INFINITY;
        for l in 0..n_layers - 1 {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            offset += n_in * n_out + n_out;
            let mut out = Vec::with_capacity(batch * n_out);
            for xb in input.chunks_exact(n_in) {
                for (o, row) in w.chunks_exact(n_in).enumerate() {
                    let z = b[o] + dot(row, xb);
                    margin = margin.min(z.abs());
                    out.push(z.max(0.0));
                }
            }
            input = out;
        }
        margin
    }

    /// Backpropagate `d_out` (`batch x output_dim`) through the cached pass.
    /// Parameter gradients are added into `grads` when given; the gradient
    /// with respect to the input is written into `d_input` when given.
    pub fn backward(
        &self,
        cache: &Cache,
        d_out: &[f64],
        mut grads: Option<&mut [f64]>,
        d_input: Option<&mut [f64]>,
    ) {
        let batch = cache.batch;
        let n_layers = self.sizes.len() - 1;
        assert_eq!(d_out.len(), batch * self.output_dim());
        if let Some(g) = grads.as_deref() {
            assert_eq!(g.len(), self.params.len());
        }
        let mut offsets = Vec::with_capacity(n_layers);
        let mut offset = 0;
        for w in self.sizes.windows(2) {
            offsets.push(offset);
            offset += w[0] * w[1] + w[1];
        }

        let mut delta = d_out.to_vec();
        let mut d_in = Vec::new();
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let off = offsets[l];
            let w = &self.params[off..off + n_in * n_out];
            let input = &cache.acts[l];

            if let Some(g) = grads.as_deref_mut() {
                let (gw, rest) = g[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
                for (xb, db) in input.chunks_exact(n_in).zip(delta.chunks_exact(n_out)) {
                    for (o, &d) in db.iter().enumerate() {
                        if d != 0.0 {
                            axpy(&mut gw[o * n_in..(o + 1) * n_in], d, xb);
                            rest[o] += d;
                        }
                    }
                }
            }

            let need_input_grad = l > 0 || d_input.is_some();
            if !need_input_grad {
                break;
            }
            d_in.clear();
            d_in.resize(batch * n_in, 0.0);
            for (dib, db) in d_in.chunks_exact_mut(n_in).zip(delta.chunks_exact(n_out)) {
                for (o, &d) in db.iter().enumerate() {
                    if d != 0.0 {
                        axpy(dib, d, &w[o * n_in..(o + 1) * n_in]);
                    }
                }
            }
            if l > 0 {
                // ReLU mask: the cached input is the previous layer's output
                for (di, &a) in d_in.iter_mut().zip(input) {
                    if a <= 0.0 {
                        *di = 0.0;
                    }
                }
            }
            std::mem::swap(&mut delta, &mut d_in);
        }
        if let Some(out) = d_input {
            out.copy_from_slice(&delta);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize the reduction
    let mut acc = [0.0; 4];
    let (ca, ra) = a.split_at(a.len() / 4 * 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
