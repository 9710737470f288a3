//! Fully connected layers stored in one flat parameter vector.
//!
//! Each output element is accumulated in a fixed order (bias, then inputs in
//! ascending index), independent of the batch size, so evaluating one row or
//! a whole batch gives bit-identical results.

use crate::channel::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }

    #[inline]
    fn apply(self, x: &mut [f64]) {
        match self {
            Activation::Relu => x.iter_mut().for_each(|v| *v = v.max(0.0)),
            Activation::Tanh => x.iter_mut().for_each(|v| *v = v.tanh()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub const fn new(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            activation,
        }
    }

    fn num_params(&self) -> usize {
        self.in_dim * self.out_dim + self.out_dim
    }
}

/// Row-major `rows x cols` matrix of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
}

/// Parameters of a stack of dense layers split into an encoder and a decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    k: usize,
    latent_dim: usize,
    layers: Vec<LayerSpec>,
    encoder_layers: usize,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl MlpParams {
    /// The symmetric autoencoder `K -> 4K -> 4K -> 3 -> 4K -> 4K -> K`.
    pub fn layout(k: usize) -> Vec<LayerSpec> {
        Self::layout_with(k, 4 * k, 3)
    }

    pub fn layout_with(k: usize, hidden: usize, latent: usize) -> Vec<LayerSpec> {
        use Activation::{Relu, Tanh};
        vec![
            LayerSpec::new(k, hidden, Relu),
            LayerSpec::new(hidden, hidden, Relu),
            LayerSpec::new(hidden, latent, Tanh),
            LayerSpec::new(latent, hidden, Relu),
            LayerSpec::new(hidden, hidden, Relu),
            LayerSpec::new(hidden, k, Tanh),
        ]
    }

    /// Zero-valued parameters for the given layer stack.
    pub fn zeros(layers: Vec<LayerSpec>, encoder_layers: usize) -> Result<Self> {
        if layers.is_empty() || encoder_layers == 0 || encoder_layers >= layers.len() {
            return Err(Error::Shape(
                "need at least one encoder and one decoder layer".into(),
            ));
        }
        if layers.iter().any(|l| l.in_dim == 0 || l.out_dim == 0) {
            return Err(Error::Shape("layer dimensions must be at least 1".into()));
        }
        if layers.windows(2).any(|w| w[0].out_dim != w[1].in_dim) {
            return Err(Error::Shape("layer dimensions do not chain".into()));
        }
        let k = layers[0].in_dim;
        if layers[layers.len() - 1].out_dim != k {
            return Err(Error::Shape(
                "decoder output width must equal encoder input width".into(),
            ));
        }
        let latent_dim = layers[encoder_layers - 1].out_dim;
        let mut offsets = Vec::with_capacity(layers.len() + 1);
        let mut total = 0;
        for l in &layers {
            offsets.push(total);
            total += l.num_params();
        }
        offsets.push(total);
        Ok(Self {
            k,
            latent_dim,
            layers,
            encoder_layers,
            offsets,
            values: vec![0.0; total],
        })
    }

    /// Uniform initialization with bound `sqrt(3 / fan_in)`; biases start at zero.
    pub fn init(
        layers: Vec<LayerSpec>,
        encoder_layers: usize,
        rng: &mut RngStream,
    ) -> Result<Self> {
        let mut p = Self::zeros(layers, encoder_layers)?;
        for idx in 0..p.layers.len() {
            let spec = p.layers[idx];
            let bound = (3.0 / spec.in_dim as f64).sqrt();
            let (w, _) = p.layer_mut(idx);
            for x in w {
                *x = bound * (2.0 * rng.uniform() - 1.0);
            }
        }
        Ok(p)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn latent_dim(&self) -> usize {
        self.latent_dim
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn encoder_layers(&self) -> usize {
        self.encoder_layers
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn num_params(&self) -> usize {
        self.values.len()
    }

    /// Weights (`in x out`, row-major) and biases of one layer.
    pub fn layer(&self, idx: usize) -> (&[f64], &[f64]) {
        let spec = self.layers[idx];
        let block = &self.values[self.offsets[idx]..self.offsets[idx + 1]];
        block.split_at(spec.in_dim * spec.out_dim)
    }

    pub fn layer_mut(&mut self, idx: usize) -> (&mut [f64], &mut [f64]) {
        let spec = self.layers[idx];
        let block = &mut self.values[self.offsets[idx]..self.offsets[idx + 1]];
        block.split_at_mut(spec.in_dim * spec.out_dim)
    }

    pub(crate) fn layer_offset(&self, idx: usize) -> usize {
        self.offsets[idx]
    }

    pub(crate) fn encoder_range(&self) -> std::ops::Range<usize> {
        0..self.encoder_layers
    }

    pub(crate) fn decoder_range(&self) -> std::ops::Range<usize> {
        self.encoder_layers..self.layers.len()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// `y = act(x W + b)` for a batch of `rows` samples.
pub(crate) fn dense_forward(
    x: &[f64],
    rows: usize,
    spec: LayerSpec,
    w: &[f64],
    b: &[f64],
    out: &mut Vec<f64>,
) {
    let (din, dout) = (spec.in_dim, spec.out_dim);
    out.clear();
    out.resize(rows * dout, 0.0);
    for s in 0..rows {
        let xs = &x[s * din..(s + 1) * din];
        let ys = &mut out[s * dout..(s + 1) * dout];
        ys.copy_from_slice(b);
        for (i, &xi) in xs.iter().enumerate() {
            let wi = &w[i * dout..(i + 1) * dout];
            for (y, &wij) in ys.iter_mut().zip(wi) {
                *y += xi * wij;
            }
        }
        spec.activation.apply(ys);
    }
}

/// Runs `layers` of `p` over `x`, returning the final activations.
pub(crate) fn run_layers(
    p: &MlpParams,
    layers: std::ops::Range<usize>,
    x: &Matrix,
) -> Result<Matrix> {
    let first = p.layers[layers.start];
    if x.cols != first.in_dim {
        return Err(Error::Shape(format!(
            "input has {} columns, layer expects {}",
            x.cols, first.in_dim
        )));
    }
    let mut cur = x.data.clone();
    let mut next = Vec::new();
    let mut width = x.cols;
    for idx in layers {
        let spec = p.layers[idx];
        let (w, b) = p.layer(idx);
        dense_forward(&cur, x.rows, spec, w, b, &mut next);
        std::mem::swap(&mut cur, &mut next);
        width = spec.out_dim;
    }
    Matrix::from_vec(x.rows, width, cur)
}

/// Accumulates parameter gradients of one layer and returns the input gradient.
///
/// `input` is the layer input, `output` its activated output and `d_out` the
/// loss gradient with respect to `output`.
pub(crate) fn dense_backward(
    input: &[f64],
    output: &[f64],
    d_out: &[f64],
    rows: usize,
    spec: LayerSpec,
    w: &[f64],
    grad_w: &mut [f64],
    grad_b: &mut [f64],
    d_in: &mut Vec<f64>,
) {
    let (din, dout) = (spec.in_dim, spec.out_dim);
    let mut dz = vec![0.0; dout];
    d_in.clear();
    d_in.resize(rows * din, 0.0);
    for s in 0..rows {
        let ys = &output[s * dout..(s + 1) * dout];
        let gs = &d_out[s * dout..(s + 1) * dout];
        match spec.activation {
            Activation::Relu => {
                for ((d, &y), &g) in dz.iter_mut().zip(ys).zip(gs) {
                    *d = if y > 0.0 { g } else { 0.0 };
                }
            }
            Activation::Tanh => {
                for ((d, &y), &g) in dz.iter_mut().zip(ys).zip(gs) {
                    *d = g * (1.0 - y * y);
                }
            }
        }
        for (gb, &d) in grad_b.iter_mut().zip(&dz) {
            *gb += d;
        }
        let xs = &input[s * din..(s + 1) * din];
        let dxs = &mut d_in[s * din..(s + 1) * din];
        for i in 0..din {
            let gw = &mut grad_w[i * dout..(i + 1) * dout];
            let xi = xs[i];
            for (g, &d) in gw.iter_mut().zip(&dz) {
                *g += xi * d;
            }
            let wi = &w[i * dout..(i + 1) * dout];
            dxs[i] = wi.iter().zip(&dz).map(|(a, b)| a * b).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_shapes() {
        let layers = MlpParams::layout(8);
        let dims: Vec<(usize, usize)> = layers.iter().map(|l| (l.in_dim, l.out_dim)).collect();
        assert_eq!(
            dims,
            vec![(8, 32), (32, 32), (32, 3), (3, 32), (32, 32), (32, 8)]
        );
        assert_eq!(layers[2].activation, Activation::Tanh);
        assert_eq!(layers[5].activation, Activation::Tanh);
        let p = MlpParams::zeros(layers, 3).unwrap();
        assert_eq!(p.latent_dim(), 3);
        assert_eq!(
            p.num_params(),
            8 * 32 + 32 + 32 * 32 + 32 + 32 * 3 + 3 + 3 * 32 + 32 + 32 * 32 + 32 + 32 * 8 + 8
        );
    }

    #[test]
    fn broken_chains_are_rejected() {
        use Activation::*;
        let bad = vec![LayerSpec::new(4, 8, Relu), LayerSpec::new(7, 4, Tanh)];
        assert!(MlpParams::zeros(bad, 1).is_err());
        let wrong_out = vec![LayerSpec::new(4, 3, Tanh), LayerSpec::new(3, 5, Tanh)];
        assert!(MlpParams::zeros(wrong_out, 1).is_err());
    }

    #[test]
    fn batch_and_row_evaluation_agree_bitwise() {
        let mut rng = RngStream::new(4);
        let p = MlpParams::init(MlpParams::layout(4), 3, &mut rng).unwrap();
        let x =
            Matrix::from_vec(5, 4, (0..20).map(|_| 2.0 * rng.uniform() - 1.0).collect()).unwrap();
        let batch = run_layers(&p, 0..6, &x).unwrap();
        for r in 0..5 {
            let single = run_layers(
                &p,
                0..6,
                &Matrix::from_vec(1, 4, x.row(r).to_vec()).unwrap(),
            )
            .unwrap();
            assert_eq!(single.row(0), batch.row(r));
        }
    }
}
