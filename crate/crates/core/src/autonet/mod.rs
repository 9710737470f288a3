//! The soft-bit autoencoder.
//!
//! An encoder maps the `K` soft bits of a symbol to a tanh-bounded latent
//! vector (three values for the standard layout), a Gaussian noise layer
//! stands in for quantization during training, and a mirrored decoder
//! reconstructs the soft bits. Training minimizes
//!
//! ```text
//! sum_i sum_j (s_ij - s~_ij)^2 / (|s_ij| + eps)
//! ```
//!
//! which emphasises accurate reconstruction of low-confidence bits.

mod adam;
mod dataset;
mod io;
mod mlp;
mod train;

pub use adam::{AdamState, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use dataset::{generate_dataset, generate_dataset_on, Dataset};
pub use io::{load_params, load_params_expecting, save_params};
pub use mlp::{Activation, LayerSpec, Matrix, MlpParams};
pub use train::{train, train_from, TrainConfig, TrainOutcome};

use crate::channel::RngStream;
use crate::{Error, Result};

/// Encoder half: soft bits to latent.
pub fn encoder_forward(soft_bits: &Matrix, p: &MlpParams) -> Result<Matrix> {
    mlp::run_layers(p, p.encoder_range(), soft_bits)
}

/// Decoder half: latent to reconstructed soft bits.
pub fn decoder_forward(latent: &Matrix, p: &MlpParams) -> Result<Matrix> {
    mlp::run_layers(p, p.decoder_range(), latent)
}

/// Adds i.i.d. `N(0, noise_std^2)` to every element. Training only.
pub fn noise_layer(z: &Matrix, noise_std: f64, rng: &mut RngStream) -> Matrix {
    let mut out = z.clone();
    if noise_std > 0.0 {
        for v in out.as_mut_slice() {
            *v += noise_std * rng.gaussian();
        }
    }
    out
}

/// Draws the additive latent noise for a batch.
pub fn latent_noise(rows: usize, cols: usize, noise_std: f64, rng: &mut RngStream) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    if noise_std > 0.0 {
        for v in m.as_mut_slice() {
            *v = noise_std * rng.gaussian();
        }
    }
    m
}

fn check_same_shape(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Weighted squared reconstruction loss, summed over samples and bits.
pub fn weighted_loss(target: &Matrix, recon: &Matrix, eps: f64) -> Result<f64> {
    check_same_shape(target, recon)?;
    Ok(target
        .as_slice()
        .iter()
        .zip(recon.as_slice())
        .map(|(&t, &r)| (t - r) * (t - r) / (t.abs() + eps))
        .sum())
}

/// Full autoencoder pass for a given noise realization (`None` = no noise).
pub fn autoencode(p: &MlpParams, batch: &Matrix, noise: Option<&Matrix>) -> Result<Matrix> {
    let mut z = encoder_forward(batch, p)?;
    if let Some(n) = noise {
        check_same_shape(&z, n)?;
        for (a, b) in z.as_mut_slice().iter_mut().zip(n.as_slice()) {
            *a += b;
        }
    }
    decoder_forward(&z, p)
}

/// Loss and its exact gradient with respect to every parameter, for a fixed
/// noise realization. The gradient has the same layout as `p.values()`.
pub fn loss_and_gradients(
    p: &MlpParams,
    batch: &Matrix,
    noise: Option<&Matrix>,
    eps: f64,
) -> Result<(f64, Vec<f64>)> {
    if batch.cols() != p.k() {
        return Err(Error::Shape(format!(
            "batch has {} columns, net expects {}",
            batch.cols(),
            p.k()
        )));
    }
    let rows = batch.rows();
    let n_layers = p.layers().len();
    let mut inputs: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    let mut cur = batch.as_slice().to_vec();
    for idx in 0..n_layers {
        let spec = p.layers()[idx];
        let (w, b) = p.layer(idx);
        let mut out = Vec::new();
        mlp::dense_forward(&cur, rows, spec, w, b, &mut out);
        inputs.push(std::mem::take(&mut cur));
        cur = out.clone();
        if idx + 1 == p.encoder_layers() {
            if let Some(n) = noise {
                if n.rows() != rows || n.cols() != spec.out_dim {
                    return Err(Error::Shape("noise does not match the latent batch".into()));
                }
                for (a, b) in cur.iter_mut().zip(n.as_slice()) {
                    *a += b;
                }
            }
        }
        outputs.push(out);
    }

    let target = batch.as_slice();
    let recon = &outputs[n_layers - 1];
    let mut loss = 0.0;
    let mut d: Vec<f64> = target
        .iter()
        .zip(recon)
        .map(|(&t, &r)| {
            let w = 1.0 / (t.abs() + eps);
            loss += (t - r) * (t - r) * w;
            2.0 * (r - t) * w
        })
        .collect();

    let mut grads = vec![0.0; p.num_params()];
    let mut d_in = Vec::new();
    for idx in (0..n_layers).rev() {
        let spec = p.layers()[idx];
        let (w, _) = p.layer(idx);
        let off = p.layer_offset(idx);
        let (gw, gb) = grads[off..off + spec.in_dim * spec.out_dim + spec.out_dim]
            .split_at_mut(spec.in_dim * spec.out_dim);
        mlp::dense_backward(
            &inputs[idx],
            &outputs[idx],
            &d,
            rows,
            spec,
            w,
            gw,
            gb,
            &mut d_in,
        );
        // the additive noise layer has unit gradient, so d_in flows straight on
        std::mem::swap(&mut d, &mut d_in);
    }
    Ok((loss, grads))
}

/// Draws a noise realization from `rng` and returns loss and gradients.
pub fn backward(
    p: &MlpParams,
    batch: &Matrix,
    noise_std: f64,
    eps: f64,
    rng: &mut RngStream,
) -> Result<(f64, Vec<f64>)> {
    let noise = latent_noise(batch.rows(), p.latent_dim(), noise_std, rng);
    loss_and_gradients(p, batch, Some(&noise), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Activation::{Relu, Tanh};

    fn small_net() -> MlpParams {
        // 2 -> 2 (relu) -> 1 (tanh) | 1 -> 2 (tanh)
        let layers = vec![
            LayerSpec::new(2, 2, Relu),
            LayerSpec::new(2, 1, Tanh),
            LayerSpec::new(1, 2, Tanh),
        ];
        let mut p = MlpParams::zeros(layers, 2).unwrap();
        p.values_mut().copy_from_slice(&[
            0.5, -1.0, 0.25, 2.0, 0.1, -0.2, // layer 0: W (2x2), b (2)
            1.5, -0.5, 0.05, // layer 1: W (2x1), b (1)
            0.8, -1.2, 0.3, 0.0, // layer 2: W (1x2), b (2)
        ]);
        p
    }

    #[test]
    fn hand_computed_forward() {
        let p = small_net();
        let x = Matrix::from_vec(1, 2, vec![0.6, -0.4]).unwrap();
        // straight-line evaluation
        let h0 = (0.6f64 * 0.5 + -0.4 * 0.25 + 0.1).max(0.0);
        let h1 = (0.6f64 * -1.0 + -0.4 * 2.0 - 0.2).max(0.0);
        let z = (h0 * 1.5 + h1 * -0.5 + 0.05).tanh();
        let y0 = (z * 0.8 + 0.3).tanh();
        let y1 = (z * -1.2).tanh();
        let zf = encoder_forward(&x, &p).unwrap();
        assert!((zf.row(0)[0] - z).abs() < 1e-15);
        let yf = decoder_forward(&zf, &p).unwrap();
        assert!((yf.row(0)[0] - y0).abs() < 1e-15);
        assert!((yf.row(0)[1] - y1).abs() < 1e-15);
    }

    #[test]
    fn zero_weights_give_zero_outputs() {
        let p = MlpParams::zeros(MlpParams::layout(4), 3).unwrap();
        let x = Matrix::from_vec(2, 4, vec![0.3, -0.9, 1.0, 0.0, 0.5, 0.5, -0.2, 0.1]).unwrap();
        let z = encoder_forward(&x, &p).unwrap();
        assert!(z.as_slice().iter().all(|&v| v == 0.0));
        let y = decoder_forward(&z, &p).unwrap();
        assert!(y.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let p = MlpParams::zeros(MlpParams::layout(4), 3).unwrap();
        let x = Matrix::zeros(3, 5);
        assert!(matches!(encoder_forward(&x, &p), Err(Error::Shape(_))));
        assert!(matches!(decoder_forward(&x, &p), Err(Error::Shape(_))));
        assert!(weighted_loss(&Matrix::zeros(2, 2), &Matrix::zeros(2, 3), 1e-4).is_err());
    }

    #[test]
    fn outputs_are_bounded() {
        let mut rng = RngStream::new(8);
        let mut p = MlpParams::init(MlpParams::layout(4), 3, &mut rng).unwrap();
        for v in p.values_mut() {
            *v *= 50.0;
        }
        let x = Matrix::from_vec(
            100,
            4,
            (0..400).map(|_| 2.0 * rng.uniform() - 1.0).collect(),
        )
        .unwrap();
        let z = encoder_forward(&x, &p).unwrap();
        assert!(z.as_slice().iter().all(|v| v.abs() <= 1.0));
        let y = decoder_forward(&z, &p).unwrap();
        assert!(y.as_slice().iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn weighted_loss_examples() {
        let a = Matrix::from_vec(1, 1, vec![0.5]).unwrap();
        let b = Matrix::from_vec(1, 1, vec![0.4]).unwrap();
        assert_eq!(weighted_loss(&a, &a, 1e-4).unwrap(), 0.0);
        let l = weighted_loss(&a, &b, 1e-4).unwrap();
        assert!((l - 0.01 / 0.5001).abs() < 1e-15);
        assert!((l - 0.0199960).abs() < 1e-7);
        let z = Matrix::from_vec(1, 1, vec![0.0]).unwrap();
        let e = Matrix::from_vec(1, 1, vec![0.01]).unwrap();
        assert!((weighted_loss(&z, &e, 1e-4).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noise_layer_statistics() {
        let z = Matrix::zeros(1000, 1000);
        assert_eq!(noise_layer(&z, 0.0, &mut RngStream::new(1)), z);
        let n = noise_layer(&z, 1e-3, &mut RngStream::new(1));
        let count = n.as_slice().len() as f64;
        let mean = n.as_slice().iter().sum::<f64>() / count;
        let std = (n
            .as_slice()
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / count)
            .sqrt();
        assert!((0.99e-3..=1.01e-3).contains(&std), "{std}");
        assert!(mean.abs() <= 3.0 * 1e-3 / 1e3, "{mean}");
    }

    #[test]
    fn noise_gradient_is_identity() {
        // d loss / d z~ computed by the backward pass equals d loss / d z, so
        // shifting the noise by delta moves the loss like shifting z would
        let mut rng = RngStream::new(21);
        let p = MlpParams::init(MlpParams::layout(4), 3, &mut rng).unwrap();
        let x =
            Matrix::from_vec(3, 4, (0..12).map(|_| 2.0 * rng.uniform() - 1.0).collect()).unwrap();
        let base = latent_noise(3, 3, 0.1, &mut rng);
        let h = 1e-6;
        for idx in 0..9 {
            let mut plus = base.clone();
            plus.as_mut_slice()[idx] += h;
            let mut minus = base.clone();
            minus.as_mut_slice()[idx] -= h;
            let lp = weighted_loss(&x, &autoencode(&p, &x, Some(&plus)).unwrap(), 1e-4).unwrap();
            let lm = weighted_loss(&x, &autoencode(&p, &x, Some(&minus)).unwrap(), 1e-4).unwrap();
            let dz = (lp - lm) / (2.0 * h);
            // the same perturbation applied to the pre-noise latent via the
            // decoder alone
            let z = encoder_forward(&x, &p).unwrap();
            let mut zp = z.clone();
            let mut zm = z.clone();
            for i in 0..9 {
                zp.as_mut_slice()[i] += base.as_slice()[i];
                zm.as_mut_slice()[i] += base.as_slice()[i];
            }
            zp.as_mut_slice()[idx] += h;
            zm.as_mut_slice()[idx] -= h;
            let lp2 = weighted_loss(&x, &decoder_forward(&zp, &p).unwrap(), 1e-4).unwrap();
            let lm2 = weighted_loss(&x, &decoder_forward(&zm, &p).unwrap(), 1e-4).unwrap();
            assert!((dz - (lp2 - lm2) / (2.0 * h)).abs() < 1e-9);
        }
    }

    #[test]
    fn exact_reconstruction_has_zero_output_bias_gradient() {
        // zero parameters reproduce an all-zero target exactly
        let p = MlpParams::zeros(MlpParams::layout(4), 3).unwrap();
        let (l, g) = loss_and_gradients(&p, &Matrix::zeros(4, 4), None, 1e-4).unwrap();
        assert_eq!(l, 0.0);
        let last = p.layers().len() - 1;
        let (_, bias) = p.layer(last);
        let off = p.layer_offset(last) + p.layers()[last].in_dim * p.layers()[last].out_dim;
        assert!(g[off..off + bias.len()].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn duplicated_batch_doubles_gradients() {
        let mut rng = RngStream::new(6);
        let p = MlpParams::init(MlpParams::layout(4), 3, &mut rng).unwrap();
        let rows: Vec<f64> = (0..20).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let single = Matrix::from_vec(5, 4, rows.clone()).unwrap();
        let double = Matrix::from_vec(10, 4, [rows.clone(), rows].concat()).unwrap();
        let (l1, g1) = loss_and_gradients(&p, &single, None, 1e-4).unwrap();
        let (l2, g2) = loss_and_gradients(&p, &double, None, 1e-4).unwrap();
        assert!((l2 - 2.0 * l1).abs() < 1e-12 * l1.abs().max(1.0));
        for (a, b) in g1.iter().zip(&g2) {
            assert!((b - 2.0 * a).abs() <= 1e-12 * a.abs().max(1e-3));
        }
    }

    /// Central difference of the loss along every parameter, with the noise held fixed.
    fn check_gradients(p: &MlpParams, x: &Matrix, noise: &Matrix) -> (usize, usize) {
        let h = 1e-5;
        let (loss, g) = loss_and_gradients(p, x, Some(noise), 1e-4).unwrap();
        let roundoff = 8.0 * f64::EPSILON * loss.abs().max(1.0) / h;
        let mut q = p.clone();
        let mut bad = 0;
        for i in 0..p.num_params() {
            let v = p.values()[i];
            q.values_mut()[i] = v + h;
            let lp = loss_and_gradients(&q, x, Some(noise), 1e-4).unwrap().0;
            q.values_mut()[i] = v - h;
            let lm = loss_and_gradients(&q, x, Some(noise), 1e-4).unwrap().0;
            q.values_mut()[i] = v;
            let fd = (lp - lm) / (2.0 * h);
            if (fd - g[i]).abs() > 1e-4 * fd.abs().max(g[i].abs()) + roundoff {
                bad += 1;
            }
        }
        (bad, p.num_params())
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut rng = RngStream::new(404);
        for _ in 0..5 {
            let p = MlpParams::init(MlpParams::layout(4), 3, &mut rng).unwrap();
            let x = Matrix::from_vec(6, 4, (0..24).map(|_| 2.0 * rng.uniform() - 1.0).collect())
                .unwrap();
            let noise = latent_noise(6, 3, 1e-3, &mut rng);
            let (bad, total) = check_gradients(&p, &x, &noise);
            assert_eq!(bad, 0, "{bad} of {total} gradients off");
        }
    }
}
