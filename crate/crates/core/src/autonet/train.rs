use super::{latent_noise, loss_and_gradients, AdamState, Dataset, Matrix, MlpParams};
use crate::channel::{stream, RngStream};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Std of the latent noise layer.
    pub noise_std: f64,
    /// Offset in the loss denominator.
    pub eps_loss: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            batch_size: 65_536,
            epochs: 2000,
            noise_std: 1e-3,
            eps_loss: 1e-4,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config(
                "batch_size and epochs must be positive".into(),
            ));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config(format!(
                "noise_std must be non-negative, got {}",
                self.noise_std
            )));
        }
        if !(self.eps_loss > 0.0 && self.eps_loss.is_finite()) {
            return Err(Error::Config(format!(
                "eps_loss must be positive, got {}",
                self.eps_loss
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub params: MlpParams,
    /// Mean per-sample loss of the untrained net over the full dataset.
    pub initial_loss: f64,
    /// Mean per-sample training loss of every epoch.
    pub epoch_loss: Vec<f64>,
}

/// Minibatch Adam over shuffled epochs, starting from a fresh initialization
/// of `layers`.
pub fn train(
    cfg: &TrainConfig,
    data: &Dataset,
    layers: Vec<super::LayerSpec>,
    encoder_layers: usize,
) -> Result<TrainOutcome> {
    let init = MlpParams::init(
        layers,
        encoder_layers,
        &mut RngStream::derive(cfg.seed, &[stream::INIT]),
    )?;
    train_from(cfg, data, init)
}

/// As [`train`], continuing from given parameters.
pub fn train_from(cfg: &TrainConfig, data: &Dataset, mut p: MlpParams) -> Result<TrainOutcome> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Config("training dataset is empty".into()));
    }
    if data.k() != p.k() {
        return Err(Error::Shape(format!(
            "dataset width {} but net expects {}",
            data.k(),
            p.k()
        )));
    }
    if cfg.batch_size > data.len() {
        return Err(Error::Config(format!(
            "batch_size {} exceeds dataset size {}",
            cfg.batch_size,
            data.len()
        )));
    }
    let n = data.len();
    let k = data.k();
    let initial_loss = loss_and_gradients(&p, &data.samples, None, cfg.eps_loss)?.0 / n as f64;
    let mut adam = AdamState::new(p.num_params());
    let mut noise_rng = RngStream::derive(cfg.seed, &[stream::LATENT_NOISE]);
    let mut order: Vec<usize> = (0..n).collect();
    let steps = n / cfg.batch_size;
    let mut batch = Matrix::zeros(cfg.batch_size, k);
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        RngStream::derive(cfg.seed, &[stream::SHUFFLE, epoch as u64]).shuffle(&mut order);
        let mut total = 0.0;
        for step in 0..steps {
            for (r, &idx) in order[step * cfg.batch_size..(step + 1) * cfg.batch_size]
                .iter()
                .enumerate()
            {
                batch.row_mut(r).copy_from_slice(data.samples.row(idx));
            }
            let noise = latent_noise(
                cfg.batch_size,
                p.latent_dim(),
                cfg.noise_std,
                &mut noise_rng,
            );
            let (loss, grads) = loss_and_gradients(&p, &batch, Some(&noise), cfg.eps_loss)?;
            if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(Error::Divergence { epoch, loss });
            }
            adam.update(p.values_mut(), &grads, cfg.learning_rate);
            total += loss;
        }
        let mean = total / (steps * cfg.batch_size) as f64;
        if !mean.is_finite() || !p.is_finite() {
            return Err(Error::Divergence { epoch, loss: mean });
        }
        epoch_loss.push(mean);
    }
    Ok(TrainOutcome {
        params: p,
        initial_loss,
        epoch_loss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autonet::generate_dataset;
    use crate::ldpc::ParityMatrix;
    use crate::modem::Constellation;

    fn toy_data() -> Dataset {
        let pm = ParityMatrix::ieee80211n_648();
        let c = Constellation::new(4).unwrap();
        generate_dataset(&[4.0, 8.0, 12.0], 6, &pm, &c, 3).unwrap()
    }

    fn toy_cfg(epochs: usize) -> TrainConfig {
        TrainConfig {
            batch_size: 256,
            epochs,
            seed: 17,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn smoke_run_reduces_loss_tenfold() {
        let data = toy_data();
        let out = train(&toy_cfg(200), &data, MlpParams::layout(4), 3).unwrap();
        assert_eq!(out.epoch_loss.len(), 200);
        let last = *out.epoch_loss.last().unwrap();
        assert!(
            last <= 0.1 * out.initial_loss,
            "initial {} final {last}",
            out.initial_loss
        );
        // 100-epoch moving average never rises by more than minibatch noise
        let avg: Vec<f64> = out
            .epoch_loss
            .windows(100)
            .map(|w| w.iter().sum::<f64>() / 100.0)
            .collect();
        for w in avg.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-2), "{} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn same_seed_same_history() {
        let data = toy_data();
        let a = train(&toy_cfg(3), &data, MlpParams::layout(4), 3).unwrap();
        let b = train(&toy_cfg(3), &data, MlpParams::layout(4), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_capable_net_reaches_small_loss() {
        // latent width K, no noise: identity is representable up to saturation
        let data = toy_data();
        let cfg = TrainConfig {
            noise_std: 0.0,
            ..toy_cfg(150)
        };
        let out = train(&cfg, &data, MlpParams::layout_with(4, 16, 4), 3).unwrap();
        let last = *out.epoch_loss.last().unwrap();
        assert!(
            last < 0.05 * out.initial_loss,
            "initial {} final {last}",
            out.initial_loss
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let data = toy_data();
        let big = TrainConfig {
            batch_size: data.len() + 1,
            ..toy_cfg(1)
        };
        assert!(matches!(
            train(&big, &data, MlpParams::layout(4), 3),
            Err(Error::Config(_))
        ));
        let neg = TrainConfig {
            learning_rate: -1.0,
            ..toy_cfg(1)
        };
        assert!(train(&neg, &data, MlpParams::layout(4), 3).is_err());
        assert!(matches!(
            train(&toy_cfg(1), &data, MlpParams::layout(8), 3),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn divergence_reports_the_epoch() {
        let data = toy_data();
        let mut p = MlpParams::init(MlpParams::layout(4), 3, &mut RngStream::new(1)).unwrap();
        p.values_mut()[0] = f64::NAN;
        let err = train_from(&toy_cfg(2), &data, p).unwrap_err();
        assert!(matches!(err, Error::Divergence { epoch: 0, .. }), "{err:?}");
    }
}
