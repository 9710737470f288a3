//! Lloyd-Max quantizer for the channel-gain statistic of the baseline.

use super::codebook::{ScalarCodebook, SortedSamples};
use crate::channel::{draw_channel, RngStream};
use crate::{Error, Result};

pub const LLOYD_MAX_ITERATIONS: usize = 1000;
pub const LLOYD_TOLERANCE: f64 = 1e-12;
/// Monte-Carlo draws used to fit the gain quantizer.
pub const GAIN_FIT_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LloydFit {
    pub codebook: ScalarCodebook,
    /// Mean squared error after each iteration.
    pub trace: Vec<f64>,
}

/// Mean squared error of a codebook on sorted samples with moments `[1, x, x^2]`.
fn distortion(s: &SortedSamples, cuts: &[usize], levels: &[f64]) -> f64 {
    let mut d = 0.0;
    for (w, &c) in cuts.windows(2).zip(levels) {
        let (n, sx, sxx) = (
            s.sum(0, w[0], w[1]),
            s.sum(1, w[0], w[1]),
            s.sum(2, w[0], w[1]),
        );
        d += sxx - 2.0 * c * sx + c * c * n;
    }
    d / s.len() as f64
}

/// MSE-optimal scalar quantizer by Lloyd iteration, started from sample quantiles.
pub fn lloyd_max(samples: &[f64], n_levels: usize) -> Result<LloydFit> {
    if n_levels == 0 || samples.is_empty() {
        return Err(Error::Fit(
            "Lloyd fit needs samples and at least one level".into(),
        ));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Fit("non-finite sample".into()));
    }
    let s = SortedSamples::new(samples.iter().map(|&x| (x, vec![1.0, x, x * x])).collect());
    let n = s.len();
    let mut levels: Vec<f64> = (0..n_levels)
        .map(|i| s.values[((2 * i + 1) * n / (2 * n_levels)).min(n - 1)])
        .collect();
    levels.dedup();
    let mut trace = Vec::new();
    let mut best: Option<(f64, ScalarCodebook)> = None;
    for _ in 0..LLOYD_MAX_ITERATIONS {
        let thresholds: Vec<f64> = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let cuts = s.cuts(&thresholds);
        let next: Vec<f64> = cuts
            .windows(2)
            .zip(&levels)
            .map(|(w, &old)| {
                if w[1] > w[0] {
                    s.sum(1, w[0], w[1]) / s.sum(0, w[0], w[1])
                } else {
                    old
                }
            })
            .collect();
        let d = distortion(&s, &cuts, &next);
        let prev = trace.last().copied();
        trace.push(d);
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            break;
        }
        let cb = ScalarCodebook::new(thresholds, next.clone())?;
        if best.as_ref().is_none_or(|(b, _)| d < *b) {
            best = Some((d, cb));
        }
        if prev.is_some_and(|p: f64| p - d <= LLOYD_TOLERANCE * p) {
            break;
        }
        levels = next;
    }
    let (_, codebook) =
        best.ok_or_else(|| Error::Fit("Lloyd iteration produced no valid codebook".into()))?;
    Ok(LloydFit { codebook, trace })
}

/// Which function of the fading gain is quantized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GainModel {
    /// `|h|`, Rayleigh distributed; `G` is rebuilt from the squared level.
    #[default]
    Rayleigh,
    /// `|h|^2`, exponentially distributed; `G` is rebuilt from the level.
    Exponential,
}

impl GainModel {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rayleigh => "rayleigh",
            Self::Exponential => "exponential",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rayleigh" => Some(Self::Rayleigh),
            "exponential" => Some(Self::Exponential),
            _ => None,
        }
    }
}

/// Quantizer for `G = |h|^2 / sigma^2`, fitted at unit noise and rescaled by
/// the known noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GainQuantizer {
    pub model: GainModel,
    pub codebook: ScalarCodebook,
}

impl GainQuantizer {
    pub fn reconstruct(&self, g: f64, noise_var: f64) -> f64 {
        match self.model {
            GainModel::Rayleigh => {
                let a = self.codebook.apply((g * noise_var).sqrt());
                a * a / noise_var
            }
            GainModel::Exponential => self.codebook.apply(g * noise_var) / noise_var,
        }
    }
}

/// Fits the gain quantizer on `draws` fading realizations.
pub fn fit_gain_quantizer(
    model: GainModel,
    n_levels: usize,
    draws: usize,
    rng: &mut RngStream,
) -> Result<(GainQuantizer, Vec<f64>)> {
    let samples: Vec<f64> = (0..draws)
        .map(|_| {
            let p = draw_channel(rng).norm_sqr();
            match model {
                GainModel::Rayleigh => p.sqrt(),
                GainModel::Exponential => p,
            }
        })
        .collect();
    let fit = lloyd_max(&samples, n_levels)?;
    Ok((
        GainQuantizer {
            model,
            codebook: fit.codebook,
        },
        fit.trace,
    ))
}
