use super::amplitude::GainQuantizer;
use super::uniform::UniformQuantizerSpec;
use crate::modem::{llr_from_stats_into, Constellation, SufficientStat};
use crate::Result;

/// Default clipping of the equalized observation, relative to the largest
/// constellation coordinate.
pub const R_TILDE_CLIP: f64 = 1.2;

/// Scalar quantization of `(G, Re r~, Im r~)`; `None` leaves a statistic exact.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsQuantizer {
    pub gain: Option<GainQuantizer>,
    pub r_tilde: Option<UniformQuantizerSpec>,
}

impl StatsQuantizer {
    pub fn exact() -> Self {
        Self {
            gain: None,
            r_tilde: None,
        }
    }

    pub fn quantize(&self, s: &SufficientStat, noise_var: f64) -> SufficientStat {
        let g = self
            .gain
            .as_ref()
            .map_or(s.g, |q| q.reconstruct(s.g, noise_var));
        let (r_re, r_im) = match &self.r_tilde {
            Some(spec) => (spec.quantize(s.r_re).1, spec.quantize(s.r_im).1),
            None => (s.r_re, s.r_im),
        };
        SufficientStat { g, r_re, r_im }
    }

    /// Bits per symbol: one codebook index for `G` and two for `r~`.
    pub fn storage_bits(&self) -> Option<usize> {
        let g = self.gain.as_ref()?.codebook.len();
        let r = self.r_tilde.as_ref()?;
        Some((usize::BITS - (g - 1).leading_zeros()) as usize + 2 * r.n_bits as usize)
    }
}

/// Quantizes the statistics and recomputes the LLRs from the reconstruction.
pub fn quantize_stats_baseline(
    s: &SufficientStat,
    q: &StatsQuantizer,
    noise_var: f64,
    c: &Constellation,
    out: &mut [f64],
) -> Result<()> {
    llr_from_stats_into(&q.quantize(s, noise_var), c, out)
}
