use std::sync::Arc;

use rayon::prelude::*;

use super::link;
use crate::autonet::{decoder_forward, encoder_forward, Matrix, MlpParams};
use crate::channel::{stream, NoiseModel, RngStream};
use crate::ldpc::{ParityMatrix, Permutation, SystematicEncoder};
use crate::modem::{
    llr_from_soft_bit, soft_bit, sufficient_stats, ChannelObservation, Constellation,
};
use crate::quantizers::{
    fit_gain_quantizer, fit_max_mi, quantize_stats_baseline, GainModel, MaxMiQuantizer,
    ReconstructionLut, StatsQuantizer, UniformQuantizerSpec, GAIN_FIT_DRAWS, SCALAR_LLR_DELTA,
};
use crate::{Error, Result};

/// How the LLRs of a transmission are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    FullPrecision,
    /// Autoencoder latent, uniformly quantized, reconstructed through the table.
    Deep,
    /// Each LLR clipped to `[-4, 4]` and uniformly quantized.
    ScalarLlr,
    /// Per-bit-position max-MI codebooks.
    MaxMi,
    /// Scalar quantization of `(G, Re r~, Im r~)`.
    Stats,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Self::FullPrecision,
        Self::Deep,
        Self::ScalarLlr,
        Self::MaxMi,
        Self::Stats,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::FullPrecision => "full_precision",
            Self::Deep => "deep",
            Self::ScalarLlr => "scalar_llr",
            Self::MaxMi => "max_mi",
            Self::Stats => "stats",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    /// Stored bits per symbol of `k` coded bits, `None` for full precision.
    pub fn storage_bits(self, k: usize, n_bits: u32, latent_dim: usize) -> Option<usize> {
        let n = n_bits as usize;
        match self {
            Self::FullPrecision => None,
            Self::Deep => Some(latent_dim * n),
            Self::ScalarLlr | Self::MaxMi => Some(k * n),
            Self::Stats => Some(3 * n),
        }
    }
}

/// Bit-cost ratio of a reference scheme to a compressed one.
pub fn compression_ratio(reference_bits: usize, compressed_bits: usize) -> f64 {
    reference_bits as f64 / compressed_bits as f64
}

/// Anything that maps soft bits to a latent vector and back.
pub trait LatentCodec: Send + Sync {
    fn k(&self) -> usize;
    fn latent_dim(&self) -> usize;
    fn encode(&self, soft: &Matrix) -> Result<Matrix>;
    fn decode(&self, z: &Matrix) -> Result<Matrix>;
    /// The trained net, when there is one; needed to build a lookup table.
    fn params(&self) -> Option<&MlpParams> {
        None
    }
}

impl LatentCodec for MlpParams {
    fn k(&self) -> usize {
        MlpParams::k(self)
    }

    fn latent_dim(&self) -> usize {
        MlpParams::latent_dim(self)
    }

    fn encode(&self, soft: &Matrix) -> Result<Matrix> {
        encoder_forward(soft, self)
    }

    fn decode(&self, z: &Matrix) -> Result<Matrix> {
        decoder_forward(z, self)
    }

    fn params(&self) -> Option<&MlpParams> {
        Some(self)
    }
}

/// Latent quantization for the deep path.
#[derive(Clone)]
pub enum LatentStage {
    /// Latent passed on unquantized.
    Bypass,
    /// Quantized and decoded by evaluating the decoder.
    Direct(UniformQuantizerSpec),
    /// Quantized and looked up in the precomputed table.
    Table(Arc<ReconstructionLut>),
}

/// The per-symbol store-and-reconstruct step of one method at one SNR.
#[derive(Clone)]
pub enum SymbolQuantizer {
    Exact,
    Deep {
        codec: Arc<dyn LatentCodec>,
        stage: LatentStage,
    },
    Scalar(UniformQuantizerSpec),
    MaxMi(MaxMiQuantizer),
    Stats(StatsQuantizer),
}

impl std::fmt::Debug for SymbolQuantizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Exact => write!(f, "Exact"),
            Self::Deep { stage, .. } => {
                let s = match stage {
                    LatentStage::Bypass => "bypass",
                    LatentStage::Direct(_) => "direct",
                    LatentStage::Table(_) => "table",
                };
                write!(f, "Deep({s})")
            }
            Self::Scalar(s) => write!(f, "Scalar({s:?})"),
            Self::MaxMi(_) => write!(f, "MaxMi"),
            Self::Stats(_) => write!(f, "Stats"),
        }
    }
}

impl SymbolQuantizer {
    /// Replaces the exact per-symbol LLRs in `llrs` (chunks of `K`) with
    /// their stored-and-reconstructed version.
    pub fn apply(
        &self,
        obs: &[ChannelObservation],
        nm: &NoiseModel,
        c: &Constellation,
        llrs: &mut [f64],
    ) -> Result<()> {
        let k = c.bits_per_symbol();
        match self {
            Self::Exact => Ok(()),
            Self::Scalar(spec) => {
                for l in llrs.iter_mut() {
                    *l = spec.quantize(*l).1;
                }
                Ok(())
            }
            Self::MaxMi(q) => {
                for chunk in llrs.chunks_mut(k) {
                    q.apply(chunk);
                }
                Ok(())
            }
            Self::Stats(q) => {
                for (o, chunk) in obs.iter().zip(llrs.chunks_mut(k)) {
                    quantize_stats_baseline(&sufficient_stats(o)?, q, nm.noise_var(), c, chunk)?;
                }
                Ok(())
            }
            Self::Deep { codec, stage } => {
                let soft =
                    Matrix::from_vec(obs.len(), k, llrs.iter().map(|&l| soft_bit(l)).collect())?;
                let mut z = codec.encode(&soft)?;
                let recon = match stage {
                    LatentStage::Bypass => codec.decode(&z)?,
                    LatentStage::Direct(spec) => {
                        for v in z.as_mut_slice() {
                            *v = spec.quantize(*v).1;
                        }
                        codec.decode(&z)?
                    }
                    LatentStage::Table(lut) => {
                        let mut out = Matrix::zeros(obs.len(), k);
                        for r in 0..obs.len() {
                            out.row_mut(r).copy_from_slice(lut.reconstruct(z.row(r)));
                        }
                        out
                    }
                };
                for (l, &s) in llrs.iter_mut().zip(recon.as_slice()) {
                    *l = llr_from_soft_bit(s)?;
                }
                Ok(())
            }
        }
    }
}

/// Settings shared by all BLER experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Bits per constellation symbol.
    pub k: usize,
    pub snr_db: Vec<f64>,
    pub codewords: usize,
    pub method: Method,
    pub n_bits: u32,
    pub seed: u64,
    pub max_iter: usize,
    /// Clipping threshold of the latent quantizer.
    pub latent_delta: f64,
    /// Merge saturation states into the extreme cells (exactly `n_bits` per value).
    pub fold_saturation: bool,
    pub gain_model: GainModel,
    /// Clipping of `r~`, in units of the largest constellation coordinate.
    pub r_tilde_clip: f64,
    /// Codewords per SNR used to fit the max-MI codebooks.
    pub fit_codewords: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            k: 4,
            snr_db: vec![10.0],
            codewords: 1000,
            method: Method::FullPrecision,
            n_bits: 5,
            seed: 1,
            max_iter: 50,
            latent_delta: crate::quantizers::DEFAULT_DELTA,
            fold_saturation: true,
            gain_model: GainModel::Rayleigh,
            r_tilde_clip: crate::quantizers::R_TILDE_CLIP,
            fit_codewords: 200,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        Constellation::new(self.k)?;
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config(
                "snr grid must be a nonempty list of finite values".into(),
            ));
        }
        if self.codewords == 0 {
            return Err(Error::Config(
                "codewords per point must be at least 1".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if self.method != Method::FullPrecision {
            UniformQuantizerSpec::new(1.0, self.n_bits)?;
        }
        if self.method == Method::Deep && self.n_bits > crate::quantizers::MAX_LUT_BITS {
            return Err(Error::Config(format!(
                "deep method uses a lookup table, n_bits must be at most {}",
                crate::quantizers::MAX_LUT_BITS
            )));
        }
        if self.method == Method::MaxMi && self.fit_codewords == 0 {
            return Err(Error::Config("fit_codewords must be at least 1".into()));
        }
        if !(self.latent_delta > 0.0 && self.r_tilde_clip > 0.0) {
            return Err(Error::Config("clipping thresholds must be positive".into()));
        }
        Ok(())
    }

    pub fn latent_spec(&self) -> Result<UniformQuantizerSpec> {
        let s = UniformQuantizerSpec::new(self.latent_delta, self.n_bits)?;
        Ok(if self.fold_saturation { s.folded() } else { s })
    }

    pub fn scalar_spec(&self) -> Result<UniformQuantizerSpec> {
        let s = UniformQuantizerSpec::new(SCALAR_LLR_DELTA, self.n_bits)?;
        Ok(if self.fold_saturation { s.folded() } else { s })
    }
}

/// Interleaver of transmission `tx` (0 for single transmissions).
pub fn interleaver(seed: u64, tx: u64, n: usize) -> Permutation {
    Permutation::random(n, &mut RngStream::derive(seed, &[stream::INTERLEAVER, tx]))
}

/// `(L, b)` samples per bit position, from codewords on the fitting stream.
pub fn fit_samples(
    cfg: &ExperimentConfig,
    pm: &ParityMatrix,
    snr_idx: usize,
) -> Result<Vec<Vec<(f64, u8)>>> {
    let c = Constellation::new(cfg.k)?;
    let enc = SystematicEncoder::new(pm)?;
    let perm = interleaver(cfg.seed, 0, pm.n());
    let nm = NoiseModel::from_snr_db(cfg.snr_db[snr_idx]);
    let k = cfg.k;
    let frames: Vec<Vec<(usize, f64, u8)>> = (0..cfg.fit_codewords)
        .into_par_iter()
        .map(|w| -> Result<_> {
            let mut rng = RngStream::derive(cfg.seed, &[stream::FIT, snr_idx as u64, w as u64]);
            let (_, cw) = link::random_codeword(&enc, &mut rng)?;
            let obs = link::transmit(&cw, &perm, &c, &nm, &mut rng)?;
            let llrs = link::symbol_llrs(&obs, &c)?;
            let mut tx = perm.interleave(&cw)?;
            tx.resize(llrs.len(), 0);
            Ok(llrs
                .iter()
                .zip(&tx)
                .enumerate()
                .map(|(i, (&l, &b))| (i % k, l, b))
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut per_bit = vec![Vec::new(); k];
    for (j, l, b) in frames.into_iter().flatten() {
        per_bit[j].push((l, b));
    }
    Ok(per_bit)
}

/// Builds the quantizer of `cfg.method` for SNR point `snr_idx`.
pub fn prepare_quantizer(
    cfg: &ExperimentConfig,
    pm: &ParityMatrix,
    codec: Option<Arc<dyn LatentCodec>>,
    snr_idx: usize,
) -> Result<SymbolQuantizer> {
    let c = Constellation::new(cfg.k)?;
    match cfg.method {
        Method::FullPrecision => Ok(SymbolQuantizer::Exact),
        Method::ScalarLlr => Ok(SymbolQuantizer::Scalar(cfg.scalar_spec()?)),
        Method::MaxMi => {
            let samples = fit_samples(cfg, pm, snr_idx)?;
            let per_bit = samples
                .iter()
                .map(|s| Ok(fit_max_mi(s, 1 << cfg.n_bits)?.codebook))
                .collect::<Result<_>>()?;
            Ok(SymbolQuantizer::MaxMi(MaxMiQuantizer { per_bit }))
        }
        Method::Stats => {
            let mut rng = RngStream::derive(cfg.seed, &[stream::FIT, u64::MAX]);
            let (gain, _) =
                fit_gain_quantizer(cfg.gain_model, 1 << cfg.n_bits, GAIN_FIT_DRAWS, &mut rng)?;
            let r = UniformQuantizerSpec::new(cfg.r_tilde_clip * c.max_coordinate(), cfg.n_bits)?;
            let r = if cfg.fold_saturation { r.folded() } else { r };
            Ok(SymbolQuantizer::Stats(StatsQuantizer {
                gain: Some(gain),
                r_tilde: Some(r),
            }))
        }
        Method::Deep => {
            let codec = codec
                .ok_or_else(|| Error::Config("the deep method needs a trained model".into()))?;
            if codec.k() != cfg.k {
                return Err(Error::Config(format!(
                    "model serves K = {} but the experiment uses K = {}",
                    codec.k(),
                    cfg.k
                )));
            }
            let spec = cfg.latent_spec()?;
            let stage = match codec.params() {
                Some(p) => LatentStage::Table(Arc::new(ReconstructionLut::build(p, &spec)?)),
                None => LatentStage::Direct(spec),
            };
            Ok(SymbolQuantizer::Deep { codec, stage })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(Method::parse(m.name()), Some(m));
        }
        assert_eq!(Method::parse("nope"), None);
    }

    #[test]
    fn storage_accounting() {
        let deep = Method::Deep.storage_bits(8, 5, 3).unwrap();
        assert_eq!(deep, 15);
        let scalar5 = Method::ScalarLlr.storage_bits(8, 5, 3).unwrap();
        let scalar4 = Method::ScalarLlr.storage_bits(8, 4, 3).unwrap();
        assert_eq!((scalar5, scalar4), (40, 32));
        assert!((compression_ratio(scalar5, deep) - 40.0 / 15.0).abs() < 1e-15);
        assert!((compression_ratio(scalar4, deep) - 2.13).abs() < 0.005);
        let deep3 = Method::Deep.storage_bits(8, 3, 3).unwrap();
        assert_eq!(deep3, 9);
        assert!(
            (compression_ratio(Method::ScalarLlr.storage_bits(8, 2, 3).unwrap(), deep3) - 1.77)
                .abs()
                < 0.01
        );
        assert_eq!(Method::FullPrecision.storage_bits(8, 5, 3), None);
        assert_eq!(Method::Stats.storage_bits(8, 3, 3), Some(9));
    }

    #[test]
    fn deep_without_model_or_with_wrong_k_is_rejected() {
        let pm = ParityMatrix::ieee80211n_648();
        let cfg = ExperimentConfig {
            method: Method::Deep,
            ..ExperimentConfig::default()
        };
        assert!(matches!(
            prepare_quantizer(&cfg, &pm, None, 0),
            Err(Error::Config(_))
        ));
        let p = MlpParams::zeros(MlpParams::layout(8), 3).unwrap();
        let err = prepare_quantizer(&cfg, &pm, Some(Arc::new(p)), 0).unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("K = 8")),
            "{err:?}"
        );
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let bad = [
            ExperimentConfig {
                snr_db: vec![],
                ..Default::default()
            },
            ExperimentConfig {
                codewords: 0,
                ..Default::default()
            },
            ExperimentConfig {
                k: 3,
                ..Default::default()
            },
            ExperimentConfig {
                method: Method::Deep,
                n_bits: 9,
                ..Default::default()
            },
            ExperimentConfig {
                method: Method::ScalarLlr,
                n_bits: 0,
                ..Default::default()
            },
        ];
        for b in bad {
            assert!(b.validate().is_err(), "{b:?}");
        }
    }
}
