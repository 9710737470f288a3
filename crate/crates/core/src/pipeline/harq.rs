use std::sync::Arc;

use rayon::prelude::*;

use super::{
    interleaver, link, prepare_quantizer, BlerPoint, BlerResult, ExperimentConfig, LatentCodec,
    SymbolQuantizer,
};
use crate::channel::{stream, NoiseModel, RngStream};
use crate::ldpc::{BpDecoder, CheckRule, ParityMatrix, SystematicEncoder};
use crate::modem::Constellation;
use crate::{Error, Result};

/// Codeword positions carried by each of the two transmissions, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarqSplit {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl HarqSplit {
    /// Information bits over total transmitted bits.
    pub fn effective_rate(&self, info_bits: usize) -> f64 {
        info_bits as f64 / (self.first.len() + self.second.len()) as f64
    }
}

/// Random halving `H1, H2` of `0..n`; each transmission carries its half and
/// the first third of the other half. Indices beyond the largest multiple of
/// six alternate between the transmissions.
pub fn harq_split(n: usize, rng: &mut RngStream) -> HarqSplit {
    let mut perm: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut perm);
    let n6 = n - n % 6;
    let (h1, h2) = perm[..n6].split_at(n6 / 2);
    let third = n6 / 6;
    let mut first: Vec<usize> = h1.iter().chain(&h2[..third]).copied().collect();
    let mut second: Vec<usize> = h2.iter().chain(&h1[..third]).copied().collect();
    for (i, &x) in perm[n6..].iter().enumerate() {
        if i % 2 == 0 {
            first.push(x)
        } else {
            second.push(x)
        }
    }
    first.sort_unstable();
    second.sort_unstable();
    HarqSplit { first, second }
}

/// Equal gain combining of a stored and a fresh LLR.
pub fn combine_llrs(stored: f64, fresh: f64) -> f64 {
    stored + fresh
}

/// HARQ BLER: the first transmission goes through the configured quantizer,
/// the second stays exact, and the decoder runs once on the combination.
pub fn run_harq(
    cfg: &ExperimentConfig,
    pm: &ParityMatrix,
    codec: Option<Arc<dyn LatentCodec>>,
) -> Result<BlerResult> {
    cfg.validate()?;
    let quantizers = (0..cfg.snr_db.len())
        .map(|s| prepare_quantizer(cfg, pm, codec.clone(), s))
        .collect::<Result<Vec<_>>>()?;
    run_harq_with(cfg, pm, &quantizers)
}

pub fn run_harq_with(
    cfg: &ExperimentConfig,
    pm: &ParityMatrix,
    quantizers: &[SymbolQuantizer],
) -> Result<BlerResult> {
    cfg.validate()?;
    if quantizers.len() != cfg.snr_db.len() {
        return Err(Error::LengthMismatch {
            expected: cfg.snr_db.len(),
            actual: quantizers.len(),
        });
    }
    let c = Constellation::new(cfg.k)?;
    let enc = SystematicEncoder::new(pm)?;
    let split = harq_split(
        pm.n(),
        &mut RngStream::derive(cfg.seed, &[stream::HARQ_SPLIT]),
    );
    let perm1 = interleaver(cfg.seed, 1, split.first.len());
    let perm2 = interleaver(cfg.seed, 2, split.second.len());
    let decoder = BpDecoder::new(pm, CheckRule::SumProduct);
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    for (s, (&snr, q)) in cfg.snr_db.iter().zip(quantizers).enumerate() {
        let nm = NoiseModel::from_snr_db(snr);
        let errors = (0..cfg.codewords)
            .into_par_iter()
            .map_init(
                || decoder.clone(),
                |dec, f| -> Result<usize> {
                    let mut rng = RngStream::derive(cfg.seed, &[stream::EVAL, s as u64, f as u64]);
                    let (info, cw) = link::random_codeword(&enc, &mut rng)?;
                    let mut combined = vec![0.0; pm.n()];
                    for (idx, perm, stored) in [
                        (&split.first, &perm1, Some(q)),
                        (&split.second, &perm2, None),
                    ] {
                        let bits: Vec<u8> = idx.iter().map(|&i| cw[i]).collect();
                        let obs = link::transmit(&bits, perm, &c, &nm, &mut rng)?;
                        let mut llrs = link::symbol_llrs(&obs, &c)?;
                        if let Some(q) = stored {
                            q.apply(&obs, &nm, &c, &mut llrs)?;
                        }
                        for (&i, l) in idx.iter().zip(link::receive(&llrs, perm)?) {
                            combined[i] = combine_llrs(combined[i], l);
                        }
                    }
                    let out = dec.decode(&combined, cfg.max_iter);
                    Ok(usize::from(enc.extract_info(&out.bits) != info))
                },
            )
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        points.push(BlerPoint {
            snr_db: snr,
            trials: cfg.codewords,
            errors,
        });
    }
    Ok(BlerResult {
        points,
        method: cfg.method,
        n_bits: cfg.n_bits,
        seed: cfg.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::Method;
    use proptest::prelude::*;

    #[test]
    fn split_cardinalities_for_648() {
        let s = harq_split(648, &mut RngStream::new(1));
        assert_eq!((s.first.len(), s.second.len()), (432, 432));
        let overlap = s
            .first
            .iter()
            .filter(|i| s.second.binary_search(i).is_ok())
            .count();
        assert_eq!(overlap, 216);
        assert_eq!(s.effective_rate(324), 3.0 / 8.0);
    }

    #[test]
    fn combining_examples() {
        assert_eq!(combine_llrs(1.0, 2.0), 3.0);
        assert_eq!(combine_llrs(-1.5, 0.0), -1.5);
        assert_eq!(combine_llrs(0.0, 0.0), 0.0);
    }

    #[test]
    fn harq_is_deterministic() {
        let pm = ParityMatrix::ieee80211n_648();
        let cfg = ExperimentConfig {
            snr_db: vec![4.0],
            codewords: 30,
            method: Method::FullPrecision,
            ..Default::default()
        };
        assert_eq!(
            run_harq(&cfg, &pm, None).unwrap(),
            run_harq(&cfg, &pm, None).unwrap()
        );
    }

    proptest! {
        #[test]
        fn every_index_is_sent(n in 1usize..400, seed in any::<u64>()) {
            let s = harq_split(n, &mut RngStream::new(seed));
            let mut seen = vec![0u8; n];
            for &i in s.first.iter().chain(&s.second) {
                seen[i] += 1;
            }
            prop_assert!(seen.iter().all(|&c| c >= 1 && c <= 2));
            prop_assert!(s.first.len().abs_diff(s.second.len()) <= 1);
            let n6 = n - n % 6;
            prop_assert_eq!(seen.iter().filter(|&&c| c == 2).count(), n6 / 3);
        }
    }
}
