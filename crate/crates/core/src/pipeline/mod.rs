//! Experiment orchestration: single-transmission and HARQ block error rates
//! and latent-distribution diagnostics.
//!
//! Frame `f` at SNR index `s` draws everything from the stream
//! `(seed, EVAL, s, f)`, so every method sees the same payloads and channel
//! realizations and results do not depend on the number of worker threads.

mod harq;
mod hist;
pub mod link;
mod methods;

use std::sync::Arc;

use rayon::prelude::*;

pub use harq::{combine_llrs, harq_split, run_harq, run_harq_with, HarqSplit};
pub use hist::{emit_latent_histograms, Histogram, Histogram2d, LatentHistograms};
pub use methods::{
    compression_ratio, fit_samples, interleaver, prepare_quantizer, ExperimentConfig, LatentCodec,
    LatentStage, Method, SymbolQuantizer,
};

use crate::channel::{stream, NoiseModel, RngStream};
use crate::ldpc::{BpDecoder, CheckRule, ParityMatrix, SystematicEncoder};
use crate::modem::Constellation;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub trials: usize,
    pub errors: usize,
}

impl BlerPoint {
    pub fn bler(&self) -> f64 {
        self.errors as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlerResult {
    pub points: Vec<BlerPoint>,
    pub method: Method,
    pub n_bits: u32,
    pub seed: u64,
}

pub const BLER_CSV_HEADER: &str = "snr_db,trials,errors,bler,method,n_bits,seed";

impl BlerResult {
    /// CSV rows without header.
    pub fn csv_rows(&self) -> String {
        let bits = if self.method == Method::FullPrecision {
            0
        } else {
            self.n_bits
        };
        self.points
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{},{},{}\n",
                    p.snr_db,
                    p.trials,
                    p.errors,
                    p.bler(),
                    self.method.name(),
                    bits,
                    self.seed
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        format!("{BLER_CSV_HEADER}\n{}", self.csv_rows())
    }

    /// SNR at which the BLER curve crosses `target`, by linear interpolation
    /// of `log10(BLER)` between the first bracketing pair of points.
    pub fn snr_at_bler(&self, target: f64) -> Option<f64> {
        let lg = |p: &BlerPoint| {
            if p.errors == 0 {
                None
            } else {
                Some(p.bler().log10())
            }
        };
        for w in self.points.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let la = lg(a)?;
            if a.bler() >= target && b.bler() <= target {
                let lb = match lg(b) {
                    Some(v) => v,
                    // an error-free point bounds the crossing by half an error
                    None => (0.5 / b.trials as f64).log10(),
                };
                let t = target.log10();
                if la == lb {
                    return Some(a.snr_db);
                }
                return Some(a.snr_db + (la - t) / (la - lb) * (b.snr_db - a.snr_db));
            }
        }
        None
    }
}

/// Single-transmission BLER with the quantizer of `cfg.method`.
pub fn run_single(
    cfg: &ExperimentConfig,
    pm: &ParityMatrix,
    codec: Option<Arc<dyn LatentCodec>>,
) -> Result<BlerResult> {
    cfg.validate()?;
    let quantizers = (0..cfg.snr_db.len())
        .map(|s| prepare_quantizer(cfg, pm, codec.clone(), s))
        .collect::<Result<Vec<_>>>()?;
    run_single_with(cfg, pm, &quantizers)
}

/// As [`run_single`] with one prepared quantizer per SNR point.
pub fn run_single_with(
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
    let perm = interleaver(cfg.seed, 0, pm.n());
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
                    let obs = link::transmit(&cw, &perm, &c, &nm, &mut rng)?;
                    let mut llrs = link::symbol_llrs(&obs, &c)?;
                    q.apply(&obs, &nm, &c, &mut llrs)?;
                    let llrs = link::receive(&llrs, &perm)?;
                    let out = dec.decode(&llrs, cfg.max_iter);
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
    use crate::autonet::Matrix;

    struct Identity(usize);

    impl LatentCodec for Identity {
        fn k(&self) -> usize {
            self.0
        }
        fn latent_dim(&self) -> usize {
            self.0
        }
        fn encode(&self, soft: &Matrix) -> Result<Matrix> {
            Ok(soft.clone())
        }
        fn decode(&self, z: &Matrix) -> Result<Matrix> {
            Ok(z.clone())
        }
    }

    fn cfg(method: Method, snr: Vec<f64>, codewords: usize) -> ExperimentConfig {
        ExperimentConfig {
            k: 4,
            snr_db: snr,
            codewords,
            method,
            n_bits: 5,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn noiseless_regime_has_no_errors() {
        let pm = ParityMatrix::ieee80211n_648();
        let r = run_single(&cfg(Method::FullPrecision, vec![60.0], 100), &pm, None).unwrap();
        assert_eq!(r.points[0].errors, 0);
        assert_eq!(r.points[0].trials, 100);
    }

    #[test]
    fn identity_stub_matches_full_precision() {
        let pm = ParityMatrix::ieee80211n_648();
        let c = cfg(Method::FullPrecision, vec![8.0, 10.0], 60);
        let full = run_single(&c, &pm, None).unwrap();
        let stub = SymbolQuantizer::Deep {
            codec: Arc::new(Identity(4)),
            stage: LatentStage::Bypass,
        };
        let deep = run_single_with(
            &ExperimentConfig {
                method: Method::Deep,
                ..c
            },
            &pm,
            &[stub.clone(), stub],
        )
        .unwrap();
        assert_eq!(
            full.points.iter().map(|p| p.errors).collect::<Vec<_>>(),
            deep.points.iter().map(|p| p.errors).collect::<Vec<_>>()
        );
        assert!(full.points.iter().any(|p| p.errors > 0));
    }

    #[test]
    fn results_are_reproducible() {
        let pm = ParityMatrix::ieee80211n_648();
        let c = cfg(Method::ScalarLlr, vec![9.0], 40);
        assert_eq!(
            run_single(&c, &pm, None).unwrap(),
            run_single(&c, &pm, None).unwrap()
        );
    }

    #[test]
    fn csv_layout() {
        let r = BlerResult {
            points: vec![BlerPoint {
                snr_db: 8.5,
                trials: 100,
                errors: 25,
            }],
            method: Method::ScalarLlr,
            n_bits: 5,
            seed: 3,
        };
        assert_eq!(
            r.to_csv(),
            "snr_db,trials,errors,bler,method,n_bits,seed\n8.5,100,25,0.25,scalar_llr,5,3\n"
        );
    }

    #[test]
    fn interpolated_crossing() {
        let mk = |pts: &[(f64, usize)]| BlerResult {
            points: pts
                .iter()
                .map(|&(s, e)| BlerPoint {
                    snr_db: s,
                    trials: 1000,
                    errors: e,
                })
                .collect(),
            method: Method::FullPrecision,
            n_bits: 0,
            seed: 0,
        };
        let r = mk(&[(8.0, 1000), (9.0, 100), (10.0, 10)]);
        assert!((r.snr_at_bler(0.1).unwrap() - 9.0).abs() < 1e-12);
        assert!((r.snr_at_bler(10f64.powf(-1.5)).unwrap() - 9.5).abs() < 1e-12);
        assert_eq!(mk(&[(8.0, 50), (9.0, 10)]).snr_at_bler(0.1), None);
    }
}
