use rayon::prelude::*;

use super::Matrix;
use crate::channel::{stream, NoiseModel, RngStream};
use crate::ldpc::{ParityMatrix, Permutation, SystematicEncoder};
use crate::modem::{soft_bit, sufficient_stats, Constellation};
use crate::pipeline::link;
use crate::{Error, Result};

/// Soft-bit training samples with per-sample provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// `N x K` soft bits.
    pub samples: Matrix,
    /// SNR (dB) each sample was generated at.
    pub snr_db: Vec<f64>,
    /// Instantaneous SNR `G = |h|^2 / sigma^2`.
    pub g: Vec<f64>,
    /// Equalized observation `r / h`.
    pub r_tilde: Vec<(f64, f64)>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.rows() == 0
    }

    pub fn k(&self) -> usize {
        self.samples.cols()
    }
}

struct Sym {
    soft: Vec<f64>,
    snr: f64,
    g: f64,
    rt: (f64, f64),
}

/// Runs `codewords_per_snr` random codewords per SNR point through the link
/// and collects the per-symbol soft bits, concatenated and shuffled.
pub fn generate_dataset(
    snr_list: &[f64],
    codewords_per_snr: usize,
    pm: &ParityMatrix,
    c: &Constellation,
    seed: u64,
) -> Result<Dataset> {
    generate_dataset_on(stream::TRAIN_DATA, snr_list, codewords_per_snr, pm, c, seed)
}

/// As [`generate_dataset`], drawing from the stream labelled `label`.
pub fn generate_dataset_on(
    label: u64,
    snr_list: &[f64],
    codewords_per_snr: usize,
    pm: &ParityMatrix,
    c: &Constellation,
    seed: u64,
) -> Result<Dataset> {
    if snr_list.is_empty() || codewords_per_snr == 0 {
        return Err(Error::Config(
            "dataset needs at least one SNR point and one codeword".into(),
        ));
    }
    let enc = SystematicEncoder::new(pm)?;
    let perm = Permutation::random(
        pm.n(),
        &mut RngStream::derive(seed, &[stream::INTERLEAVER, 0]),
    );
    let k = c.bits_per_symbol();
    let jobs: Vec<(usize, usize)> = (0..snr_list.len())
        .flat_map(|s| (0..codewords_per_snr).map(move |w| (s, w)))
        .collect();
    let per_frame: Vec<Vec<Sym>> = jobs
        .par_iter()
        .map(|&(s, w)| -> Result<Vec<Sym>> {
            let mut rng = RngStream::derive(seed, &[label, s as u64, w as u64]);
            let nm = NoiseModel::from_snr_db(snr_list[s]);
            let (_, cw) = link::random_codeword(&enc, &mut rng)?;
            let obs = link::transmit(&cw, &perm, c, &nm, &mut rng)?;
            let llrs = link::symbol_llrs(&obs, c)?;
            obs.iter()
                .zip(llrs.chunks(k))
                .map(|(o, l)| {
                    let st = sufficient_stats(o)?;
                    Ok(Sym {
                        soft: l.iter().map(|&x| soft_bit(x)).collect(),
                        snr: snr_list[s],
                        g: st.g,
                        rt: (st.r_re, st.r_im),
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut syms: Vec<Sym> = per_frame.into_iter().flatten().collect();
    RngStream::derive(seed, &[label, stream::SHUFFLE]).shuffle(&mut syms);

    let mut data = Vec::with_capacity(syms.len() * k);
    let mut snr_db = Vec::with_capacity(syms.len());
    let mut g = Vec::with_capacity(syms.len());
    let mut r_tilde = Vec::with_capacity(syms.len());
    for s in syms {
        data.extend(s.soft);
        snr_db.push(s.snr);
        g.push(s.g);
        r_tilde.push(s.rt);
    }
    Ok(Dataset {
        samples: Matrix::from_vec(snr_db.len(), k, data)?,
        snr_db,
        g,
        r_tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count_and_range() {
        let pm = ParityMatrix::ieee80211n_648();
        let c = Constellation::new(8).unwrap();
        let d = generate_dataset(&[4.0, 8.0, 12.0, 16.0], 10, &pm, &c, 5).unwrap();
        assert_eq!(d.len(), 4 * 10 * 81);
        assert_eq!(d.k(), 8);
        assert!(d
            .samples
            .as_slice()
            .iter()
            .all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(d.snr_db.iter().filter(|&&s| s == 12.0).count(), 810);
        // shuffled: the first 81 samples do not all share one SNR
        assert!(d.snr_db[..81].iter().any(|&s| s != d.snr_db[0]));
    }

    #[test]
    fn same_seed_same_dataset() {
        let pm = ParityMatrix::ieee80211n_648();
        let c = Constellation::new(4).unwrap();
        let a = generate_dataset(&[6.0, 10.0], 3, &pm, &c, 11).unwrap();
        let b = generate_dataset(&[6.0, 10.0], 3, &pm, &c, 11).unwrap();
        let other = generate_dataset(&[6.0, 10.0], 3, &pm, &c, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples, other.samples);
    }

    #[test]
    fn empty_request_is_rejected() {
        let pm = ParityMatrix::ieee80211n_648();
        let c = Constellation::new(4).unwrap();
        assert!(generate_dataset(&[], 3, &pm, &c, 1).is_err());
        assert!(generate_dataset(&[5.0], 0, &pm, &c, 1).is_err());
    }
}
