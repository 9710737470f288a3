//! The shared transmit/receive chain used by training-data generation and
//! every BLER experiment.

use crate::channel::{apply_channel, NoiseModel, RngStream};
use crate::ldpc::{Permutation, SystematicEncoder};
use crate::modem::{compute_llr_into, ChannelObservation, Constellation};
use crate::Result;

/// Coded bits after interleaving and zero padding to a whole number of symbols.
pub fn symbols_needed(n_bits: usize, k: usize) -> usize {
    n_bits.div_ceil(k)
}

/// Draws `k` uniform payload bits and encodes them.
pub fn random_codeword(enc: &SystematicEncoder, rng: &mut RngStream) -> Result<(Vec<u8>, Vec<u8>)> {
    let info: Vec<u8> = (0..enc.k()).map(|_| rng.bit()).collect();
    let cw = enc.encode(&info)?;
    Ok((info, cw))
}

/// Interleaves `bits`, pads with zeros to a multiple of `K`, maps to symbols
/// and passes every symbol through an independent fading draw.
pub fn transmit(
    bits: &[u8],
    perm: &Permutation,
    c: &Constellation,
    nm: &NoiseModel,
    rng: &mut RngStream,
) -> Result<Vec<ChannelObservation>> {
    let k = c.bits_per_symbol();
    let mut tx = perm.interleave(bits)?;
    tx.resize(symbols_needed(bits.len(), k) * k, 0);
    tx.chunks(k)
        .map(|chunk| Ok(apply_channel(c.modulate(chunk)?, nm, rng)))
        .collect()
}

/// Exact per-symbol LLRs, concatenated in transmission order (padding kept).
pub fn symbol_llrs(obs: &[ChannelObservation], c: &Constellation) -> Result<Vec<f64>> {
    let k = c.bits_per_symbol();
    let mut out = vec![0.0; obs.len() * k];
    for (o, chunk) in obs.iter().zip(out.chunks_mut(k)) {
        compute_llr_into(o, c, chunk)?;
    }
    Ok(out)
}

/// Drops padding and undoes the interleaver.
pub fn receive(padded_llrs: &[f64], perm: &Permutation) -> Result<Vec<f64>> {
    perm.deinterleave(&padded_llrs[..perm.len()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ldpc::ParityMatrix;

    #[test]
    fn noiseless_chain_recovers_the_codeword() {
        let pm = ParityMatrix::ieee80211n_648();
        let enc = SystematicEncoder::new(&pm).unwrap();
        for k in [1, 2, 4, 6, 8] {
            let c = Constellation::new(k).unwrap();
            let mut rng = RngStream::new(k as u64);
            let perm = Permutation::random(648, &mut rng);
            let (_, cw) = random_codeword(&enc, &mut rng).unwrap();
            let obs = transmit(&cw, &perm, &c, &NoiseModel::from_snr_db(80.0), &mut rng).unwrap();
            assert_eq!(obs.len(), symbols_needed(648, k));
            let llrs = receive(&symbol_llrs(&obs, &c).unwrap(), &perm).unwrap();
            let hard: Vec<u8> = llrs.iter().map(|&l| u8::from(l > 0.0)).collect();
            assert_eq!(hard, cw, "K={k}");
        }
    }

    #[test]
    fn odd_lengths_are_padded() {
        let c = Constellation::new(4).unwrap();
        let perm = Permutation::identity(10);
        let obs = transmit(
            &[1; 10],
            &perm,
            &c,
            &NoiseModel::from_snr_db(30.0),
            &mut RngStream::new(1),
        )
        .unwrap();
        assert_eq!(obs.len(), 3);
        assert_eq!(
            receive(&symbol_llrs(&obs, &c).unwrap(), &perm)
                .unwrap()
                .len(),
            10
        );
    }
}
