use super::ParityMatrix;
use crate::{Error, Result};

/// Systematic encoder obtained by Gauss-Jordan elimination of `H`.
///
/// Pivots are searched from the last column backwards, so codes with a
/// dual-diagonal parity part keep their information bits in the leading
/// positions.
#[derive(Debug, Clone)]
pub struct SystematicEncoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    // one packed mask over the info bits per parity position
    parity_masks: Vec<Vec<u64>>,
}

impl SystematicEncoder {
    pub fn new(pm: &ParityMatrix) -> Result<Self> {
        let n = pm.n();
        let m = pm.m();
        let words = n.div_ceil(64);
        let mut rows = pm.dense_rows();
        let mut pivots = Vec::with_capacity(m);
        let mut rank = 0;
        for col in (0..n).rev() {
            if rank == m {
                break;
            }
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..m).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[w] & b != 0 {
                    for i in 0..words {
                        row[i] ^= pivot[i];
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rank < m {
            return Err(Error::CodeConstruction(format!(
                "parity-check matrix has rank {rank} < {m} checks"
            )));
        }

        let mut is_pivot = vec![false; n];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let k = info_positions.len();
        let parity_masks = rows
            .iter()
            .map(|row| {
                let mut mask = vec![0u64; k.div_ceil(64)];
                for (j, &col) in info_positions.iter().enumerate() {
                    if row[col / 64] & (1 << (col % 64)) != 0 {
                        mask[j / 64] |= 1 << (j % 64);
                    }
                }
                mask
            })
            .collect();
        Ok(Self {
            n,
            info_positions,
            parity_positions: pivots,
            parity_masks,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of information bits.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    /// Codeword positions that carry the information bits, ascending.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::LengthMismatch {
                expected: self.k(),
                actual: info.len(),
            });
        }
        let mut packed = vec![0u64; self.k().div_ceil(64)];
        for (j, &b) in info.iter().enumerate() {
            packed[j / 64] |= u64::from(b & 1) << (j % 64);
        }
        let mut cw = vec![0u8; self.n];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            cw[pos] = b & 1;
        }
        for (&pos, mask) in self.parity_positions.iter().zip(&self.parity_masks) {
            let ones: u32 = mask
                .iter()
                .zip(&packed)
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            cw[pos] = (ones & 1) as u8;
        }
        Ok(cw)
    }

    /// Information bits of a codeword.
    pub fn extract_info(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}
