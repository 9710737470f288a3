//! Binary LDPC codes: parity-check matrices, systematic encoding, belief
//! propagation decoding and the bit interleaver used around the modem.

mod alist;
mod decoder;
mod encoder;
mod interleaver;

pub use alist::{load_alist, to_alist};
pub use decoder::{decode_bp, BpDecoder, CheckRule, DecodeOutput};
pub use encoder::SystematicEncoder;
pub use interleaver::Permutation;

use crate::{Error, Result};

/// The IEEE 802.11n (648, 324) quasi-cyclic code (Z = 27), as an alist.
pub const IEEE80211N_648_R12_ALIST: &str = include_str!("../../assets/ieee80211n_648_r12.alist");

/// Sparse parity-check matrix with both adjacency views.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityMatrix {
    n: usize,
    check_vars: Vec<Vec<usize>>,
    var_checks: Vec<Vec<usize>>,
}

impl ParityMatrix {
    /// Builds the matrix from per-check variable lists.
    pub fn from_checks(n: usize, checks: Vec<Vec<usize>>) -> Result<Self> {
        let mut var_checks = vec![Vec::new(); n];
        let mut check_vars = Vec::with_capacity(checks.len());
        for (c, mut vars) in checks.into_iter().enumerate() {
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::CodeConstruction(format!(
                    "check {c} repeats a variable"
                )));
            }
            if let Some(&v) = vars.iter().find(|&&v| v >= n) {
                return Err(Error::CodeConstruction(format!(
                    "check {c} references variable {v} but n = {n}"
                )));
            }
            for &v in &vars {
                var_checks[v].push(c);
            }
            check_vars.push(vars);
        }
        Ok(Self {
            n,
            check_vars,
            var_checks,
        })
    }

    pub fn ieee80211n_648() -> Self {
        load_alist(IEEE80211N_648_R12_ALIST).expect("bundled alist is well formed")
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of checks.
    pub fn m(&self) -> usize {
        self.check_vars.len()
    }

    pub fn check_vars(&self, c: usize) -> &[usize] {
        &self.check_vars[c]
    }

    pub fn var_checks(&self, v: usize) -> &[usize] {
        &self.var_checks[v]
    }

    pub fn num_edges(&self) -> usize {
        self.check_vars.iter().map(Vec::len).sum()
    }

    /// True when `bits` satisfies every check.
    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n
            && self
                .check_vars
                .iter()
                .all(|vars| vars.iter().fold(0u8, |acc, &v| acc ^ (bits[v] & 1)) == 0)
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut rows = self.dense_rows();
        let words = self.n.div_ceil(64);
        let mut rank = 0;
        for col in 0..self.n {
            let (w, b) = (col / 64, 1u64 << (col % 64));
            let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & b != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for r in rank + 1..rows.len() {
                if rows[r][w] & b != 0 {
                    for i in 0..words {
                        rows[r][i] ^= pivot[i];
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    pub(crate) fn dense_rows(&self) -> Vec<Vec<u64>> {
        let words = self.n.div_ceil(64);
        self.check_vars
            .iter()
            .map(|vars| {
                let mut row = vec![0u64; words];
                for &v in vars {
                    row[v / 64] |= 1 << (v % 64);
                }
                row
            })
            .collect()
    }
}

#[cfg(test)]
pub(crate) mod toy {
    use super::*;

    /// A 3x6 rate-1/2 toy code.
    pub const TOY_ALIST: &str = "6 3
2 3
2 2 2 1 1 1
3 3 3
1 3
1 2
2 3
1 0
2 0
3 0
1 2 4
2 3 5
1 3 6
";

    pub fn toy() -> ParityMatrix {
        load_alist(TOY_ALIST).unwrap()
    }

    #[test]
    fn toy_shape() {
        let h = toy();
        assert_eq!((h.n(), h.m(), h.rank()), (6, 3, 3));
        assert_eq!(h.check_vars(0), &[0, 1, 3]);
        assert_eq!(h.var_checks(0), &[0, 2]);
    }

    #[test]
    fn bundled_code_is_full_rank() {
        let h = ParityMatrix::ieee80211n_648();
        assert_eq!((h.n(), h.m()), (648, 324));
        assert_eq!(h.rank(), 324);
    }

    #[test]
    fn repeated_edges_are_rejected() {
        assert!(ParityMatrix::from_checks(4, vec![vec![0, 1, 1]]).is_err());
        assert!(ParityMatrix::from_checks(4, vec![vec![0, 4]]).is_err());
    }
}
