use crate::channel::RngStream;
use crate::{Error, Result};

/// A bijection on `0..n`; `interleave` gathers `out[i] = input[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Uniformly random permutation drawn from `rng`.
    pub fn random(n: usize, rng: &mut RngStream) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        rng.shuffle(&mut p);
        Self(p)
    }

    pub fn from_vec(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &i in &map {
            if i >= map.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Config("interleaver map is not a permutation".into()));
            }
        }
        Ok(Self(map))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn interleave<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check_len(input.len())?;
        Ok(self.0.iter().map(|&j| input[j]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        self.check_len(input.len())?;
        let mut out = vec![T::default(); input.len()];
        for (&j, &x) in self.0.iter().zip(input) {
            out[j] = x;
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.0.len() {
            return Err(Error::LengthMismatch {
                expected: self.0.len(),
                actual: len,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_a_no_op() {
        let p = Permutation::identity(5);
        assert_eq!(p.interleave(&[1, 2, 3, 4, 5]).unwrap(), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn seeded_permutations_repeat() {
        let a = Permutation::random(648, &mut RngStream::new(9));
        let b = Permutation::random(648, &mut RngStream::new(9));
        assert_eq!(a, b);
        assert_ne!(a, Permutation::identity(648));
        assert!(Permutation::from_vec(a.as_slice().to_vec()).is_ok());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let p = Permutation::identity(4);
        assert!(p.interleave(&[1, 2, 3]).is_err());
        assert!(p.deinterleave(&[1.0, 2.0]).is_err());
        assert!(Permutation::from_vec(vec![0, 0, 1]).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(data in prop::collection::vec(any::<i32>(), 1..200), seed in any::<u64>()) {
            let p = Permutation::random(data.len(), &mut RngStream::new(seed));
            let back = p.deinterleave(&p.interleave(&data).unwrap()).unwrap();
            prop_assert_eq!(back, data);
        }
    }
}
