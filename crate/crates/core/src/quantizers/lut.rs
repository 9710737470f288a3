use super::uniform::UniformQuantizerSpec;
use crate::autonet::{decoder_forward, Matrix, MlpParams};
use crate::{Error, Result};

/// Largest latent resolution a table is built for.
pub const MAX_LUT_BITS: u32 = 8;

/// Decoder outputs precomputed for every quantized latent cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionLut {
    spec: UniformQuantizerSpec,
    dims: usize,
    k: usize,
    table: Vec<f64>,
}

/// Indices a quantized value can take: all `2^n_bits + 2` states, or only the
/// interior cells when saturation is folded.
fn reachable(spec: &UniformQuantizerSpec) -> (u32, u32) {
    if spec.fold_saturation {
        (1, spec.cells())
    } else {
        (0, spec.alphabet())
    }
}

/// Table size in bytes for the given resolution and widths.
pub fn lut_bytes(spec: &UniformQuantizerSpec, dims: usize, k: usize) -> u128 {
    u128::from(reachable(spec).1).pow(dims as u32) * k as u128 * 8
}

impl ReconstructionLut {
    pub fn build(p: &MlpParams, spec: &UniformQuantizerSpec) -> Result<Self> {
        spec.validate()?;
        if spec.n_bits > MAX_LUT_BITS {
            return Err(Error::Config(format!(
                "LUT for n_bits = {} would need {} bytes; at most {MAX_LUT_BITS} bits are supported",
                spec.n_bits,
                lut_bytes(spec, p.latent_dim(), p.k())
            )));
        }
        let dims = p.latent_dim();
        let entries = (reachable(spec).1 as usize).pow(dims as u32);
        let mut levels = Matrix::zeros(entries, dims);
        for e in 0..entries {
            let idx = Self::unflatten_with(e, spec, dims);
            for (v, &i) in levels.row_mut(e).iter_mut().zip(&idx) {
                *v = spec.level(i);
            }
        }
        let out = decoder_forward(&levels, p)?;
        Ok(Self {
            spec: *spec,
            dims,
            k: p.k(),
            table: out.into_vec(),
        })
    }

    pub fn spec(&self) -> &UniformQuantizerSpec {
        &self.spec
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.table.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Row-major flat index, first latent coordinate most significant.
    pub fn flatten(&self, idx: &[u32]) -> usize {
        let (first, m) = reachable(&self.spec);
        idx.iter()
            .fold(0, |acc, &i| acc * m as usize + (i - first) as usize)
    }

    pub fn unflatten(&self, flat: usize) -> Vec<u32> {
        Self::unflatten_with(flat, &self.spec, self.dims)
    }

    fn unflatten_with(mut flat: usize, spec: &UniformQuantizerSpec, dims: usize) -> Vec<u32> {
        let (first, m) = reachable(spec);
        let m = m as usize;
        let mut idx = vec![0u32; dims];
        for slot in idx.iter_mut().rev() {
            *slot = (flat % m) as u32 + first;
            flat /= m;
        }
        idx
    }

    pub fn entry(&self, flat: usize) -> &[f64] {
        &self.table[flat * self.k..(flat + 1) * self.k]
    }

    pub fn lookup(&self, idx: &[u32]) -> &[f64] {
        self.entry(self.flatten(idx))
    }

    /// Quantizes `z` and returns the stored reconstruction.
    pub fn reconstruct(&self, z: &[f64]) -> &[f64] {
        let (first, m) = reachable(&self.spec);
        let flat = z.iter().fold(0, |acc, &x| {
            acc * m as usize + (self.spec.index(x) - first) as usize
        });
        self.entry(flat)
    }

    /// CSV with one row per cell: flat index, level triple, decoder outputs.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index");
        for d in 0..self.dims {
            s.push_str(&format!(",z{d}"));
        }
        for j in 0..self.k {
            s.push_str(&format!(",y{j}"));
        }
        s.push('\n');
        for e in 0..self.len() {
            s.push_str(&e.to_string());
            for i in self.unflatten(e) {
                s.push_str(&format!(",{:e}", self.spec.level(i)));
            }
            for v in self.entry(e) {
                s.push_str(&format!(",{v:e}"));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RngStream;

    fn net() -> MlpParams {
        MlpParams::init(MlpParams::layout(4), 3, &mut RngStream::new(31)).unwrap()
    }

    #[test]
    fn entry_counts() {
        let p = net();
        let s2 = UniformQuantizerSpec::new(0.8, 2).unwrap();
        assert_eq!(ReconstructionLut::build(&p, &s2).unwrap().len(), 216);
        let s5 = UniformQuantizerSpec::new(0.8, 5).unwrap();
        assert_eq!(ReconstructionLut::build(&p, &s5).unwrap().len(), 39_304);
        assert_eq!(
            ReconstructionLut::build(&p, &s5.folded()).unwrap().len(),
            32_768
        );
        let s9 = UniformQuantizerSpec::new(0.8, 9).unwrap();
        let err = ReconstructionLut::build(&p, &s9).unwrap_err();
        assert!(
            matches!(err, Error::Config(ref m) if m.contains("bytes")),
            "{err:?}"
        );
    }

    #[test]
    fn lookup_equals_decoder() {
        let p = net();
        for spec in [
            UniformQuantizerSpec::new(0.8, 3).unwrap(),
            UniformQuantizerSpec::new(0.8, 3).unwrap().folded(),
        ] {
            let lut = ReconstructionLut::build(&p, &spec).unwrap();
            let mut rng = RngStream::new(4);
            for _ in 0..200 {
                let z: Vec<f64> = (0..3).map(|_| 2.4 * rng.uniform() - 1.2).collect();
                let (idx, lv) = super::super::quantize_latent(&z, &spec);
                let direct = decoder_forward(&Matrix::from_vec(1, 3, lv).unwrap(), &p).unwrap();
                assert_eq!(lut.lookup(&idx), direct.row(0));
                assert_eq!(lut.reconstruct(&z), direct.row(0));
            }
        }
    }

    #[test]
    fn folded_table_skips_saturation_states() {
        let spec = UniformQuantizerSpec::new(0.8, 2).unwrap().folded();
        let lut = ReconstructionLut::build(&net(), &spec).unwrap();
        assert_eq!(lut.len(), 64);
        assert_eq!(lut.unflatten(0), vec![1, 1, 1]);
        assert_eq!(lut.unflatten(63), vec![4, 4, 4]);
        assert_eq!(lut.flatten(&[2, 3, 4]), 16 + 2 * 4 + 3);
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let p = net();
        let lut =
            ReconstructionLut::build(&p, &UniformQuantizerSpec::new(0.8, 2).unwrap()).unwrap();
        let csv = lut.to_csv();
        assert_eq!(csv.lines().count(), 217);
        assert!(csv.starts_with("index,z0,z1,z2,y0,y1,y2,y3\n"));
        assert_eq!(lut.unflatten(lut.flatten(&[1, 4, 5])), vec![1, 4, 5]);
    }
}
