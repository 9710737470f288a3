use crate::{Error, Result};

/// Clip-and-quantize to `2^n_bits` bin centres on `[-delta, delta]`.
///
/// Indices: `0` is the `-delta` saturation state, `1..=2^n_bits` the interior
/// cells from left to right, `2^n_bits + 1` the `+delta` saturation state.
/// With `fold_saturation` the two saturation states are merged into the
/// extreme interior cells, so exactly `n_bits` bits are needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizerSpec {
    pub delta: f64,
    pub n_bits: u32,
    pub fold_saturation: bool,
}

pub const DEFAULT_DELTA: f64 = 0.8;
pub const MAX_UNIFORM_BITS: u32 = 16;

impl UniformQuantizerSpec {
    pub fn new(delta: f64, n_bits: u32) -> Result<Self> {
        let s = Self {
            delta,
            n_bits,
            fold_saturation: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn folded(self) -> Self {
        Self {
            fold_saturation: true,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "clipping threshold must be positive, got {}",
                self.delta
            )));
        }
        if !(1..=MAX_UNIFORM_BITS).contains(&self.n_bits) {
            return Err(Error::Config(format!(
                "n_bits must be in 1..={MAX_UNIFORM_BITS}, got {}",
                self.n_bits
            )));
        }
        Ok(())
    }

    /// Number of interior cells, `2^n_bits`.
    pub fn cells(&self) -> u32 {
        1 << self.n_bits
    }

    /// Size of the index alphabet per value, `2^n_bits + 2`.
    pub fn alphabet(&self) -> u32 {
        self.cells() + 2
    }

    /// Bin width `delta / 2^(n_bits - 1)`.
    pub fn step(&self) -> f64 {
        self.delta / f64::from(1u32 << (self.n_bits - 1))
    }

    /// Reconstruction value of an index.
    pub fn level(&self, index: u32) -> f64 {
        let m = self.cells();
        match index {
            0 => -self.delta,
            i if i == m + 1 => self.delta,
            i => {
                let k = i64::from(i) - 1;
                self.delta * (2 * k + 1 - i64::from(m)) as f64 / f64::from(m)
            }
        }
    }

    pub fn index(&self, x: f64) -> u32 {
        let m = self.cells();
        if x > self.delta {
            return if self.fold_saturation { m } else { m + 1 };
        }
        if x < -self.delta {
            return if self.fold_saturation { 1 } else { 0 };
        }
        let half = f64::from(m / 2);
        let mut k = ((x / self.delta) * half + half)
            .floor()
            .clamp(0.0, f64::from(m - 1)) as u32;
        // settle the estimate against the exact boundary values
        while k + 1 < m && x >= self.boundary(k + 1) {
            k += 1;
        }
        while k > 0 && x < self.boundary(k) {
            k -= 1;
        }
        k + 1
    }

    /// Lower edge of interior cell `k` (0-based), `delta (2k - 2^n) / 2^n`.
    pub fn boundary(&self, k: u32) -> f64 {
        let m = self.cells();
        self.delta * (2 * i64::from(k) - i64::from(m)) as f64 / f64::from(m)
    }

    pub fn quantize(&self, x: f64) -> (u32, f64) {
        let i = self.index(x);
        (i, self.level(i))
    }
}

/// Quantizes a latent vector elementwise.
pub fn quantize_latent(z: &[f64], spec: &UniformQuantizerSpec) -> (Vec<u32>, Vec<f64>) {
    z.iter().map(|&x| spec.quantize(x)).unzip()
}

/// Bits stored per symbol for a latent of width `dims`.
pub fn latent_storage_bits(spec: &UniformQuantizerSpec, dims: usize) -> usize {
    dims * spec.n_bits as usize
}

/// Clipping threshold of the scalar LLR reference quantizer.
pub const SCALAR_LLR_DELTA: f64 = 4.0;

/// The uniform quantizer applied directly to LLRs with `delta = 4`.
pub fn scalar_llr_spec(n_bits: u32) -> Result<UniformQuantizerSpec> {
    UniformQuantizerSpec::new(SCALAR_LLR_DELTA, n_bits)
}

pub fn scalar_llr_baseline(llrs: &[f64], spec: &UniformQuantizerSpec) -> Vec<f64> {
    llrs.iter().map(|&l| spec.quantize(l).1).collect()
}
