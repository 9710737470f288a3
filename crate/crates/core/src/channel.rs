//! i.i.d. Rayleigh block fading with complex Gaussian noise.
//!
//! SNR is `E|h|^2 * Es / noise_var` with `E|h|^2 = Es = 1`, so a given
//! `snr_db` fixes `noise_var = 10^(-snr_db / 10)`.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::modem::ChannelObservation;

/// Stream labels. Every consumer of randomness derives its own stream from
/// `(seed, label, indices...)`, so no two purposes ever share draws.
pub mod stream {
    pub const TRAIN_DATA: u64 = 0x7472_6169_6e00_0001;
    pub const EVAL: u64 = 0x6576_616c_0000_0002;
    pub const INTERLEAVER: u64 = 0x696e_746c_0000_0003;
    pub const HARQ_SPLIT: u64 = 0x6861_7271_0000_0004;
    pub const INIT: u64 = 0x696e_6974_0000_0005;
    pub const SHUFFLE: u64 = 0x7368_7566_0000_0006;
    pub const LATENT_NOISE: u64 = 0x6e6f_6973_0000_0007;
    pub const FIT: u64 = 0x6669_7400_0000_0008;
}

/// A seeded, reproducible random stream.
///
/// Streams are derived from a root seed plus a path of labels, so each worker
/// or frame can own an independent stream without coordination.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::derive(seed, &[])
    }

    pub fn derive(seed: u64, path: &[u64]) -> Self {
        let mut state = splitmix64(seed ^ 0x243f_6a88_85a3_08d3);
        for &p in path {
            state = splitmix64(state ^ splitmix64(p));
        }
        let mut key = [0u8; 32];
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self {
            rng: ChaCha8Rng::from_seed(key),
        }
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn bit(&mut self) -> u8 {
        (self.rng.next_u32() & 1) as u8
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        use rand::seq::SliceRandom;
        items.shuffle(&mut self.rng);
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Noise level for a given SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    snr_db: f64,
    noise_var: f64,
}

impl NoiseModel {
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            snr_db,
            noise_var: snr_to_noise_var(snr_db),
        }
    }

    /// Noise suppressed entirely; observations carry `noise_var = 0`.
    pub fn noiseless() -> Self {
        Self {
            snr_db: f64::INFINITY,
            noise_var: 0.0,
        }
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }
}

pub fn snr_to_noise_var(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// `h ~ CN(0, 1)`.
pub fn draw_channel(rng: &mut RngStream) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(s * rng.gaussian(), s * rng.gaussian())
}

/// `r = h s + n` with a fresh fading coefficient for this symbol.
pub fn apply_channel(s: Complex64, nm: &NoiseModel, rng: &mut RngStream) -> ChannelObservation {
    let h = draw_channel(rng);
    let sigma = (0.5 * nm.noise_var).sqrt();
    let n = Complex64::new(sigma * rng.gaussian(), sigma * rng.gaussian());
    ChannelObservation {
        r: h * s + n,
        h,
        noise_var: nm.noise_var,
    }
}
