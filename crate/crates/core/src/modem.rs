//! Gray-mapped square QAM, exact bit LLRs and the soft-bit transform.
//!
//! Conventions used throughout the crate:
//!
//! - A label bit of 0 maps to the negative half of its axis.
//! - Labels carry the in-phase bits first (most significant), then quadrature.
//! - `L = ln P(r | b = 1) - ln P(r | b = 0)`, so a positive LLR favours a one.

use num_complex::Complex64;

use crate::{Error, Result};

/// LLR magnitudes are clamped to this value on every producer path.
pub const LLR_MAX: f64 = 40.0;

/// Guard used when inverting `tanh` near the edges of `[-1, 1]`.
pub const ATANH_GUARD: f64 = 1e-12;

/// A unit-average-energy constellation with `2^K` labelled points.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    labels: Vec<u16>,
    // point for each label value
    by_label: Vec<Complex64>,
    // for each bit position, the label values with that bit set / cleared
    ones: Vec<Vec<u16>>,
    zeros: Vec<Vec<u16>>,
}

impl Constellation {
    /// Builds BPSK (`k_bits = 1`) or square QAM (`k_bits` in {2, 4, 6, 8}).
    pub fn new(k_bits: usize) -> Result<Self> {
        let (points, labels) = match k_bits {
            1 => (
                vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
                vec![0u16, 1],
            ),
            2 | 4 | 6 | 8 => square_qam(k_bits),
            _ => {
                return Err(Error::Config(format!(
                    "unsupported bits per symbol {k_bits}; expected one of 1, 2, 4, 6, 8"
                )))
            }
        };
        let size = 1usize << k_bits;
        let mut by_label = vec![Complex64::new(0.0, 0.0); size];
        for (p, &l) in points.iter().zip(&labels) {
            by_label[l as usize] = *p;
        }
        let mut ones = vec![Vec::with_capacity(size / 2); k_bits];
        let mut zeros = vec![Vec::with_capacity(size / 2); k_bits];
        for label in 0..size as u16 {
            for bit in 0..k_bits {
                if label_bit(label, bit, k_bits) == 1 {
                    ones[bit].push(label);
                } else {
                    zeros[bit].push(label);
                }
            }
        }
        Ok(Self {
            bits_per_symbol: k_bits,
            points,
            labels,
            by_label,
            ones,
            zeros,
        })
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    /// Point carrying the given label value.
    pub fn point(&self, label: u16) -> Complex64 {
        self.by_label[label as usize]
    }

    /// Largest absolute coordinate on either axis.
    pub fn max_coordinate(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.re.abs().max(p.im.abs()))
            .fold(0.0, f64::max)
    }

    /// Maps `K` bits (first bit most significant) to a symbol.
    pub fn modulate(&self, bits: &[u8]) -> Result<Complex64> {
        if bits.len() != self.bits_per_symbol {
            return Err(Error::LengthMismatch {
                expected: self.bits_per_symbol,
                actual: bits.len(),
            });
        }
        Ok(self.point(bits_to_label(bits)))
    }

    /// Label of the point nearest to `x`.
    pub fn nearest_label(&self, x: Complex64) -> u16 {
        let mut best = (f64::INFINITY, 0u16);
        for (p, &l) in self.points.iter().zip(&self.labels) {
            let d = (x - p).norm_sqr();
            if d < best.0 {
                best = (d, l);
            }
        }
        best.1
    }

    /// Fills `out` with per-bit LLRs given negative distance metrics per label.
    fn llrs_from_metrics(&self, metrics: &[f64], out: &mut [f64]) {
        for bit in 0..self.bits_per_symbol {
            let one = log_sum_exp(self.ones[bit].iter().map(|&l| metrics[l as usize]));
            let zero = log_sum_exp(self.zeros[bit].iter().map(|&l| metrics[l as usize]));
            out[bit] = (one - zero).clamp(-LLR_MAX, LLR_MAX);
        }
    }
}

fn square_qam(k_bits: usize) -> (Vec<Complex64>, Vec<u16>) {
    let half = k_bits / 2;
    let per_axis = 1usize << half;
    let mean_energy = 2.0 * ((per_axis * per_axis) as f64 - 1.0) / 3.0;
    let scale = mean_energy.sqrt().recip();
    let amplitude = |i: usize| (2.0 * i as f64 - (per_axis as f64 - 1.0)) * scale;
    let gray = |i: usize| (i ^ (i >> 1)) as u16;

    let mut points = Vec::with_capacity(per_axis * per_axis);
    let mut labels = Vec::with_capacity(per_axis * per_axis);
    for i in 0..per_axis {
        for q in 0..per_axis {
            points.push(Complex64::new(amplitude(i), amplitude(q)));
            labels.push((gray(i) << half) | gray(q));
        }
    }
    (points, labels)
}

/// Bit `bit` (0 = first, most significant) of a `k_bits`-wide label.
pub fn label_bit(label: u16, bit: usize, k_bits: usize) -> u8 {
    ((label >> (k_bits - 1 - bit)) & 1) as u8
}

pub fn bits_to_label(bits: &[u8]) -> u16 {
    bits.iter()
        .fold(0u16, |acc, &b| (acc << 1) | u16::from(b & 1))
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// One received sample together with the channel state that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelObservation {
    pub r: Complex64,
    pub h: Complex64,
    pub noise_var: f64,
}

/// The triple `(G, Re r/h, Im r/h)` from which all LLRs of a symbol follow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientStat {
    pub g: f64,
    pub r_re: f64,
    pub r_im: f64,
}

impl SufficientStat {
    pub fn equalized(&self) -> Complex64 {
        Complex64::new(self.r_re, self.r_im)
    }
}

/// Natural-log bit LLRs of one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(pub Vec<f64>);

/// `tanh(L / 2)` of each LLR; every entry lies in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftBitVector(pub Vec<f64>);

fn validate_noise(noise_var: f64) -> Result<()> {
    if noise_var > 0.0 && noise_var.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidNoiseVariance(noise_var))
    }
}

/// Exact LLRs straight from `(r, h, noise_var)`.
pub fn compute_llr(obs: &ChannelObservation, c: &Constellation) -> Result<LlrVector> {
    let mut out = vec![0.0; c.bits_per_symbol()];
    compute_llr_into(obs, c, &mut out)?;
    Ok(LlrVector(out))
}

/// Allocation-free form of [`compute_llr`]; `out` must hold `K` values.
pub fn compute_llr_into(
    obs: &ChannelObservation,
    c: &Constellation,
    out: &mut [f64],
) -> Result<()> {
    if obs.h == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateChannel);
    }
    validate_noise(obs.noise_var)?;
    let mut metrics = [0.0f64; 256];
    let size = 1usize << c.bits_per_symbol();
    for (l, m) in metrics[..size].iter_mut().enumerate() {
        *m = -(obs.r - obs.h * c.point(l as u16)).norm_sqr() / obs.noise_var;
    }
    c.llrs_from_metrics(&metrics[..size], out);
    Ok(())
}

pub fn sufficient_stats(obs: &ChannelObservation) -> Result<SufficientStat> {
    if obs.h == Complex64::new(0.0, 0.0) {
        return Err(Error::DegenerateChannel);
    }
    validate_noise(obs.noise_var)?;
    let eq = obs.r / obs.h;
    Ok(SufficientStat {
        g: obs.h.norm_sqr() / obs.noise_var,
        r_re: eq.re,
        r_im: eq.im,
    })
}

/// LLRs from the sufficient statistic, using `exp(-G |r~ - s|^2)` per point.
pub fn llr_from_stats(s: &SufficientStat, c: &Constellation) -> Result<LlrVector> {
    let mut out = vec![0.0; c.bits_per_symbol()];
    llr_from_stats_into(s, c, &mut out)?;
    Ok(LlrVector(out))
}

pub fn llr_from_stats_into(s: &SufficientStat, c: &Constellation, out: &mut [f64]) -> Result<()> {
    if !(s.g >= 0.0) || !s.g.is_finite() || !s.r_re.is_finite() || !s.r_im.is_finite() {
        return Err(Error::Config(format!("invalid sufficient statistic {s:?}")));
    }
    let eq = s.equalized();
    let mut metrics = [0.0f64; 256];
    let size = 1usize << c.bits_per_symbol();
    for (l, m) in metrics[..size].iter_mut().enumerate() {
        *m = -s.g * (eq - c.point(l as u16)).norm_sqr();
    }
    c.llrs_from_metrics(&metrics[..size], out);
    Ok(())
}

pub fn to_soft_bits(l: &LlrVector) -> SoftBitVector {
    SoftBitVector(l.0.iter().map(|&x| soft_bit(x)).collect())
}

#[inline]
pub fn soft_bit(llr: f64) -> f64 {
    (0.5 * llr).tanh()
}

pub fn from_soft_bits(s: &SoftBitVector) -> Result<LlrVector> {
    s.0.iter()
        .map(|&x| llr_from_soft_bit(x))
        .collect::<Result<Vec<_>>>()
        .map(LlrVector)
}

/// Inverse soft-bit map. Fully saturated values (`|x| == 1`) map to `±LLR_MAX`.
pub fn llr_from_soft_bit(x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::SoftBitOutOfRange(x));
    }
    if x.abs() == 1.0 {
        return Ok(LLR_MAX.copysign(x));
    }
    let guarded = x.clamp(-1.0 + ATANH_GUARD, 1.0 - ATANH_GUARD);
    Ok((2.0 * guarded.atanh()).clamp(-LLR_MAX, LLR_MAX))
}
