//! Scalar and latent quantizers.
//!
//! * the uniform clip quantizer used on the latent vector and, with a
//!   clipping threshold of 4, directly on LLRs;
//! * a mutual-information maximizing LLR quantizer;
//! * a Lloyd-Max quantizer for the fading gain, used by the
//!   sufficient-statistic baseline;
//! * the reconstruction table that replaces decoder inference.

mod amplitude;
mod codebook;
mod lut;
mod maxmi;
mod stats;
mod uniform;

pub use amplitude::{
    fit_gain_quantizer, lloyd_max, GainModel, GainQuantizer, LloydFit, GAIN_FIT_DRAWS,
    LLOYD_MAX_ITERATIONS, LLOYD_TOLERANCE,
};
pub use codebook::ScalarCodebook;
pub use lut::{lut_bytes, ReconstructionLut, MAX_LUT_BITS};
pub use maxmi::{
    empirical_mi, fit_max_mi, quantized_mi, unquantized_mi, MaxMiFit, MaxMiQuantizer, INIT_SPAN,
    MAX_MI_ITERATIONS, MAX_MI_TOLERANCE,
};
pub use stats::{quantize_stats_baseline, StatsQuantizer, R_TILDE_CLIP};
pub use uniform::{
    latent_storage_bits, quantize_latent, scalar_llr_baseline, scalar_llr_spec,
    UniformQuantizerSpec, DEFAULT_DELTA, MAX_UNIFORM_BITS, SCALAR_LLR_DELTA,
};
