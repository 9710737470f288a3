//! Quantization-robust compression of per-symbol bit LLRs.
//!
//! The crate contains everything needed to train a small autoencoder that maps
//! the soft bits of one QAM symbol to a three-dimensional latent code, quantize
//! that code with a clipped uniform quantizer, and measure what the lossy
//! storage costs in block error rate on an LDPC-coded Rayleigh fading link:
//!
//! - [`modem`]: Gray-mapped QAM, exact LLRs, sufficient statistics, soft bits.
//! - [`channel`]: i.i.d. Rayleigh fading, complex Gaussian noise, seeded streams.
//! - [`ldpc`]: alist ingestion, systematic encoding, sum-product decoding.
//! - [`autonet`]: the symmetric MLP autoencoder and its Adam training loop.
//! - [`quantizers`]: latent quantizer, reference LLR quantizers, reconstruction LUT.
//! - [`pipeline`]: single-transmission and HARQ BLER experiments, histograms.

pub mod autonet;
pub mod channel;
mod error;
pub mod ldpc;
pub mod modem;
pub mod pipeline;
pub mod quantizers;

pub use error::{Error, Result};
