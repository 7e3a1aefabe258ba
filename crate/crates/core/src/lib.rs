//! Link-level simulator for codebook-feedback MISO transmit beamforming.
//!
//! The crate measures link quality with the average error vector magnitude
//! squared (AEVMS) at the demodulator input alongside BER, and compares
//! one-round training (stale effective channel) with one-and-a-half-round
//! training (fresh effective channel), MRT and Alamouti baselines.
//!
//! Module map:
//! - [`numerics`]: complex vectors, seeded streams, Bessel J0
//! - [`channel`]: Rayleigh draws, Gauss–Markov aging, pilot estimation
//! - [`codebook`]: DFT, equal-gain, Lloyd and mixed codebooks
//! - [`transceiver`]: modulation and single-trial link simulation
//! - [`analysis`]: sweeps, diversity and coding-gain fits, floor detection
//! - [`cli`]: argument/config parsing and run orchestration

// `!(x >= 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod codebook;
pub mod error;
pub mod numerics;
pub mod transceiver;
pub mod analysis;
pub mod cli;

pub use error::{Error, Result};
