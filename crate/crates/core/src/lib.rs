//! Polar codes that perform distribution matching and error correction in
//! one step, applied to on-off keying (OOK) over the AWGN channel.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs plus explicit seeds; file formats, the CLI and the
//! parallel simulation harness live in the `ookpolar-sim` crate.
//!
//! Bit vectors are plain `u8` slices holding 0 or 1. Indices are zero-based
//! and in natural order (no bit-reversal) everywhere.
//!
//! The pieces:
//!
//! - [`polar`] and [`crc`]: the transform `x = u G_n` and the outer CRC.
//! - [`channel`]: OOK over unit-variance AWGN: sampling, LLRs, mutual
//!   information and the optimal input distribution.
//! - [`kernel`]: the single-path successive-cancellation recursion shared by
//!   the encoder, the decoders and code construction.
//! - [`construction`] and [`code`]: Monte Carlo polarization statistics and
//!   the selection of information, frozen and dynamic index sets.
//! - [`encoder`]: successive shaped encoding (randomized rounding, argmax,
//!   list encoding).
//! - [`decoder`]: SC, CRC-aided SCL and encoder-mimicking decoding.
//! - [`rate_loss`]: finite-length rate loss of the polar matcher and of
//!   constant-composition matching.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod code;
pub mod construction;
pub mod crc;
pub mod decoder;
pub mod encoder;
mod error;
pub mod kernel;
mod list;
pub mod polar;
pub mod rate_loss;
pub mod seed;

pub use channel::{ChannelParams, LLR_CLIP};
pub use code::{CodeSpec, IndexClass};
pub use construction::PolarizationStats;
pub use crc::CrcConfig;
pub use decoder::{DecodeConfig, DecodeOutput};
pub use encoder::{EncodeRule, Encoded};
pub use error::Error;
pub use kernel::Metric;

pub type Result<T> = core::result::Result<T, Error>;
