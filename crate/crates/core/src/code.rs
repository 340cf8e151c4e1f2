//! Shaped polar code description.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::channel::h2;
use crate::crc::CrcConfig;
use crate::{Error, Result};

/// Role of one input index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexClass {
    /// Reliable and free under the shaping constraint: carries payload or CRC.
    #[serde(rename = "I")]
    Information,
    /// Fixed to a value known at both ends.
    #[serde(rename = "F")]
    Frozen,
    /// Set by the encoder from the preceding inputs; unknown to the decoder.
    #[serde(rename = "D")]
    Dynamic,
}

impl IndexClass {
    pub fn as_char(self) -> char {
        match self {
            IndexClass::Information => 'I',
            IndexClass::Frozen => 'F',
            IndexClass::Dynamic => 'D',
        }
    }
}

/// One shaped polar code: index classification, frozen values, CRC and the
/// parameters it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    #[serde(rename = "N")]
    pub len: usize,
    pub n: u32,
    #[serde(rename = "R")]
    pub rate: f64,
    /// Number of information positions, `round(N R)`; includes CRC bits.
    #[serde(rename = "K")]
    pub info_len: usize,
    /// Target probability of a one in the codeword.
    pub p: f64,
    #[serde(rename = "D")]
    pub dynamic_len: usize,
    pub classes: Vec<IndexClass>,
    /// One value per frozen index, in ascending index order.
    pub frozen_values: Vec<u8>,
    pub crc: CrcConfig,
    pub design_snr_db: f64,
    pub seed: u64,
    pub source_trials: u64,
    pub channel_trials: u64,
    /// Set when `D < ceil(N (1 - H2(p)))`.
    pub below_shaping_limit: bool,
}

/// Number of information positions for length `len` and rate `rate`.
pub fn info_len_for(len: usize, rate: f64) -> usize {
    libm::round(len as f64 * rate) as usize
}

/// `ceil(N (1 - H2(p)))`, the asymptotic number of dynamic positions.
pub fn shaping_limit(len: usize, p: f64) -> usize {
    libm::ceil(len as f64 * (1.0 - h2(p)) - 1e-9).max(0.0) as usize
}

impl CodeSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.len.is_power_of_two() || self.len < 2 {
            return Err(Error::NotPowerOfTwo(self.len));
        }
        if self.classes.len() != self.len {
            return Err(Error::LengthMismatch { expected: self.len, got: self.classes.len() });
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidProbability(self.p));
        }
        self.crc.validate()?;
        let count = |c| self.classes.iter().filter(|&&k| k == c).count();
        let info = count(IndexClass::Information);
        let frozen = count(IndexClass::Frozen);
        let dynamic = count(IndexClass::Dynamic);
        if info != self.info_len {
            return Err(Error::LengthMismatch { expected: self.info_len, got: info });
        }
        if dynamic != self.dynamic_len {
            return Err(Error::LengthMismatch { expected: self.dynamic_len, got: dynamic });
        }
        if frozen != self.frozen_values.len() {
            return Err(Error::LengthMismatch { expected: frozen, got: self.frozen_values.len() });
        }
        if info < self.crc.width() {
            return Err(Error::CrcTooLong { info, crc: self.crc.width() });
        }
        Ok(())
    }

    /// Payload bits per frame, excluding CRC.
    pub fn payload_len(&self) -> usize {
        self.info_len - self.crc.width()
    }

    pub fn frozen_len(&self) -> usize {
        self.len - self.info_len - self.dynamic_len
    }

    fn positions(&self, class: IndexClass) -> Vec<usize> {
        self.classes.iter().enumerate().filter(|(_, &c)| c == class).map(|(i, _)| i).collect()
    }

    pub fn info_positions(&self) -> Vec<usize> {
        self.positions(IndexClass::Information)
    }

    pub fn frozen_positions(&self) -> Vec<usize> {
        self.positions(IndexClass::Frozen)
    }

    pub fn dynamic_positions(&self) -> Vec<usize> {
        self.positions(IndexClass::Dynamic)
    }

    /// Length-N vector with the frozen value at frozen indices and 0 elsewhere.
    pub fn frozen_map(&self) -> Vec<u8> {
        let mut out = alloc::vec![0u8; self.len];
        for (i, &v) in self.frozen_positions().iter().zip(&self.frozen_values) {
            out[*i] = v;
        }
        out
    }

    /// Information-position bits of `u` (payload followed by CRC).
    pub fn extract_info(&self, u: &[u8]) -> Vec<u8> {
        self.classes
            .iter()
            .zip(u)
            .filter(|(&c, _)| c == IndexClass::Information)
            .map(|(_, &b)| b)
            .collect()
    }

    /// Classes as a string of `I`, `F` and `D`.
    pub fn class_string(&self) -> alloc::string::String {
        self.classes.iter().map(|c| c.as_char()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shaping_limit_values() {
        assert_eq!(shaping_limit(1024, 0.5), 0);
        // H2(0.11) = 0.49992...
        assert_eq!(shaping_limit(1024, 0.11), 513);
        assert_eq!(info_len_for(1024, 0.67), 686);
        assert_eq!(info_len_for(4096, 0.25), 1024);
    }
}
