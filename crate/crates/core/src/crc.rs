//! Bit-serial CRC over 0/1 slices.
//!
//! Check bits are produced most-significant first and appended to the
//! payload before it is placed on the information positions.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrcConfig {
    /// 0 disables the CRC.
    pub width: u32,
    pub poly: u32,
    pub init: u32,
    /// Feed each 8-bit group of the input least-significant bit first.
    pub reflect_in: bool,
    pub reflect_out: bool,
    pub xor_out: u32,
}

impl CrcConfig {
    pub const fn none() -> Self {
        Self { width: 0, poly: 0, init: 0, reflect_in: false, reflect_out: false, xor_out: 0 }
    }

    /// CRC-8/SMBUS.
    pub const fn crc8() -> Self {
        Self { width: 8, poly: 0x07, init: 0, reflect_in: false, reflect_out: false, xor_out: 0 }
    }

    /// CRC-16 with the CCITT generator `x^16 + x^12 + x^5 + 1` (the
    /// "CCITT-FALSE" parameter set).
    pub const fn crc16_ccitt() -> Self {
        Self {
            width: 16,
            poly: 0x1021,
            init: 0xFFFF,
            reflect_in: false,
            reflect_out: false,
            xor_out: 0,
        }
    }

    /// The IEEE 802.3 CRC-32.
    pub const fn crc32_ieee() -> Self {
        Self {
            width: 32,
            poly: 0x04C1_1DB7,
            init: 0xFFFF_FFFF,
            reflect_in: true,
            reflect_out: true,
            xor_out: 0xFFFF_FFFF,
        }
    }

    /// Default configuration for a given width.
    pub fn for_width(width: u32) -> Result<Self> {
        match width {
            0 => Ok(Self::none()),
            8 => Ok(Self::crc8()),
            16 => Ok(Self::crc16_ccitt()),
            32 => Ok(Self::crc32_ieee()),
            w => Err(Error::InvalidCrcWidth(w)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.width {
            0 | 8 | 16 | 32 => Ok(()),
            w => Err(Error::InvalidCrcWidth(w)),
        }
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    fn mask(&self) -> u32 {
        if self.width == 32 {
            u32::MAX
        } else {
            (1u32 << self.width) - 1
        }
    }

    /// Register value after feeding `data`, before output reflection and xor.
    fn register(&self, data: &[u8]) -> u32 {
        let width = self.width;
        let mask = self.mask();
        let top = 1u32 << (width - 1);
        let mut reg = self.init & mask;
        let mut feed = |bit: u8| {
            let fb = ((reg & top) != 0) ^ (bit & 1 == 1);
            reg = (reg << 1) & mask;
            if fb {
                reg ^= self.poly & mask;
            }
        };
        if self.reflect_in {
            for group in data.chunks(8) {
                group.iter().rev().for_each(|&b| feed(b));
            }
        } else {
            data.iter().for_each(|&b| feed(b));
        }
        reg
    }

    /// Computes the CRC value as an integer.
    pub fn value(&self, data: &[u8]) -> Result<u32> {
        self.validate()?;
        if self.width == 0 {
            return Ok(0);
        }
        let mut reg = self.register(data);
        if self.reflect_out {
            reg = reg.reverse_bits() >> (32 - self.width);
        }
        Ok((reg ^ self.xor_out) & self.mask())
    }

    /// Check bits for `data`, most significant first. Empty when `width` is 0.
    pub fn compute(&self, data: &[u8]) -> Result<Vec<u8>> {
        let value = self.value(data)?;
        Ok((0..self.width).rev().map(|k| ((value >> k) & 1) as u8).collect())
    }

    /// `data` followed by its check bits.
    pub fn append(&self, data: &[u8]) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(data.len() + self.width());
        out.extend_from_slice(data);
        out.extend(self.compute(data)?);
        Ok(out)
    }

    /// True when the trailing `width` bits of `block` match the CRC of the
    /// bits before them. Always true for width 0.
    pub fn check(&self, block: &[u8]) -> bool {
        let w = self.width();
        if w == 0 {
            return true;
        }
        if block.len() < w {
            return false;
        }
        let (data, tail) = block.split_at(block.len() - w);
        match self.compute(data) {
            Ok(c) => c == tail,
            Err(_) => false,
        }
    }
}

impl Default for CrcConfig {
    fn default() -> Self {
        Self::none()
    }
}

/// Compute the CRC check bits of `data` under `cfg`.
pub fn crc_compute(data: &[u8], cfg: &CrcConfig) -> Result<Vec<u8>> {
    cfg.compute(data)
}
