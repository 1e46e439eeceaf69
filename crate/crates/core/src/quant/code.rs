//! Two's-complement integer codes of 4, 6 or 8 bits.

use std::fmt;

use crate::error::{Error, Result};

/// Quantization bit width `N_q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWidth(u8);

impl BitWidth {
    pub const SUPPORTED: [u8; 3] = [4, 6, 8];

    pub fn new(bits: u8) -> Result<Self> {
        if Self::SUPPORTED.contains(&bits) {
            Ok(Self(bits))
        } else {
            Err(Error::invalid(format!("bit width {bits} not in {:?}", Self::SUPPORTED)))
        }
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Position of the sign bit, `N_q − 1`.
    pub fn sign_bit(self) -> u8 {
        self.0 - 1
    }

    /// `−2^(N_q−1)`
    pub fn min_value(self) -> i8 {
        (-(1i16 << (self.0 - 1))) as i8
    }

    /// `2^(N_q−1) − 1`
    pub fn max_value(self) -> i8 {
        ((1i16 << (self.0 - 1)) - 1) as i8
    }

    /// Mask covering the low `N_q` bits.
    pub fn mask(self) -> u8 {
        ((1u16 << self.0) - 1) as u8
    }

    /// Every representable value, ascending.
    pub fn values(self) -> impl Iterator<Item = i8> {
        self.min_value()..=self.max_value()
    }
}

impl fmt::Display for BitWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An `N_q`-bit two's-complement integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Code {
    value: i8,
    width: BitWidth,
}

impl Code {
    pub fn new(value: i8, width: BitWidth) -> Result<Self> {
        if value < width.min_value() || value > width.max_value() {
            return Err(Error::invalid(format!("code {value} out of range for {width}-bit")));
        }
        Ok(Self { value, width })
    }

    /// Interprets the low `N_q` bits of `pattern` as a two's-complement number.
    pub fn from_bits(pattern: u8, width: BitWidth) -> Self {
        let shift = 8 - width.bits();
        let value = (((pattern & width.mask()) << shift) as i8) >> shift;
        Self { value, width }
    }

    pub fn value(self) -> i8 {
        self.value
    }

    pub fn width(self) -> BitWidth {
        self.width
    }

    /// The low `N_q` bits of the two's-complement representation.
    pub fn bits(self) -> u8 {
        (self.value as u8) & self.width.mask()
    }

    pub fn bit(self, position: u8) -> bool {
        (self.bits() >> position) & 1 == 1
    }

    pub fn is_negative(self) -> bool {
        self.bit(self.width.sign_bit())
    }

    /// Toggles exactly one bit.
    pub fn flip_bit(self, position: u8) -> Result<Self> {
        if position >= self.width.bits() {
            return Err(Error::invalid(format!(
                "bit position {position} out of range for {}-bit code",
                self.width
            )));
        }
        Ok(Self::from_bits(self.bits() ^ (1 << position), self.width))
    }

    pub fn flip_sign(self) -> Self {
        Self::from_bits(self.bits() ^ (1 << self.width.sign_bit()), self.width)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits(), width = self.width.bits() as usize)
    }
}
