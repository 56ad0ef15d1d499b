use crate::error::{Error, Result};

/// A repetition-code register of `3^(level+1)` bits and the logical value it
/// is currently tracking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRegister {
    level: u32,
    bits: Vec<bool>,
    logical: bool,
}

/// Number of physical bits in a level-`level` code.
pub fn code_size(level: u32) -> usize {
    3usize.pow(level + 1)
}

impl CodeRegister {
    /// All bits zero, logical zero.
    pub fn new(level: u32) -> Self {
        Self::filled(level, false)
    }

    pub fn filled(level: u32, value: bool) -> Self {
        Self {
            level,
            bits: vec![value; code_size(level)],
            logical: value,
        }
    }

    pub fn from_bits(level: u32, bits: Vec<bool>, logical: bool) -> Result<Self> {
        if bits.len() != code_size(level) {
            return Err(Error::InvalidRegister(format!(
                "level {level} needs {} bits, got {}",
                code_size(level),
                bits.len()
            )));
        }
        Ok(Self {
            level,
            bits,
            logical,
        })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bits_mut(&mut self) -> &mut [bool] {
        &mut self.bits
    }

    pub fn logical(&self) -> bool {
        self.logical
    }

    pub fn set_logical(&mut self, value: bool) {
        self.logical = value;
    }

    pub fn flip(&mut self, index: usize) {
        self.bits[index] = !self.bits[index];
    }

    /// Strict majority of the bits. The size is an odd power of three, so
    /// there is never a tie.
    pub fn majority(&self) -> bool {
        2 * self.ones() > self.bits.len()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Bits that disagree with the logical reference.
    pub fn error_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b != self.logical).count()
    }

    pub fn majority_disagrees(&self) -> bool {
        self.majority() != self.logical
    }
}
