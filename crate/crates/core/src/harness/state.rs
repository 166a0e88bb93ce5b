use crate::error::{Error, Result};

/// The `s`-bit memory of a streaming algorithm.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MachineState(Vec<bool>);

impl MachineState {
    pub fn zeros(bits: usize) -> Self {
        Self(vec![false; bits])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    /// Reads a `width`-bit unsigned integer, most significant bit first.
    pub fn read_code(&self, offset: usize, width: u32) -> Result<u64> {
        let end = offset + width as usize;
        if end > self.0.len() || width > 64 {
            return Err(Error::StateLength { expected: end, got: self.0.len() });
        }
        Ok(self.0[offset..end].iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b)))
    }

    pub fn write_code(&mut self, offset: usize, width: u32, code: u64) -> Result<()> {
        let end = offset + width as usize;
        if end > self.0.len() || width > 64 {
            return Err(Error::StateLength { expected: end, got: self.0.len() });
        }
        for (j, slot) in self.0[offset..end].iter_mut().enumerate() {
            *slot = (code >> (width as usize - 1 - j)) & 1 == 1;
        }
        Ok(())
    }

    /// Lower-case hex, most significant nibble first, zero-padded on the left
    /// to a whole number of nibbles.
    pub fn to_hex(&self) -> String {
        let pad = (4 - self.0.len() % 4) % 4;
        let padded: Vec<bool> = std::iter::repeat_n(false, pad).chain(self.0.iter().copied()).collect();
        padded
            .chunks(4)
            .map(|nib| {
                let v = nib.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b));
                char::from_digit(v, 16).expect("nibble below 16")
            })
            .collect()
    }
}
