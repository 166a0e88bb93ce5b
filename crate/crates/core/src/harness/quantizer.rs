use crate::error::{Error, Result};

/// Fixed-point code for reals in `[-R, R]` with `B` bits.
///
/// The `2^B` codes are evenly spaced from `-R` to `R`; encoding clamps and
/// rounds to the nearest code with ties to even, so
/// `|decode(encode(x)) − clamp(x)| ≤ R / (2^B − 1) ≤ R · 2^{1−B}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    bits: u32,
    range: f64,
}

impl Default for QuantizerSpec {
    fn default() -> Self {
        Self { bits: 32, range: 64.0 }
    }
}

impl QuantizerSpec {
    pub fn new(bits: u32, range: f64) -> Result<Self> {
        if !(1..=63).contains(&bits) {
            return Err(Error::InvalidArgument(format!("quantizer bits must be in 1..=63, got {bits}")));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::InvalidArgument(format!("quantizer range must be positive, got {range}")));
        }
        Ok(Self { bits, range })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    fn max_code(&self) -> u64 {
        (1u64 << self.bits) - 1
    }

    fn step(&self) -> f64 {
        2.0 * self.range / self.max_code() as f64
    }

    /// Worst-case reconstruction error inside the range.
    pub fn error_bound(&self) -> f64 {
        self.range * 2f64.powi(1 - self.bits as i32)
    }

    pub fn encode(&self, x: f64) -> u64 {
        let x = if x.is_nan() { 0.0 } else { x.clamp(-self.range, self.range) };
        let code = ((x + self.range) / self.step()).round_ties_even();
        (code as u64).min(self.max_code())
    }

    pub fn decode(&self, code: u64) -> f64 {
        let v = -self.range + code.min(self.max_code()) as f64 * self.step();
        v.clamp(-self.range, self.range)
    }

    pub fn quantize(&self, x: f64) -> f64 {
        self.decode(self.encode(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_clamping() {
        let q = QuantizerSpec::new(8, 1.0).unwrap();
        assert_eq!(q.encode(-1.0), 0);
        assert_eq!(q.encode(1.0), 255);
        assert_eq!(q.decode(q.encode(5.0)), 1.0);
        assert_eq!(q.decode(q.encode(-5.0)), -1.0);
    }

    #[test]
    fn invalid_specs() {
        assert!(QuantizerSpec::new(0, 1.0).is_err());
        assert!(QuantizerSpec::new(64, 1.0).is_err());
        assert!(QuantizerSpec::new(8, 0.0).is_err());
    }
}
