use crate::error::{Error, Result};

/// Orthonormal probabilist's Hermite polynomials up to a fixed degree.
///
/// The family satisfies `E H_i(Z) H_j(Z) = δ_ij` for `Z ~ N(0, 1)` and is
/// evaluated through the three-term recurrence
/// `√(n+1) H_{n+1}(x) = x H_n(x) − √n H_{n−1}(x)`.
#[derive(Debug, Clone)]
pub struct HermiteBasis {
    max_degree: usize,
    // sqrt_n[n] = √n for n in 0..=max_degree + 1
    sqrt_n: Vec<f64>,
    // inv_sqrt_n[n] = √(1/n), correctly rounded whenever 1/n is exact
    inv_sqrt_n: Vec<f64>,
}

impl HermiteBasis {
    pub fn new(max_degree: usize) -> Self {
        let sqrt_n = (0..=max_degree + 1).map(|n| (n as f64).sqrt()).collect();
        let inv_sqrt_n = (0..=max_degree + 1).map(|n| (1.0 / n as f64).sqrt()).collect();
        Self { max_degree, sqrt_n, inv_sqrt_n }
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// `H_degree(x)`.
    pub fn eval(&self, degree: usize, x: f64) -> Result<f64> {
        if degree > self.max_degree {
            return Err(Error::DegreeOutOfRange { degree, max: self.max_degree });
        }
        let (mut prev, mut cur) = (0.0, 1.0);
        for n in 0..degree {
            let next = (x * cur - self.sqrt_n[n] * prev) * self.inv_sqrt_n[n + 1];
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// Fills `out[n] = H_n(x)` for `n < out.len()`.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) -> Result<()> {
        let Some(last) = out.len().checked_sub(1) else {
            return Ok(());
        };
        if last > self.max_degree {
            return Err(Error::DegreeOutOfRange { degree: last, max: self.max_degree });
        }
        out[0] = 1.0;
        if last >= 1 {
            out[1] = x;
        }
        for n in 1..last {
            out[n + 1] = (x * out[n] - self.sqrt_n[n] * out[n - 1]) * self.inv_sqrt_n[n + 1];
        }
        Ok(())
    }

    /// Values `H_0(x), ..., H_max(x)` as a fresh vector.
    pub fn values(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_degree + 1];
        self.eval_all(x, &mut out).expect("length matches max_degree");
        out
    }
}

/// Convenience wrapper evaluating a single Hermite polynomial.
pub fn hermite_eval(basis: &HermiteBasis, degree: usize, x: f64) -> Result<f64> {
    basis.eval(degree, x)
}
