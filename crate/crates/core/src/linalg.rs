//! Small dense matrices and power iteration.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        (0..n).for_each(|i| m.data[i * n + i] = 1.0);
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (yr, row) in y.iter_mut().zip(self.data.chunks_exact(self.cols)) {
            *yr = dot(row, x);
        }
    }

    /// `y = Aᵀ x`.
    pub fn matvec_t(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (&xr, row) in x.iter().zip(self.data.chunks_exact(self.cols)) {
            y.iter_mut().zip(row).for_each(|(yc, &a)| *yc += xr * a);
        }
    }

    /// `A += a · x yᵀ`.
    pub fn rank1_update(&mut self, a: f64, x: &[f64], y: &[f64]) {
        for (row, &xr) in self.data.chunks_exact_mut(self.cols).zip(x) {
            let w = a * xr;
            row.iter_mut().zip(y).for_each(|(m, &yc)| *m += w * yc);
        }
    }

    pub fn axpy(&mut self, a: f64, other: &Matrix) {
        self.data.iter_mut().zip(&other.data).for_each(|(s, o)| *s += a * o);
    }

    pub fn scale(&mut self, a: f64) {
        self.data.iter_mut().for_each(|s| *s *= a);
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Largest singular value by power iteration on `AᵀA`.
    pub fn spectral_norm(&self, cfg: &PowerConfig) -> Result<f64> {
        top_singular_triplet(self, cfg).map(|t| t.value)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Rescales `v` to unit norm, returning the old norm.
pub fn normalize(v: &mut [f64]) -> Result<f64> {
    let n = norm(v);
    if !(n > f64::MIN_POSITIVE) || !n.is_finite() {
        return Err(Error::Degenerate);
    }
    v.iter_mut().for_each(|x| *x /= n);
    Ok(n)
}

/// `ceil(10 · ln d)`, at least 1.
pub fn default_power_iters(d: usize) -> usize {
    ((10.0 * (d.max(1) as f64).ln()).ceil() as usize).max(1)
}

/// Stopping rule for power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    pub max_iters: usize,
    pub tol: f64,
    /// Seed of the random starting vector when none is supplied.
    pub init_seed: u64,
}

impl PowerConfig {
    pub fn for_dim(d: usize) -> Self {
        Self { max_iters: default_power_iters(d), tol: 1e-12, init_seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("power iteration needs T ≥ 1 and tol > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration for a symmetric operator given as `apply(x, y)` writing
/// `y = A x`. Stops once the Rayleigh quotient and the iterate (up to sign)
/// both change by less than `tol`.
pub fn power_iteration(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut v: Vec<f64>,
    cfg: &PowerConfig,
) -> Result<EigenPair> {
    cfg.validate()?;
    normalize(&mut v)?;
    let mut w = vec![0.0; v.len()];
    let mut value = f64::NAN;
    for it in 1..=cfg.max_iters {
        apply(&v, &mut w);
        let rq = dot(&v, &w);
        if normalize(&mut w).is_err() {
            // v is in the kernel
            return Ok(EigenPair { value: 0.0, vector: v, iterations: it, converged: true });
        }
        let sign = if dot(&v, &w) < 0.0 { -1.0 } else { 1.0 };
        let change = v.iter().zip(&w).map(|(a, b)| (a - sign * b).powi(2)).sum::<f64>().sqrt();
        let rq_change = (rq - value).abs();
        std::mem::swap(&mut v, &mut w);
        value = rq;
        if change <= cfg.tol || (rq_change <= cfg.tol * rq.abs().max(f64::MIN_POSITIVE) && change <= cfg.tol.sqrt()) {
            apply(&v, &mut w);
            value = dot(&v, &w);
            return Ok(EigenPair { value, vector: v, iterations: it, converged: true });
        }
    }
    apply(&v, &mut w);
    value = dot(&v, &w);
    Ok(EigenPair { value, vector: v, iterations: cfg.max_iters, converged: false })
}

/// Leading singular triplet `(σ, u, v)` with `A v = σ u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularTriplet {
    pub value: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Alternating power iteration `v ← Aᵀu/‖·‖, u ← Av/‖·‖`, started from the
/// row of largest norm so that exactly rank-one inputs are solved in one step.
pub fn top_singular_triplet(a: &Matrix, cfg: &PowerConfig) -> Result<SingularTriplet> {
    cfg.validate()?;
    let start = (0..a.rows())
        .max_by(|&i, &j| norm(a.row(i)).total_cmp(&norm(a.row(j))))
        .ok_or(Error::Degenerate)?;
    let mut v = a.row(start).to_vec();
    normalize(&mut v)?;
    let mut u = vec![0.0; a.rows()];
    let mut v_next = vec![0.0; a.cols()];
    let mut sigma = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=cfg.max_iters {
        iterations = it;
        a.matvec(&v, &mut u);
        normalize(&mut u)?;
        a.matvec_t(&u, &mut v_next);
        let s = normalize(&mut v_next)?;
        let change = v.iter().zip(&v_next).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        std::mem::swap(&mut v, &mut v_next);
        let sigma_change = (s - sigma).abs();
        sigma = s;
        if change <= cfg.tol || (sigma_change <= cfg.tol * s && change <= cfg.tol.sqrt()) {
            converged = true;
            break;
        }
    }
    a.matvec(&v, &mut u);
    sigma = normalize(&mut u)?;
    Ok(SingularTriplet { value: sigma, left: u, right: v, iterations, converged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_iteration_diagonal() {
        let m = Matrix::from_vec(3, 3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -2.0]).unwrap();
        let cfg = PowerConfig { max_iters: 500, tol: 1e-13, init_seed: 0 };
        let e = power_iteration(|x, y| m.matvec(x, y), vec![1.0, 1.0, 1.0], &cfg).unwrap();
        assert!((e.value - 3.0).abs() < 1e-10);
        assert!(e.vector[0].abs() > 1.0 - 1e-10);
    }

    #[test]
    fn singular_triplet_of_rank_one() {
        let u = [1.0, 2.0];
        let v = [3.0, 0.0, 4.0];
        let mut m = Matrix::zeros(2, 3);
        m.rank1_update(1.0, &u, &v);
        let t = top_singular_triplet(&m, &PowerConfig::for_dim(3)).unwrap();
        assert!((t.value - 5f64.sqrt() * 5.0).abs() < 1e-12);
        assert!(t.iterations <= 2);
    }

    #[test]
    fn default_iterations() {
        assert_eq!(default_power_iters(1), 1);
        assert_eq!(default_power_iters(10), 24);
    }
}
