use super::rademacher::{enum_guard, mirrored_sum, overlap_value};
use crate::error::{Error, Result};

/// Largest `d` for the double enumeration over `{±1}^d × {±1}^d`.
pub const MAX_DOUBLE_ENUM_DIM: usize = 12;

/// A real function on `{±1}^d`, tabulated by sign mask (bit set means `−1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PriorFunction {
    dim: usize,
    values: Vec<f64>,
}

impl PriorFunction {
    pub fn constant(dim: usize, c: f64) -> Self {
        Self { dim, values: vec![c; 1 << dim] }
    }

    pub fn from_values(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1 << dim {
            return Err(Error::Shape(format!("expected 2^{dim} values, got {}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("prior function values must be finite".into()));
        }
        Ok(Self { dim, values })
    }

    /// Tabulates `f` at every `V ∈ {±1}^d`.
    pub fn from_fn(dim: usize, f: impl Fn(&[i8]) -> f64) -> Self {
        let mut v = vec![0i8; dim];
        let values = (0u32..1 << dim)
            .map(|mask| {
                v.iter_mut().enumerate().for_each(|(i, s)| *s = if mask >> i & 1 == 1 { -1 } else { 1 });
                f(&v)
            })
            .collect();
        Self { dim, values }
    }

    /// The character `V ↦ Π_{i ∈ r} V_i`.
    pub fn character(dim: usize, subset: u32) -> Self {
        Self::from_fn(dim, |v| v.iter().enumerate().filter(|(i, _)| subset >> i & 1 == 1).map(|(_, &s)| f64::from(s)).product())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `‖S‖_π = (E_π S²)^{1/2}`.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Degenerate);
        }
        self.values.iter_mut().for_each(|v| *v /= n);
        Ok(self)
    }

    /// `⟨S, 1⟩_π`.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `E[H_i(a) H_j(b)]` for standard Gaussians with correlation `ρ`.
pub fn correlated_hermite(i: usize, j: usize, rho: f64) -> f64 {
    if i == j {
        rho.powi(i as i32)
    } else {
        0.0
    }
}

/// `A_m = 4^{−d} Σ_{V, V′ : V, V′ differ in m coordinates} S(V) S(V′)`.
///
/// Every pair is visited; kernels that depend on the pair only through
/// `⟨V, V′⟩ / d = 1 − 2m/d` are then summed over `m`.
fn pair_weights(s: &PriorFunction) -> Result<Vec<f64>> {
    enum_guard(s.dim, MAX_DOUBLE_ENUM_DIM)?;
    let d = s.dim;
    let mut acc = vec![0.0; d + 1];
    for (a, &sa) in s.values.iter().enumerate() {
        if sa == 0.0 {
            continue;
        }
        for (b, &sb) in s.values.iter().enumerate() {
            acc[(a ^ b).count_ones() as usize] += sa * sb;
        }
    }
    let scale = 1.0 / (1u64 << (2 * d)) as f64;
    acc.iter_mut().for_each(|x| *x *= scale);
    Ok(acc)
}

fn integrate_kernel(s: &PriorFunction, kernel: impl Fn(f64) -> f64) -> Result<f64> {
    let weights = pair_weights(s)?;
    Ok(mirrored_sum(s.dim, |m| if weights[m] == 0.0 { 0.0 } else { weights[m] * kernel(overlap_value(s.dim, m)) }))
}

/// `E_0[intH_i(X; S) · intH_j(X; S)]` for order-`k` tensor observations,
/// where the Gaussian arguments have correlation `(⟨V, V′⟩/d)^k`.
pub fn integrated_hermite_cross(k: usize, i: usize, j: usize, s: &PriorFunction) -> Result<f64> {
    integrate_kernel(s, |overlap| correlated_hermite(i, j, overlap.powi(k as i32)))
}

/// `E_0[intH_i(X; S)²]`.
pub fn integrated_hermite_norm(k: usize, i: usize, s: &PriorFunction) -> Result<f64> {
    integrated_hermite_cross(k, i, i, s)
}

/// `E_0[intH_a(x_{1:N}; S) · intH_b(x_{1:N}; S)]` for multi-indices over
/// `N` vector observations, each correlated through `⟨V, V′⟩/d`.
pub fn multi_integrated_hermite_cross(a: &[usize], b: &[usize], s: &PriorFunction) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("multi-indices of lengths {} and {}", a.len(), b.len())));
    }
    integrate_kernel(s, |rho| a.iter().zip(b).map(|(&x, &y)| correlated_hermite(x, y, rho)).product())
}
