//! One-dimensional Gaussian analysis: orthonormal Hermite polynomials,
//! Gaussian quadrature, and a polynomial basis orthonormal against the
//! Gaussian density restricted to `[-1, 1]`.

mod basis;
mod quadrature;
mod series;
pub mod tridiag;
mod weighted;

pub use basis::{hermite_eval, HermiteBasis};
pub use quadrature::{gauss_hermite_rule, gauss_legendre_rule, QuadratureRule};
pub use series::{ln_factorial, partial_exp_tail, sign_coefficient, sign_parseval_sum, sqrt_factorial};
pub use weighted::{build_weighted_basis, Poly, WeightedOrthoBasis, DEFAULT_LEGENDRE_POINTS};

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}
