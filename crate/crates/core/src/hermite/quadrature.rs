use super::tridiag::symmetric_tridiagonal_eigen;
use crate::error::{Error, Result};

/// A Gaussian quadrature rule.
///
/// For the Hermite rule the weights form a probability vector, so the rule is
/// itself a discrete random variable `W` whose first `2n − 1` moments agree
/// with `N(0, 1)`. For the Legendre rule the weights integrate against
/// Lebesgue measure on `[-1, 1]` and sum to 2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest polynomial degree the rule integrates exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.nodes.len() - 1
    }

    /// `Σ_j w_j f(x_j)`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    fn from_jacobi(diag: &[f64], off: &[f64], mass: f64) -> Result<Self> {
        let n = diag.len();
        let eig = symmetric_tridiagonal_eigen(diag, off, 1)?;
        let mut nodes = eig.values;
        let mut weights: Vec<f64> = eig.rows[0].iter().map(|v| mass * v * v).collect();
        // Both weight functions used here are even, so fold the rule onto
        // itself to remove the last few ulps of asymmetry.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w *= mass / total);
        Ok(Self { nodes, weights })
    }
}

/// The `num_nodes`-point Gauss–Hermite rule for `N(0, 1)` via Golub–Welsch.
///
/// The Jacobi matrix of the probabilist's Hermite family has zero diagonal
/// and off-diagonal entries `√i`.
pub fn gauss_hermite_rule(num_nodes: usize) -> Result<QuadratureRule> {
    if num_nodes == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    let diag = vec![0.0; num_nodes];
    let off: Vec<f64> = (1..num_nodes).map(|i| (i as f64).sqrt()).collect();
    QuadratureRule::from_jacobi(&diag, &off, 1.0)
}

/// The `num_nodes`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre_rule(num_nodes: usize) -> Result<QuadratureRule> {
    if num_nodes == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    let diag = vec![0.0; num_nodes];
    let off: Vec<f64> = (1..num_nodes)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    QuadratureRule::from_jacobi(&diag, &off, 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_and_two_node_rules() {
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes(), &[0.0]);
        assert_eq!(r1.weights(), &[1.0]);
        let r2 = gauss_hermite_rule(2).unwrap();
        assert!((r2.nodes()[0] + 1.0).abs() < 1e-15);
        assert!((r2.nodes()[1] - 1.0).abs() < 1e-15);
        assert!((r2.weights()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(gauss_hermite_rule(0).is_err());
        assert!(gauss_legendre_rule(0).is_err());
    }

    #[test]
    fn legendre_integrates_monomials() {
        let r = gauss_legendre_rule(6).unwrap();
        for p in 0..=11 {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((r.integrate(|x| x.powi(p)) - exact).abs() < 1e-14, "degree {p}");
        }
    }
}
