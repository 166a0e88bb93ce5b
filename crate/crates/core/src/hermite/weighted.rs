use super::quadrature::{gauss_legendre_rule, QuadratureRule};
use super::std_normal_pdf;
use crate::error::{Error, Result};

/// Gauss–Legendre points used for the truncated Gaussian inner product.
pub const DEFAULT_LEGENDRE_POINTS: usize = 256;

const SUP_GRID_POINTS: usize = 100_000;
// Gram–Schmidt residual below this fraction of the original norm means the
// monomials are no longer numerically independent.
const RESIDUAL_GUARD: f64 = 1e-12;

/// A real polynomial stored by ascending monomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn monomial(degree: usize) -> Self {
        let mut c = vec![0.0; degree + 1];
        c[degree] = 1.0;
        Poly(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Index of the highest nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    fn axpy(&mut self, a: f64, other: &Poly) {
        if other.0.len() > self.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (s, o) in self.0.iter_mut().zip(&other.0) {
            *s += a * o;
        }
    }

    fn scale(&mut self, a: f64) {
        self.0.iter_mut().for_each(|c| *c *= a);
    }
}

/// Polynomials `T_0, …, T_k` orthonormal for
/// `⟨f, g⟩_Δ = ∫_{-1}^{1} f(x) g(x) φ(x) dx`, with `φ` the standard normal density.
#[derive(Debug, Clone)]
pub struct WeightedOrthoBasis {
    polys: Vec<Poly>,
    nodes: Vec<f64>,
    // Legendre weight times φ at each node.
    node_weights: Vec<f64>,
    sup_top: f64,
}

impl WeightedOrthoBasis {
    pub fn order(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn poly(&self, i: usize) -> &Poly {
        &self.polys[i]
    }

    pub fn top(&self) -> &Poly {
        self.polys.last().expect("basis is never empty")
    }

    /// `sup_{|x| ≤ 1} |T_k(x)|`.
    pub fn sup_norm_top(&self) -> f64 {
        self.sup_top
    }

    /// `⟨f, g⟩_Δ` by the stored quadrature.
    pub fn inner(&self, f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.node_weights)
            .map(|(&x, &w)| w * f(x) * g(x))
            .sum()
    }

    /// `⟨f, T_k⟩_Δ`.
    pub fn inner_with_top(&self, f: impl Fn(f64) -> f64) -> f64 {
        let top = self.top();
        self.inner(f, |x| top.eval(x))
    }

    /// `|⟨x^k, T_k⟩_Δ| / ‖T_k Δ‖_∞`, the largest admissible signal strength of
    /// the bounded likelihood-ratio construction.
    pub fn lambda_max(&self) -> f64 {
        let k = self.order() as i32;
        self.inner_with_top(|x| x.powi(k)).abs() / self.sup_top
    }
}

/// Gram–Schmidt on `1, x, …, x^k` against the truncated Gaussian weight.
pub fn build_weighted_basis(k: usize, quad_points: usize) -> Result<WeightedOrthoBasis> {
    if quad_points < k + 1 {
        return Err(Error::UnderResolved { have: 2 * quad_points.max(1) - 1, need: 2 * k });
    }
    let rule: QuadratureRule = gauss_legendre_rule(quad_points)?;
    let nodes = rule.nodes().to_vec();
    let node_weights: Vec<f64> = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&x, &w)| w * std_normal_pdf(x))
        .collect();
    let inner = |p: &Poly, q: &Poly| -> f64 {
        nodes
            .iter()
            .zip(&node_weights)
            .map(|(&x, &w)| w * p.eval(x) * q.eval(x))
            .sum()
    };

    let mut polys: Vec<Poly> = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut p = Poly::monomial(i);
        let start = inner(&p, &p).sqrt();
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            for q in &polys {
                let c = inner(&p, q);
                p.axpy(-c, q);
            }
        }
        let norm = inner(&p, &p).sqrt();
        if norm < RESIDUAL_GUARD * start {
            return Err(Error::Singular(norm / start));
        }
        p.scale(1.0 / norm);
        polys.push(p);
    }
    let sup_top = sup_abs_on_unit_interval(polys.last().unwrap());
    Ok(WeightedOrthoBasis { polys, nodes, node_weights, sup_top })
}

fn sup_abs_on_unit_interval(p: &Poly) -> f64 {
    let step = 2.0 / (SUP_GRID_POINTS - 1) as f64;
    let (best_idx, best) = (0..SUP_GRID_POINTS)
        .map(|j| (j, p.eval(-1.0 + j as f64 * step).abs()))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let centre = -1.0 + best_idx as f64 * step;
    let lo = (centre - step).max(-1.0);
    let hi = (centre + step).min(1.0);
    best.max(golden_max(|x| p.eval(x).abs(), lo, hi))
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(a)).max(f(b))
}
