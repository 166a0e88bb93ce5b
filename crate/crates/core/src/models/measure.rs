//! One-dimensional non-Gaussian measures whose first `k − 1` Hermite
//! coefficients vanish.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermite::{
    build_weighted_basis, gauss_hermite_rule, std_normal_pdf, HermiteBasis, QuadratureRule,
    WeightedOrthoBasis, DEFAULT_LEGENDRE_POINTS,
};
use crate::rng::Rng;

/// Proposals allowed per requested draw before rejection sampling gives up.
pub const REJECTION_LIMIT_PER_DRAW: u64 = 10_000;

/// Mixture `Σ_i p_i N(γ w_i, 1 − γ²)` built from a Gauss–Hermite variable `W`.
#[derive(Debug, Clone)]
pub struct GaussMixture {
    pub means: Vec<f64>,
    pub weights: Vec<f64>,
    pub variance: f64,
    pub gamma: f64,
}

/// Density ratio `1 + (λ/λ_k) T_k(x) 1{|x| ≤ 1} / ‖T_k Δ‖_∞`.
#[derive(Debug, Clone)]
pub struct BoundedLlr {
    pub basis: WeightedOrthoBasis,
}

#[derive(Debug, Clone)]
pub enum MeasureKind {
    StandardGaussian,
    GaussMixture(GaussMixture),
    BoundedLlr(BoundedLlr),
}

#[derive(Debug, Clone)]
pub struct NonGaussMeasure {
    kind: MeasureKind,
    order: usize,
    snr: f64,
    lambda_k: f64,
    coeffs: Vec<f64>,
}

impl NonGaussMeasure {
    pub fn standard_gaussian() -> Self {
        let mut coeffs = vec![0.0; 16];
        coeffs[0] = 1.0;
        Self { kind: MeasureKind::StandardGaussian, order: 0, snr: 0.0, lambda_k: 0.0, coeffs }
    }

    pub fn kind(&self) -> &MeasureKind {
        &self.kind
    }

    /// The moment-matching order `k` (0 for the Gaussian itself).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// The construction's signal ceiling `λ_k`.
    pub fn lambda_k(&self) -> f64 {
        self.lambda_k
    }

    /// Cached `ν̂_0, ν̂_1, …`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `E_ν g(η)`. Gaussian parts use a `gh_nodes`-point Hermite rule.
    pub fn expect(&self, g: impl Fn(f64) -> f64, gh_nodes: usize) -> Result<f64> {
        let rule = gauss_hermite_rule(gh_nodes)?;
        Ok(self.expect_with(&g, &rule))
    }

    fn expect_with(&self, g: &impl Fn(f64) -> f64, rule: &QuadratureRule) -> f64 {
        match &self.kind {
            MeasureKind::StandardGaussian => rule.integrate(g),
            MeasureKind::GaussMixture(m) => {
                let sd = m.variance.sqrt();
                m.means
                    .iter()
                    .zip(&m.weights)
                    .map(|(&mu, &p)| p * rule.integrate(|z| g(mu + sd * z)))
                    .sum()
            }
            MeasureKind::BoundedLlr(b) => {
                let c = self.snr / self.lambda_k / b.basis.sup_norm_top();
                rule.integrate(g) + c * b.basis.inner_with_top(g)
            }
        }
    }

    /// `ν̂_t = E_ν H_t(η)` computed with the supplied Hermite rule.
    pub fn hermite_coeff(&self, t: usize, rule: &QuadratureRule) -> Result<f64> {
        if rule.exact_degree() < t {
            return Err(Error::UnderResolved { have: rule.exact_degree(), need: t });
        }
        let basis = HermiteBasis::new(t);
        Ok(self.expect_with(&|x| basis.eval(t, x).expect("degree within basis"), rule))
    }

    /// `dν/dμ0(x)`.
    pub fn density_ratio(&self, x: f64) -> f64 {
        match &self.kind {
            MeasureKind::StandardGaussian => 1.0,
            MeasureKind::GaussMixture(m) => {
                let sd = m.variance.sqrt();
                let mix: f64 = m
                    .means
                    .iter()
                    .zip(&m.weights)
                    .map(|(&mu, &p)| p * std_normal_pdf((x - mu) / sd) / sd)
                    .sum();
                mix / std_normal_pdf(x)
            }
            MeasureKind::BoundedLlr(b) => {
                if x.abs() > 1.0 {
                    1.0
                } else {
                    1.0 + self.snr / self.lambda_k * b.basis.top().eval(x) / b.basis.sup_norm_top()
                }
            }
        }
    }

    /// `E Z^k − E_ν η^k` for the measure's own order `k`.
    pub fn moment_gap(&self) -> Result<f64> {
        let k = self.order as i32;
        let nodes = self.order + 2;
        let rule = gauss_hermite_rule(nodes)?;
        let gauss = rule.integrate(|z| z.powi(k));
        Ok(gauss - self.expect_with(&|x| x.powi(k), &rule))
    }

    /// Largest `|(r(x) + r(−x))/2 − 1|` over `points` uniform grid points of
    /// `[-4, 4]`, where `r` is the density ratio.
    pub fn symmetry_defect(&self, points: usize) -> f64 {
        let step = 8.0 / (points.max(2) - 1) as f64;
        (0..points.max(2))
            .map(|j| {
                let x = -4.0 + j as f64 * step;
                (0.5 * (self.density_ratio(x) + self.density_ratio(-x)) - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn sample_one(&self, rng: &mut Rng, proposals: &mut u64) -> f64 {
        match &self.kind {
            MeasureKind::StandardGaussian => {
                *proposals += 1;
                rng.sample(StandardNormal)
            }
            MeasureKind::GaussMixture(m) => {
                *proposals += 1;
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut idx = m.weights.len() - 1;
                for (i, &p) in m.weights.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        idx = i;
                        break;
                    }
                }
                let z: f64 = rng.sample(StandardNormal);
                m.means[idx] + m.variance.sqrt() * z
            }
            MeasureKind::BoundedLlr(_) => {
                let envelope = 1.0 + self.snr / self.lambda_k;
                loop {
                    *proposals += 1;
                    let x: f64 = rng.sample(StandardNormal);
                    let u: f64 = rng.random();
                    if u * envelope < self.density_ratio(x) {
                        return x;
                    }
                }
            }
        }
    }

    /// `n` independent draws. Fails if rejection needs more than
    /// `10^4 · n` proposals in total.
    pub fn sample(&self, n: usize, rng: &mut Rng) -> Result<Vec<f64>> {
        let limit = REJECTION_LIMIT_PER_DRAW * n.max(1) as u64;
        let mut proposals = 0;
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.sample_one(rng, &mut proposals));
            if proposals > limit {
                return Err(Error::RejectionExhausted(proposals));
            }
        }
        Ok(out)
    }

    fn with_cached_coeffs(mut self) -> Result<Self> {
        let max_t = (self.order + 8).max(15);
        let rule = gauss_hermite_rule(max_t + 2)?;
        self.coeffs = (0..=max_t).map(|t| self.hermite_coeff(t, &rule)).collect::<Result<_>>()?;
        Ok(self)
    }
}

/// Mixture-of-Gaussians construction for even `k = 2ℓ` and `0 ≤ λ ≤ λ_k / 2`.
///
/// `W` is the `ℓ`-node Gauss–Hermite variable, which matches the first
/// `2ℓ − 1` Gaussian moments, and `η = γ W + √(1 − γ²) Z` with
/// `γ = (λ / λ_k)^{1/k}`.
pub fn build_mog_measure(k: usize, lambda: f64) -> Result<NonGaussMeasure> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!("mixture construction needs even k ≥ 2, got {k}")));
    }
    let ell = k / 2;
    let w = gauss_hermite_rule(ell)?;
    let basis = HermiteBasis::new(k);
    let hk = |x: f64| basis.eval(k, x).expect("degree k is in range");
    let big = gauss_hermite_rule(k + 1)?;
    let alpha_k = big.integrate(|z| z.powi(k as i32) * hk(z));
    let beta_k = w.integrate(hk);
    let lambda_k = (alpha_k * beta_k).abs();
    // λ_k comes out of quadrature, so the endpoint λ_k/2 gets a rounding allowance
    if !(lambda >= 0.0 && lambda <= lambda_k / 2.0 * (1.0 + 1e-12)) {
        return Err(Error::SnrOutOfRange { lambda, min: 0.0, max: lambda_k / 2.0 });
    }
    let gamma = (lambda / lambda_k).powf(1.0 / k as f64);
    let mix = GaussMixture {
        means: w.nodes().iter().map(|&x| gamma * x).collect(),
        weights: w.weights().to_vec(),
        variance: 1.0 - gamma * gamma,
        gamma,
    };
    NonGaussMeasure {
        kind: MeasureKind::GaussMixture(mix),
        order: k,
        snr: lambda,
        lambda_k,
        coeffs: Vec::new(),
    }
    .with_cached_coeffs()
}

/// Bounded likelihood-ratio construction for any `k ≥ 1` and `0 < λ ≤ λ_k`.
pub fn build_bounded_llr_measure(k: usize, lambda: f64) -> Result<NonGaussMeasure> {
    if k == 0 {
        return Err(Error::InvalidArgument("bounded likelihood-ratio construction needs k ≥ 1".into()));
    }
    let basis = build_weighted_basis(k, DEFAULT_LEGENDRE_POINTS)?;
    let lambda_k = basis.lambda_max();
    if !(lambda > 0.0 && lambda <= lambda_k * (1.0 + 1e-12)) {
        return Err(Error::SnrOutOfRange { lambda, min: 0.0, max: lambda_k });
    }
    NonGaussMeasure {
        kind: MeasureKind::BoundedLlr(BoundedLlr { basis }),
        order: k,
        snr: lambda.min(lambda_k),
        lambda_k,
        coeffs: Vec::new(),
    }
    .with_cached_coeffs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixture_ceiling_is_ell_factorial() {
        for (k, expect) in [(2, 1.0), (4, 2.0), (6, 6.0)] {
            let m = build_mog_measure(k, 0.1).unwrap();
            assert!((m.lambda_k() - expect).abs() < 1e-10, "k={k}");
        }
    }

    #[test]
    fn k2_mixture_is_a_single_gaussian() {
        let m = build_mog_measure(2, 0.3).unwrap();
        let MeasureKind::GaussMixture(mix) = m.kind() else { panic!() };
        assert_eq!(mix.means, vec![0.0]);
        assert!((mix.variance - 0.7).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_snr() {
        assert!(build_mog_measure(4, 1.5).is_err());
        assert!(build_mog_measure(3, 0.1).is_err());
        assert!(build_bounded_llr_measure(3, 0.0).is_err());
        assert!(build_bounded_llr_measure(3, 10.0).is_err());
    }

    #[test]
    fn underresolved_rule() {
        let m = NonGaussMeasure::standard_gaussian();
        let rule = gauss_hermite_rule(2).unwrap();
        assert!(matches!(m.hermite_coeff(4, &rule), Err(Error::UnderResolved { have: 3, need: 4 })));
    }
}
