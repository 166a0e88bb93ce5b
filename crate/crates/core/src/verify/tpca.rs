use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::hermite::{sqrt_factorial, HermiteBasis};
use crate::rng::rng_from_seed;

const MAX_INDEX: usize = 5;
const MIN_SAMPLES: usize = 10_000;
const BAND: f64 = 5.0;

/// Monte Carlo estimate of one likelihood-ratio Hermite coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlrCoefficientCheck {
    pub index: usize,
    pub estimate: f64,
    pub std_error: f64,
    /// `λ^i / √(i!)`.
    pub target: f64,
    pub passed: bool,
}

/// Draws `X` from the null (i.i.d. Gaussian order-`k` tensor) and estimates
/// `E_0[L(X) · H_i(⟨X, V^{⊗k}⟩ / √(d^k))]` for `0 ≤ i ≤ 5`, where `V` is a
/// seeded Rademacher vector and `L = exp(λ y − λ²/2)` is the spiked/null
/// likelihood ratio at `y = ⟨X, V^{⊗k}⟩ / √(d^k)`.
pub fn tpca_llr_hermite_check(
    k: usize,
    d: usize,
    lambda: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<Vec<LlrCoefficientCheck>> {
    if mc_samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} Monte Carlo samples")));
    }
    if k == 0 || d == 0 || !lambda.is_finite() {
        return Err(Error::InvalidArgument("need k, d ≥ 1 and finite λ".into()));
    }
    let len = d.checked_pow(k as u32).filter(|&l| l <= 1 << 20).ok_or_else(|| {
        Error::InvalidArgument(format!("d^k too large for the Monte Carlo check (d = {d}, k = {k})"))
    })?;
    let mut rng = rng_from_seed(seed);
    let v: Vec<f64> = (0..d).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
    // V^{⊗k} flattened, built once
    let spike: Vec<f64> = (0..len)
        .map(|mut flat| {
            (0..k).fold(1.0, |acc, _| {
                let x = v[flat % d];
                flat /= d;
                acc * x
            })
        })
        .collect();
    let norm = (len as f64).sqrt();
    let basis = HermiteBasis::new(MAX_INDEX);
    let mut h = vec![0.0; MAX_INDEX + 1];
    let mut sum = [0.0; MAX_INDEX + 1];
    let mut sum_sq = [0.0; MAX_INDEX + 1];
    for _ in 0..mc_samples {
        let y = spike.iter().map(|s| {
            let z: f64 = StandardNormal.sample(&mut rng);
            s * z
        }).sum::<f64>() / norm;
        let lr = (lambda * y - 0.5 * lambda * lambda).exp();
        basis.eval_all(y, &mut h)?;
        for i in 0..=MAX_INDEX {
            let z = lr * h[i];
            sum[i] += z;
            sum_sq[i] += z * z;
        }
    }
    let n = mc_samples as f64;
    Ok((0..=MAX_INDEX)
        .map(|i| {
            let mean = sum[i] / n;
            let var = (sum_sq[i] / n - mean * mean).max(0.0) * n / (n - 1.0);
            let std_error = (var / n).sqrt();
            let target = lambda.powi(i as i32) / sqrt_factorial(i as u64);
            LlrCoefficientCheck { index: i, estimate: mean, std_error, target, passed: (mean - target).abs() <= BAND * std_error }
        })
        .collect())
}
