use std::time::Instant;

use super::power::PowerMethodConfig;
use super::{EstimateReport, EstimateShape};
use crate::error::{Error, Result};
use crate::linalg::{dot, power_iteration, Matrix, PowerConfig};
use crate::models::SampleBatch;

fn binomial(n: u32, r: u32) -> i128 {
    (0..r).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

fn double_factorial_odd(p: u32) -> i128 {
    // (2p − 1)!! with (−1)!! = 1
    (1..=p).fold(1i128, |acc, i| acc * (2 * i - 1) as i128)
}

/// `c_{k,d} = E[(‖z‖² − d)^{(k−2)/2} z_1²]` for `z ~ N(0, I_d)`, computed in
/// exact integer arithmetic.
///
/// With `Q = z_1² + R` and `R ~ χ²_{d−1}` independent of `z_1`, expand
/// `(Q − d)^m` binomially and use `E z_1^{2p} = (2p−1)!!` together with
/// `E R^q = Π_{r<q} (d − 1 + 2r)`.
pub fn gaussian_reference_constant(k: usize, d: usize) -> Result<f64> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidArgument(format!("reference constant needs even k ≥ 2, got {k}")));
    }
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let m = ((k - 2) / 2) as u32;
    let di = d as i128;
    let chi_moment = |q: u32| (0..q).fold(1i128, |acc, r| acc * (di - 1 + 2 * r as i128));
    let mut total: i128 = 0;
    for j in 0..=m {
        let inner: i128 = (0..=j)
            .map(|i| binomial(j, i) * double_factorial_odd(i + 1) * chi_moment(j - i))
            .sum();
        total += binomial(m, j) * (-di).pow(m - j) * inner;
    }
    Ok(total as f64)
}

/// `M̂ = (1/N) Σ (‖x_i‖² − d)^{(k−2)/2} x_i x_iᵀ − c_{k,d} I`.
pub fn ngca_spectral_matrix(batch: &SampleBatch, k: usize) -> Result<Matrix> {
    let d = batch.d;
    if batch.record_len() != d {
        return Err(Error::Shape("NGCA records must be vectors in R^d".into()));
    }
    let c = gaussian_reference_constant(k, d)?;
    let m = ((k - 2) / 2) as i32;
    let mut acc = Matrix::zeros(d, d);
    for x in batch.records() {
        let w = (dot(x, x) - d as f64).powi(m);
        acc.rank1_update(w, x, x);
    }
    acc.scale(1.0 / batch.len().max(1) as f64);
    for i in 0..d {
        acc.set(i, i, acc.get(i, i) - c);
    }
    Ok(acc)
}

/// Eigenvector of `M̂` whose eigenvalue is largest in magnitude.
///
/// Power iteration runs on `M̂²`; the sign of the eigenvalue is read off the
/// Rayleigh quotient of `M̂` at the result.
pub fn ngca_spectral(batch: &SampleBatch, k: usize, cfg: &PowerMethodConfig) -> Result<EstimateReport> {
    let started = Instant::now();
    let m = ngca_spectral_matrix(batch, k)?;
    let d = batch.d;
    let mut tmp = vec![0.0; d];
    let power = PowerConfig { max_iters: cfg.max_iters, tol: cfg.tol, init_seed: cfg.init_seed };
    let pair = power_iteration(
        |x, y| {
            m.matvec(x, &mut tmp);
            m.matvec(&tmp, y);
        },
        cfg.start(d)?,
        &power,
    )?;
    let mut mu = vec![0.0; d];
    m.matvec(&pair.vector, &mut mu);
    let eigen = dot(&pair.vector, &mu);
    let mut report = EstimateReport::new(pair.vector, EstimateShape::Vector, d, started);
    report.iterations = pair.iterations;
    report.converged = pair.converged;
    report.spectral_value = Some(eigen);
    Ok(report)
}
