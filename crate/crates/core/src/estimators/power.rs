use std::time::Instant;

use super::{mean_record, EstimateReport, EstimateShape};
use crate::error::{Error, Result};
use crate::linalg::{default_power_iters, dot, normalize, power_iteration, Matrix, PowerConfig};
use crate::models::SampleBatch;
use crate::rng::gaussian_vector;
use crate::tensor::contract_into;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerMethodConfig {
    pub max_iters: usize,
    /// Stop once successive unit iterates differ (up to sign) by at most this.
    pub tol: f64,
    /// Starting vector; a seeded Gaussian vector when absent.
    pub init: Option<Vec<f64>>,
    pub init_seed: u64,
}

impl PowerMethodConfig {
    pub fn for_dim(d: usize) -> Self {
        Self { max_iters: default_power_iters(d), tol: 1e-12, init: None, init_seed: 0 }
    }

    pub(crate) fn start(&self, d: usize) -> Result<Vec<f64>> {
        if self.max_iters == 0 || !(self.tol > 0.0) {
            return Err(Error::InvalidArgument("power method needs T ≥ 1 and tol > 0".into()));
        }
        match &self.init {
            Some(v) if v.len() == d => Ok(v.clone()),
            Some(v) => Err(Error::Shape(format!("initial vector has length {}, expected {d}", v.len()))),
            None => Ok(gaussian_vector(d, self.init_seed)),
        }
    }

    fn power_config(&self) -> PowerConfig {
        PowerConfig { max_iters: self.max_iters, tol: self.tol, init_seed: self.init_seed }
    }
}

fn tensor_order(batch: &SampleBatch) -> Result<usize> {
    let d = batch.d;
    let mut len = 1usize;
    for k in 1..=16 {
        len = len.saturating_mul(d);
        if len == batch.record_len() {
            return Ok(k);
        }
    }
    Err(Error::Shape(format!("records of length {} are not tensors over R^{d}", batch.record_len())))
}

/// `u^{⊗m}` for a unit vector `u`, flattened row-major.
pub(crate) fn tensor_power(u: &[f64], m: usize) -> Vec<f64> {
    (0..m).fold(vec![1.0], |acc, _| acc.iter().flat_map(|&a| u.iter().map(move |&x| a * x)).collect())
}

/// Iterates `u_t = (1/N) Σ_i X_i{u_{t−1}^{⊗(k−1)} / ‖u_{t−1}‖^{k−1}, ·}`,
/// keeping the unit-normalised iterate.
///
/// The update is linear in the samples, so the contraction is taken against
/// the sample mean once per step.
pub fn tensor_power_method(batch: &SampleBatch, cfg: &PowerMethodConfig) -> Result<EstimateReport> {
    let started = Instant::now();
    let k = tensor_order(batch)?;
    if k < 2 {
        return Err(Error::InvalidArgument("tensor power method needs k ≥ 2".into()));
    }
    let d = batch.d;
    let mean = mean_record(batch);
    let mut u = cfg.start(d)?;
    normalize(&mut u)?;
    let mut next = vec![0.0; d];
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iters {
        iterations = it;
        let psi = tensor_power(&u, k - 1);
        next.iter_mut().for_each(|x| *x = 0.0);
        contract_into(&mean, d, &psi, 1.0, &mut next);
        normalize(&mut next)?;
        let sign = if dot(&u, &next) < 0.0 { -1.0 } else { 1.0 };
        let change = u.iter().zip(&next).map(|(a, b)| (a - sign * b).powi(2)).sum::<f64>().sqrt();
        std::mem::swap(&mut u, &mut next);
        if change <= cfg.tol {
            converged = true;
            break;
        }
    }
    let mut report = EstimateReport::new(u, EstimateShape::Vector, d, started);
    report.iterations = iterations;
    report.converged = converged;
    Ok(report)
}

/// `M_{αβ} = (1/N) Σ_i Σ_{γ ∈ [d]^ℓ} (X_i)_{γ_1 γ_1 … γ_ℓ γ_ℓ α β}` with `ℓ = k/2 − 1`.
pub fn partial_trace_matrix(batch: &SampleBatch) -> Result<Matrix> {
    let k = tensor_order(batch)?;
    if k % 2 != 0 {
        return Err(Error::InvalidArgument(format!("partial trace needs even order, got {k}")));
    }
    let d = batch.d;
    let ell = k / 2 - 1;
    let mean = mean_record(batch);
    let mut m = Matrix::zeros(d, d);
    let diag_stride = d + 1;
    for gamma in 0..d.pow(ell as u32) {
        // flat offset of (γ_1, γ_1, …, γ_ℓ, γ_ℓ) among the leading 2ℓ indices
        let mut rest = gamma;
        let mut lead = 0;
        let mut place = 1;
        for _ in 0..ell {
            lead += (rest % d) * diag_stride * place;
            rest /= d;
            place *= d * d;
        }
        let block = &mean[lead * d * d..(lead + 1) * d * d];
        m.as_mut_slice().iter_mut().zip(block).for_each(|(a, b)| *a += b);
    }
    Ok(m)
}

/// Top eigenvector of the partial-trace matrix by power iteration.
///
/// The update is `u ← Mᵀ u / ‖Mᵀ u‖`, which is the contraction
/// `X{I ⊗ ⋯ ⊗ I ⊗ u, ·}` averaged over samples.
pub fn partial_trace_spectral(batch: &SampleBatch, cfg: &PowerMethodConfig) -> Result<EstimateReport> {
    let started = Instant::now();
    let m = partial_trace_matrix(batch)?;
    let init = cfg.start(batch.d)?;
    let pair = power_iteration(|x, y| m.matvec_t(x, y), init, &cfg.power_config())?;
    let mut report = EstimateReport::new(pair.vector, EstimateShape::Vector, batch.d, started);
    report.iterations = pair.iterations;
    report.converged = pair.converged;
    report.spectral_value = Some(pair.value);
    Ok(report)
}
