use std::time::Instant;

use super::power::PowerMethodConfig;
use super::{mean_record, EstimateReport, EstimateShape};
use crate::error::{Error, Result};
use crate::linalg::{top_singular_triplet, PowerConfig};
use crate::models::{Problem, SampleBatch};
use crate::tensor::{matricize, DenseTensor, EntryBudget};

fn rank_one_reshape(
    t: &DenseTensor,
    cfg: &PowerMethodConfig,
    started: Instant,
) -> Result<EstimateReport> {
    if t.order() % 2 != 0 {
        return Err(Error::InvalidArgument(format!("matricization needs even order, got {}", t.order())));
    }
    if t.frobenius_norm() == 0.0 {
        return Err(Error::Degenerate);
    }
    let mat = matricize(t)?;
    let power = PowerConfig { max_iters: cfg.max_iters, tol: cfg.tol, init_seed: cfg.init_seed };
    let triplet = top_singular_triplet(&mat, &power)?;
    // Mat^{-1}(σ u vᵀ) scaled to unit Frobenius norm is u ⊗ v.
    let estimate: Vec<f64> = triplet
        .left
        .iter()
        .flat_map(|&a| triplet.right.iter().map(move |&b| a * b))
        .collect();
    let mut report = EstimateReport::new(estimate, EstimateShape::Tensor { order: t.order() }, t.dim(), started);
    report.iterations = triplet.iterations;
    report.converged = triplet.converged;
    report.spectral_value = Some(triplet.value);
    Ok(report)
}

/// Best rank-one approximation of `Mat(X̄)` mapped back to a tensor.
pub fn mr_matricization_estimator(batch: &SampleBatch, cfg: &PowerMethodConfig) -> Result<EstimateReport> {
    let started = Instant::now();
    let mean = mean_record(batch);
    let order = (1..=16)
        .find(|&k| batch.d.checked_pow(k as u32) == Some(batch.record_len()))
        .ok_or_else(|| Error::Shape("records are not tensors".into()))?;
    let t = DenseTensor::from_vec(order, batch.d, mean)?;
    rank_one_reshape(&t, cfg, started)
}

/// `T̂ = (1/N) Σ_i x_i^{(1)} ⊗ ⋯ ⊗ x_i^{(k)}` for stacked-view records.
pub fn cross_moment_tensor(batch: &SampleBatch, budget: EntryBudget) -> Result<DenseTensor> {
    if !matches!(batch.problem, Problem::Cca | Problem::Parity) || batch.record_len() != batch.k * batch.d {
        return Err(Error::InvalidArgument("cross moments need k stacked views of dimension d".into()));
    }
    let (k, d) = (batch.k, batch.d);
    let mut acc = DenseTensor::zeros(k, d, budget)?;
    let mut scratch = vec![0.0; acc.as_slice().len()];
    for rec in batch.records() {
        scratch[0] = 1.0;
        let mut filled = 1;
        for view in rec.chunks_exact(d) {
            for j in (0..filled).rev() {
                let base = scratch[j];
                for (i, &x) in view.iter().enumerate() {
                    scratch[j * d + i] = base * x;
                }
            }
            filled *= d;
        }
        acc.as_mut_slice().iter_mut().zip(&scratch).for_each(|(a, s)| *a += s);
    }
    acc.scale(1.0 / batch.len().max(1) as f64);
    Ok(acc)
}

/// Rank-one SVD of the matricized empirical cross-moment tensor.
pub fn cca_matricization_estimator(
    batch: &SampleBatch,
    cfg: &PowerMethodConfig,
    budget: EntryBudget,
) -> Result<EstimateReport> {
    let started = Instant::now();
    if batch.k % 2 != 0 {
        return Err(Error::InvalidArgument(format!("CCA matricization needs even k, got {}", batch.k)));
    }
    let t = cross_moment_tensor(batch, budget)?;
    rank_one_reshape(&t, cfg, started)
}
