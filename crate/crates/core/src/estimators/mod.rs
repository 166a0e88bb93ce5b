//! Estimators for the planted signal: power iteration on tensors, partial
//! traces, matricization SVD, a weighted-covariance spectral method for NGCA,
//! and exhaustive δ-net search.

mod brute;
mod matricization;
mod ngca;
mod power;

use std::time::Instant;

pub use brute::{
    brute_force_cca, brute_force_ngca, cca_functional, default_delta, default_truncation, minimize_ngca_discrepancy,
    ngca_functional, wedin_constant, BruteForceConfig, NetMinimum, SphereNet,
};
pub use matricization::{cca_matricization_estimator, cross_moment_tensor, mr_matricization_estimator};
pub use ngca::{gaussian_reference_constant, ngca_spectral, ngca_spectral_matrix};
pub(crate) use power::tensor_power;
pub use power::{partial_trace_matrix, partial_trace_spectral, tensor_power_method, PowerMethodConfig};

use crate::error::Result;
use crate::harness::ResourceProfile;
use crate::tensor::overlap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateShape {
    Vector,
    Tensor { order: usize },
}

/// What an estimator returns.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// Unit-norm estimate, flattened row-major when it is a tensor.
    pub estimate: Vec<f64>,
    pub shape: EstimateShape,
    pub dim: usize,
    pub overlap: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Top eigenvalue or singular value when the method produces one.
    pub spectral_value: Option<f64>,
    pub wall_ms: f64,
    pub profile: Option<ResourceProfile>,
}

impl EstimateReport {
    pub(crate) fn new(estimate: Vec<f64>, shape: EstimateShape, dim: usize, started: Instant) -> Self {
        Self {
            estimate,
            shape,
            dim,
            overlap: None,
            iterations: 0,
            converged: true,
            spectral_value: None,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            profile: None,
        }
    }

    /// Records the overlap with a known signal of the same flattened shape.
    pub fn score(mut self, truth: &[f64]) -> Result<Self> {
        self.overlap = Some(overlap(truth, &self.estimate)?);
        Ok(self)
    }
}

/// Entrywise mean of the batch records, accumulated in index order.
pub(crate) fn mean_record(batch: &crate::models::SampleBatch) -> Vec<f64> {
    let mut acc = vec![0.0; batch.record_len()];
    for rec in batch.records() {
        acc.iter_mut().zip(rec).for_each(|(a, x)| *a += x);
    }
    let n = batch.len().max(1) as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}
