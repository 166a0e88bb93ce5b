use rand::Rng as _;
use rand_distr::StandardNormal;

use super::measure::REJECTION_LIMIT_PER_DRAW;
use super::problem::{cca_lambda_k, Hidden, ModelSpec, Problem};
use crate::error::{Error, Result};
use crate::rng::{child_rng, Rng};
use crate::tensor::{rank1_densify, EntryBudget};

/// Samples drawn from one RNG stream before moving to the next.
pub const SHARD_SIZE: usize = 1024;

/// `n` records of equal length, optionally with one label bit each.
///
/// Records are order-k tensors (flattened row-major) for TPCA/ATPCA,
/// vectors in `R^d` for NGCA, and `k` stacked views in `R^{kd}` for CCA.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub problem: Problem,
    pub k: usize,
    pub d: usize,
    pub snr: f64,
    pub seed: u64,
    record_len: usize,
    data: Vec<f64>,
    labels: Option<Vec<u8>>,
    proposals: u64,
}

impl SampleBatch {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        problem: Problem,
        k: usize,
        d: usize,
        snr: f64,
        seed: u64,
        record_len: usize,
        data: Vec<f64>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        if record_len == 0 || data.len() % record_len != 0 {
            return Err(Error::Shape(format!(
                "{} values do not split into records of length {record_len}",
                data.len()
            )));
        }
        let n = data.len() / record_len;
        if labels.as_ref().is_some_and(|l| l.len() != n) {
            return Err(Error::Shape("label count differs from record count".into()));
        }
        Ok(Self { problem, k, d, snr, seed, record_len, data, labels, proposals: n as u64 })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.record_len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn record_len(&self) -> usize {
        self.record_len
    }

    pub fn record(&self, i: usize) -> &[f64] {
        &self.data[i * self.record_len..(i + 1) * self.record_len]
    }

    pub fn records(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.record_len)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Proposals the sampler consumed (equal to `len()` without rejection).
    pub fn proposals(&self) -> u64 {
        self.proposals
    }

    /// A copy of the first `n` records.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        let mut out = self.clone();
        out.data.truncate(n * self.record_len);
        if let Some(l) = out.labels.as_mut() {
            l.truncate(n);
        }
        out
    }

    /// Applies `f` to every record in place.
    pub fn map_records(&mut self, mut f: impl FnMut(&mut [f64])) {
        self.data.chunks_exact_mut(self.record_len).for_each(&mut f);
    }
}

fn shards(n: usize) -> impl Iterator<Item = (u64, usize)> {
    (0..n.div_ceil(SHARD_SIZE)).map(move |s| (s as u64, SHARD_SIZE.min(n - s * SHARD_SIZE)))
}

fn fill_normal(rng: &mut Rng, out: &mut [f64]) {
    out.iter_mut().for_each(|x| *x = rng.sample(StandardNormal));
}

fn tensor_batch(spec: &ModelSpec, n: usize, seed: u64, budget: EntryBudget) -> Result<SampleBatch> {
    let Hidden::Spike(spike) = &spec.hidden else {
        return Err(Error::InvalidArgument(format!("{} model has no tensor spike", spec.problem)));
    };
    let signal = rank1_densify(spike, budget)?;
    let len = signal.as_slice().len();
    let total = len as u128 * n as u128;
    if total > budget.0 as u128 {
        return Err(Error::Budget { entries: total, budget: budget.0 });
    }
    let mut data = vec![0.0; len * n];
    let mut offset = 0;
    for (shard, count) in shards(n) {
        let mut rng = child_rng(seed, shard);
        for rec in data[offset..offset + count * len].chunks_exact_mut(len) {
            fill_normal(&mut rng, rec);
            rec.iter_mut().zip(signal.as_slice()).for_each(|(x, s)| *x += s);
        }
        offset += count * len;
    }
    SampleBatch::from_parts(spec.problem, spec.k, spec.d, spec.snr, seed, len, data, None)
}

/// `X_i = λ V^{⊗k} / √(d^k) + W_i` with i.i.d. standard normal `W_i` entries.
pub fn sample_tpca(spec: &ModelSpec, n: usize, seed: u64, budget: EntryBudget) -> Result<SampleBatch> {
    if spec.problem != Problem::Tpca {
        return Err(Error::InvalidArgument("sample_tpca needs a TPCA spec".into()));
    }
    tensor_batch(spec, n, seed, budget)
}

/// `X_i = λ V_1 ⊗ ⋯ ⊗ V_k / √(d^k) + W_i`.
pub fn sample_atpca(spec: &ModelSpec, n: usize, seed: u64, budget: EntryBudget) -> Result<SampleBatch> {
    if spec.problem != Problem::Atpca {
        return Err(Error::InvalidArgument("sample_atpca needs an ATPCA spec".into()));
    }
    tensor_batch(spec, n, seed, budget)
}

/// `x_i = η_i V/√d + (I − V Vᵀ/d) z_i` with `η_i ~ ν`.
pub fn sample_ngca(spec: &ModelSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    let Hidden::Direction { v, measure } = &spec.hidden else {
        return Err(Error::InvalidArgument("sample_ngca needs an NGCA spec".into()));
    };
    let d = spec.d;
    let sqrt_d = (d as f64).sqrt();
    let limit = REJECTION_LIMIT_PER_DRAW * n.max(1) as u64;
    let mut proposals = 0;
    let mut data = vec![0.0; n * d];
    let mut offset = 0;
    for (shard, count) in shards(n) {
        let mut rng = child_rng(seed, shard);
        for x in data[offset..offset + count * d].chunks_exact_mut(d) {
            fill_normal(&mut rng, x);
            let eta = measure.sample_one(&mut rng, &mut proposals);
            if proposals > limit {
                return Err(Error::RejectionExhausted(proposals));
            }
            let proj: f64 = x.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / sqrt_d;
            let shift = (eta - proj) / sqrt_d;
            x.iter_mut().zip(v).for_each(|(a, b)| *a += shift * b);
        }
        offset += count * d;
    }
    let mut batch = SampleBatch::from_parts(Problem::Ngca, spec.k, d, spec.snr, seed, d, data, None)?;
    batch.proposals = proposals;
    Ok(batch)
}

fn sign(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Draws from `1 + (λ/λ_k) Π_j sign(⟨x^{(j)}, v_j⟩)` times `N(0, I_{kd})` by
/// rejection against the Gaussian with envelope `1 + λ/λ_k`.
pub fn sample_cca(spec: &ModelSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    let Hidden::Views(views) = &spec.hidden else {
        return Err(Error::InvalidArgument("sample_cca needs a CCA spec".into()));
    };
    let (k, d) = (spec.k, spec.d);
    let ratio = spec.snr / cca_lambda_k(k);
    if !(0.0..=1.0 + 1e-12).contains(&ratio) {
        return Err(Error::SnrOutOfRange { lambda: spec.snr, min: 0.0, max: cca_lambda_k(k) });
    }
    let envelope = 1.0 + ratio;
    let len = k * d;
    let limit = REJECTION_LIMIT_PER_DRAW * n.max(1) as u64;
    let mut proposals = 0;
    let mut data = vec![0.0; n * len];
    let mut offset = 0;
    for (shard, count) in shards(n) {
        let mut rng = child_rng(seed, shard);
        for x in data[offset..offset + count * len].chunks_exact_mut(len) {
            loop {
                proposals += 1;
                if proposals > limit {
                    return Err(Error::RejectionExhausted(proposals));
                }
                fill_normal(&mut rng, x);
                let s: f64 = x
                    .chunks_exact(d)
                    .zip(views)
                    .map(|(xj, vj)| sign(xj.iter().zip(vj).map(|(a, b)| a * b).sum()))
                    .product();
                let u: f64 = rng.random();
                if u * envelope < 1.0 + ratio * s {
                    break;
                }
            }
        }
        offset += count * len;
    }
    let mut batch = SampleBatch::from_parts(Problem::Cca, k, d, spec.snr, seed, len, data, None)?;
    batch.proposals = proposals;
    Ok(batch)
}

/// Dispatches on the spec's problem.
pub fn sample(spec: &ModelSpec, n: usize, seed: u64, budget: EntryBudget) -> Result<SampleBatch> {
    match spec.problem {
        Problem::Tpca => sample_tpca(spec, n, seed, budget),
        Problem::Atpca => sample_atpca(spec, n, seed, budget),
        Problem::Ngca => sample_ngca(spec, n, seed),
        Problem::Cca => sample_cca(spec, n, seed),
        Problem::Parity | Problem::Glm => Err(Error::InvalidArgument(format!(
            "{} batches come from a reduction, not from a direct sampler",
            spec.problem
        ))),
    }
}
