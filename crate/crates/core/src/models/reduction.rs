//! Label-producing reductions: NGCA to a binary GLM and CCA to a sparse
//! parity problem. Both draw `r_i ~ Bernoulli(1/2)` and emit
//! `f_i = (2 r_i − 1) x_i`.

use rand::Rng as _;

use super::problem::{cca_lambda_k, Hidden, ModelSpec, Problem};
use super::sample::{SampleBatch, SHARD_SIZE};
use crate::error::{Error, Result};
use crate::rng::child_rng;

/// Grid resolution for the density-ratio symmetry precondition.
const SYMMETRY_GRID: usize = 4001;
const SYMMETRY_TOL: f64 = 1e-6;

fn flip_with_bits(batch: &SampleBatch, seed: u64) -> (Vec<f64>, Vec<u8>) {
    let len = batch.record_len();
    let mut features = batch.data().to_vec();
    let mut labels = Vec::with_capacity(batch.len());
    for (shard, chunk) in features.chunks_mut(SHARD_SIZE * len).enumerate() {
        let mut rng = child_rng(seed, shard as u64);
        for rec in chunk.chunks_exact_mut(len) {
            let bit: bool = rng.random();
            if !bit {
                rec.iter_mut().for_each(|x| *x = -*x);
            }
            labels.push(u8::from(bit));
        }
    }
    (features, labels)
}

/// Turns NGCA samples into `(f_i, r_i)` pairs whose features are standard
/// Gaussian and whose labels satisfy `P(r = 1 | f) = ½ dν/dμ0(⟨f, V⟩/√d)`.
///
/// Requires `(r(x) + r(−x))/2 = 1` for the density ratio `r` of `ν`.
pub fn ngca_to_glm(spec: &ModelSpec, batch: &SampleBatch, seed: u64) -> Result<SampleBatch> {
    let Hidden::Direction { measure, .. } = &spec.hidden else {
        return Err(Error::InvalidArgument("ngca_to_glm needs an NGCA spec".into()));
    };
    if batch.problem != Problem::Ngca {
        return Err(Error::InvalidArgument("ngca_to_glm needs an NGCA batch".into()));
    }
    let defect = measure.symmetry_defect(SYMMETRY_GRID);
    if defect > SYMMETRY_TOL {
        return Err(Error::InvalidArgument(format!(
            "density ratio is not symmetric about 1 (defect {defect:e})"
        )));
    }
    let (features, labels) = flip_with_bits(batch, seed);
    SampleBatch::from_parts(
        Problem::Glm,
        batch.k,
        batch.d,
        batch.snr,
        seed,
        batch.record_len(),
        features,
        Some(labels),
    )
}

/// Turns odd-order CCA samples with coordinate view directions into a
/// `k`-sparse parity instance with rate `Λ = λ/λ_k`.
pub fn cca_to_parity(spec: &ModelSpec, batch: &SampleBatch, seed: u64) -> Result<(ModelSpec, SampleBatch)> {
    let Hidden::Views(views) = &spec.hidden else {
        return Err(Error::InvalidArgument("cca_to_parity needs a CCA spec".into()));
    };
    if spec.k % 2 == 0 {
        return Err(Error::InvalidArgument(format!("parity reduction needs odd k, got {}", spec.k)));
    }
    let d = spec.d;
    let root = (d as f64).sqrt();
    let coords = views
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let nz: Vec<usize> = (0..d).filter(|&i| v[i] != 0.0).collect();
            match nz.as_slice() {
                [i] if (v[*i].abs() - root).abs() < 1e-12 => Ok(j * d + i),
                _ => Err(Error::InvalidArgument("parity reduction needs coordinate view directions".into())),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let rate = spec.snr / cca_lambda_k(spec.k);
    let (features, labels) = flip_with_bits(batch, seed);
    let out = SampleBatch::from_parts(
        Problem::Parity,
        spec.k,
        d,
        spec.snr,
        seed,
        batch.record_len(),
        features,
        Some(labels),
    )?;
    let parity = ModelSpec {
        problem: Problem::Parity,
        k: spec.k,
        d,
        snr: spec.snr,
        hidden: Hidden::Parity { coords, rate },
    };
    Ok((parity, out))
}
