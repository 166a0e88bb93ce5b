//! Exhaustive search over δ-nets of the unit sphere.

use std::time::Instant;

use rand_distr::{Distribution, StandardNormal};

use super::{EstimateReport, EstimateShape};
use crate::error::{Error, Result};
use crate::linalg::{dot, normalize};
use crate::models::{Problem, SampleBatch};
use crate::rng::rng_from_seed;

const PROBES_PER_ROUND: usize = 10_000;
const MAX_NET_ROUNDS: usize = 200;
/// Random nets insert probes farther than this fraction of `δ`, leaving
/// slack for regions the probes missed.
const NET_MARGIN: f64 = 0.85;
pub const DEFAULT_MAX_EVALUATIONS: u128 = 400_000_000;

/// A finite subset of `S^{d−1}` within distance `δ` of every sphere point.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereNet {
    dim: usize,
    delta: f64,
    points: Vec<f64>,
}

fn random_unit(dim: usize, rng: &mut crate::rng::Rng) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if normalize(&mut v).is_ok() {
            return v;
        }
    }
}

impl SphereNet {
    /// Uniform angular grid for `d = 2`; for `d ∈ {3, 4}` a random net grown
    /// until a full round of `10^4` uniform probes finds no point farther
    /// than `0.85 δ` from the net.
    pub fn build(dim: usize, delta: f64, seed: u64) -> Result<Self> {
        if !(delta > 0.0 && delta < 2.0) {
            return Err(Error::InvalidArgument(format!("net resolution must lie in (0, 2), got {delta}")));
        }
        match dim {
            1 => Ok(Self { dim, delta, points: vec![1.0, -1.0] }),
            2 => {
                let step = 4.0 * (delta / 2.0).asin();
                let n = (2.0 * std::f64::consts::PI / step).ceil() as usize;
                let points = (0..n)
                    .flat_map(|j| {
                        let a = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                        [a.cos(), a.sin()]
                    })
                    .collect();
                Ok(Self { dim, delta, points })
            }
            3 | 4 => {
                let mut rng = rng_from_seed(seed);
                let mut net = Self { dim, delta, points: Vec::new() };
                for _ in 0..MAX_NET_ROUNDS {
                    let mut added = false;
                    for _ in 0..PROBES_PER_ROUND {
                        let p = random_unit(dim, &mut rng);
                        if net.distance_to_net(&p) > NET_MARGIN * delta {
                            net.points.extend_from_slice(&p);
                            added = true;
                        }
                    }
                    if !added {
                        return Ok(net);
                    }
                }
                Err(Error::NoConvergence)
            }
            _ => Err(Error::EnumerationBudget { size: dim as u128, limit: 4 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dim)
    }

    /// Euclidean distance from a unit vector to the nearest net point.
    pub fn distance_to_net(&self, p: &[f64]) -> f64 {
        let best = self.iter().map(|q| dot(p, q)).fold(f64::NEG_INFINITY, f64::max);
        if best == f64::NEG_INFINITY {
            return f64::INFINITY;
        }
        (2.0 - 2.0 * best.min(1.0)).max(0.0).sqrt()
    }

    /// Largest distance to the net among `probes` uniform sphere points.
    pub fn probe_gap(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = rng_from_seed(seed);
        (0..probes)
            .map(|_| self.distance_to_net(&random_unit(self.dim, &mut rng)))
            .fold(0.0, f64::max)
    }

    fn gram(&self) -> Vec<f64> {
        let n = self.len();
        let mut g = vec![0.0; n * n];
        for (i, p) in self.iter().enumerate() {
            for (j, q) in self.iter().enumerate() {
                g[i * n + j] = dot(p, q);
            }
        }
        g
    }
}

/// Tuning for the net search.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceConfig {
    pub delta: f64,
    /// Truncation threshold `h` of `trunc_h(x) = max(min(x, h), −h)`.
    pub truncation: f64,
    pub net_seed: u64,
    pub max_evaluations: u128,
}

impl BruteForceConfig {
    pub fn new(delta: f64, truncation: f64) -> Self {
        Self { delta, truncation, net_seed: 0, max_evaluations: DEFAULT_MAX_EVALUATIONS }
    }

    /// `δ = ε / (3 C_k)` and `h² = C_k ϑ ln(C_k ϑ / (λ ε))`.
    pub fn from_accuracy(epsilon: f64, lambda: f64, theta: f64, c_k: f64) -> Result<Self> {
        Ok(Self::new(default_delta(epsilon, c_k)?, default_truncation(c_k, theta, lambda, epsilon)?))
    }
}

pub fn default_delta(epsilon: f64, c_k: f64) -> Result<f64> {
    if !(epsilon > 0.0 && c_k > 0.0) {
        return Err(Error::InvalidArgument("ε and C_k must be positive".into()));
    }
    Ok(epsilon / (3.0 * c_k))
}

pub fn default_truncation(c_k: f64, theta: f64, lambda: f64, epsilon: f64) -> Result<f64> {
    let arg = c_k * theta / (lambda * epsilon);
    if !(arg > 1.0) || !arg.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "truncation formula needs C_k ϑ / (λ ε) > 1, got {arg}"
        )));
    }
    Ok((c_k * theta * arg.ln()).sqrt())
}

/// Separation constant `k 3^k / (3 √2 5^k)`: for unit `u_1, u_2`,
/// `max_{w ∈ net} |⟨u_1,w⟩^k − ⟨u_2,w⟩^k| ≥ c_k · min(‖u_1 − u_2‖, ‖u_1 + u_2‖) − 2kδ`.
pub fn wedin_constant(k: usize) -> f64 {
    let k_f = k as f64;
    k_f * 3f64.powf(k_f) / (3.0 * 2f64.sqrt() * 5f64.powf(k_f))
}

fn trunc(x: f64, h: f64) -> f64 {
    x.clamp(-h, h)
}

fn gaussian_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        (1..k).step_by(2).map(|i| i as f64).product()
    }
}

/// `F(w) = (1/N) Σ_i trunc_h(⟨x_i, w⟩)^k − E Z^k` for each net point `w`.
pub fn ngca_functional(batch: &SampleBatch, net: &SphereNet, k: usize, h: f64) -> Result<Vec<f64>> {
    if batch.record_len() != net.dim() {
        return Err(Error::Shape("net dimension differs from sample dimension".into()));
    }
    let ez = gaussian_moment(k);
    let n = batch.len().max(1) as f64;
    Ok(net
        .iter()
        .map(|w| batch.records().map(|x| trunc(dot(x, w), h).powi(k as i32)).sum::<f64>() / n - ez)
        .collect())
}

/// Result of the discrepancy minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetMinimum {
    pub index: usize,
    pub sign: f64,
    pub discrepancy: f64,
}

/// `argmin_{u, ±} max_w |F(w) ∓ λ ⟨u, w⟩^k|`, ties broken by lowest index and
/// then by the `+` sign.
pub fn minimize_ngca_discrepancy(net: &SphereNet, functional: &[f64], k: usize, lambda: f64) -> NetMinimum {
    let n = net.len();
    let g = net.gram();
    let mut best = NetMinimum { index: 0, sign: 1.0, discrepancy: f64::INFINITY };
    for u in 0..n {
        let row = &g[u * n..(u + 1) * n];
        for sign in [1.0, -1.0] {
            let disc = functional
                .iter()
                .zip(row)
                .map(|(f, &c)| (f - sign * lambda * c.powi(k as i32)).abs())
                .fold(0.0, f64::max);
            if disc < best.discrepancy {
                best = NetMinimum { index: u, sign, discrepancy: disc };
            }
        }
    }
    best
}

/// Exhaustive δ-net estimator for the NGCA direction, `d ≤ 4`.
pub fn brute_force_ngca(batch: &SampleBatch, k: usize, cfg: &BruteForceConfig) -> Result<EstimateReport> {
    let started = Instant::now();
    let d = batch.d;
    if batch.problem != Problem::Ngca || batch.record_len() != d {
        return Err(Error::InvalidArgument("brute_force_ngca needs an NGCA batch".into()));
    }
    if d > 4 {
        return Err(Error::EnumerationBudget { size: d as u128, limit: 4 });
    }
    let net = SphereNet::build(d, cfg.delta, cfg.net_seed)?;
    let size = net.len() as u128;
    let cost = size * size + size * batch.len() as u128;
    if cost > cfg.max_evaluations {
        return Err(Error::EnumerationBudget { size: cost, limit: cfg.max_evaluations });
    }
    let f = ngca_functional(batch, &net, k, cfg.truncation)?;
    let best = minimize_ngca_discrepancy(&net, &f, k, batch.snr);
    let mut report = EstimateReport::new(net.point(best.index).to_vec(), EstimateShape::Vector, d, started);
    report.iterations = net.len();
    report.spectral_value = Some(best.discrepancy);
    Ok(report)
}

/// `F(w_1, …, w_k) = (1/N) Σ_i trunc_h(Π_j ⟨x_i^{(j)}, w_j⟩)` over the k-fold
/// product net, indexed with `w_1` most significant.
pub fn cca_functional(batch: &SampleBatch, net: &SphereNet, h: f64) -> Result<Vec<f64>> {
    let (k, d) = (batch.k, batch.d);
    if batch.record_len() != k * d || net.dim() != d {
        return Err(Error::Shape("CCA functional needs k views matching the net dimension".into()));
    }
    let n = net.len();
    // proj[i][j * n + w] = ⟨x_i^{(j)}, w⟩
    let proj: Vec<Vec<f64>> = batch
        .records()
        .map(|x| {
            x.chunks_exact(d)
                .flat_map(|view| net.iter().map(move |w| dot(view, w)))
                .collect()
        })
        .collect();
    let tuples = n.pow(k as u32);
    let count = batch.len().max(1) as f64;
    let mut digits = vec![0usize; k];
    let mut out = Vec::with_capacity(tuples);
    for t in 0..tuples {
        let mut rest = t;
        for slot in digits.iter_mut().rev() {
            *slot = rest % n;
            rest /= n;
        }
        let s: f64 = proj
            .iter()
            .map(|p| trunc(digits.iter().enumerate().map(|(j, &w)| p[j * n + w]).product(), h))
            .sum();
        out.push(s / count);
    }
    Ok(out)
}

/// Exhaustive product-net estimator for the CCA signal, `d ≤ 3` and `k ≤ 3`.
pub fn brute_force_cca(batch: &SampleBatch, cfg: &BruteForceConfig) -> Result<EstimateReport> {
    let started = Instant::now();
    let (k, d) = (batch.k, batch.d);
    if batch.problem != Problem::Cca {
        return Err(Error::InvalidArgument("brute_force_cca needs a CCA batch".into()));
    }
    if d > 3 || k > 3 {
        return Err(Error::EnumerationBudget { size: (d.max(k)) as u128, limit: 3 });
    }
    let net = SphereNet::build(d, cfg.delta, cfg.net_seed)?;
    let n = net.len();
    let tuples = (n as u128).pow(k as u32);
    let cost = tuples * tuples + tuples * batch.len() as u128;
    if cost > cfg.max_evaluations {
        return Err(Error::EnumerationBudget { size: cost, limit: cfg.max_evaluations });
    }
    let f = cca_functional(batch, &net, cfg.truncation)?;
    let g = net.gram();
    let lambda = batch.snr;
    let tuples = tuples as usize;
    let decode = |mut t: usize| {
        let mut idx = vec![0usize; k];
        for slot in idx.iter_mut().rev() {
            *slot = t % n;
            t /= n;
        }
        idx
    };
    let all: Vec<Vec<usize>> = (0..tuples).map(decode).collect();
    let mut best = (0usize, f64::INFINITY);
    for (u_idx, u) in all.iter().enumerate() {
        let disc = all
            .iter()
            .zip(&f)
            .map(|(w, fw)| {
                let model: f64 = u.iter().zip(w).map(|(&a, &b)| g[a * n + b]).product();
                (fw - lambda * model).abs()
            })
            .fold(0.0, f64::max);
        if disc < best.1 {
            best = (u_idx, disc);
        }
    }
    let factors: Vec<&[f64]> = all[best.0].iter().map(|&i| net.point(i)).collect();
    let estimate = factors.iter().fold(vec![1.0], |acc, v| {
        acc.iter().flat_map(|&a| v.iter().map(move |&x| a * x)).collect()
    });
    let mut report = EstimateReport::new(estimate, EstimateShape::Tensor { order: k }, d, started);
    report.iterations = tuples;
    report.spectral_value = Some(best.1);
    Ok(report)
}
