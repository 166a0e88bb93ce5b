use std::collections::BTreeMap;

use super::ldlr::{ldlr_norm_exact, LdlrInstance};
use super::rademacher::rademacher_mean_moment;
use crate::error::{Error, Result};
use crate::models::{build_mog_measure, NonGaussMeasure};

/// Multiplier applied to the largest ratio seen on the calibration grid.
pub const SAFETY_FACTOR: f64 = 1.25;

const FROZEN: &str = include_str!("../../fixtures/calibration.txt");

/// Constants of the form "there is a `C` such that …", fitted on a fixed
/// grid and stored as `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CalibratedConstants {
    values: BTreeMap<String, f64>,
}

impl CalibratedConstants {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key = value", n + 1)))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad number {:?}", n + 1, value.trim())))?;
            values.insert(key.trim().to_string(), value);
        }
        Ok(Self { values })
    }

    /// The constants shipped with the crate.
    pub fn frozen() -> Result<Self> {
        Self::parse(FROZEN)
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.values.get(key).copied().ok_or_else(|| Error::Format(format!("missing calibration key {key}")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn to_text(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v:.12e}\n")).collect()
    }
}

/// `(lower, upper)` for an NGCA instance with constants `c_lower`, `c_upper`:
///
/// * upper `c_upper · N λ² t^{(k−2)/2} / d^{k/2}`;
/// * lower `(N λ² t^{(k−2)/2} / (c_lower d^{k/2}))^{t/k}`, only when `t` is
///   even, a multiple of `k`, and at most `d`.
pub fn ngca_ldlr_bounds(inst: &LdlrInstance, c_lower: f64, c_upper: f64) -> (Option<f64>, f64) {
    let base = scale(inst);
    let upper = c_upper * base;
    let (t, k) = (inst.degree, inst.k);
    let lower = (t % 2 == 0 && k > 0 && t % k == 0 && t <= inst.d).then(|| (base / c_lower).powf(t as f64 / k as f64));
    (lower, upper)
}

fn scale(inst: &LdlrInstance) -> f64 {
    let (t, k, d) = (inst.degree as f64, inst.k as f64, inst.d as f64);
    inst.samples as f64 * inst.snr * inst.snr * t.powf((k - 2.0) / 2.0) / d.powf(k / 2.0)
}

const LOCAL_GRID: usize = 4001;

/// Largest `|r(z) − 1| / (λ (1 + |z|)^κ)` over the region where
/// `K λ (1 + |z|)^κ ≤ 1`, with `κ` the measure's order.
pub fn local_ratio_excess(measure: &NonGaussMeasure, k_const: f64) -> f64 {
    let lambda = measure.snr();
    let kappa = measure.order() as i32;
    if lambda <= 0.0 || k_const <= 0.0 {
        return f64::INFINITY;
    }
    let reach = (1.0 / (k_const * lambda)).powf(1.0 / f64::from(kappa)) - 1.0;
    if reach < 0.0 {
        return 0.0;
    }
    (0..LOCAL_GRID)
        .map(|j| -reach + 2.0 * reach * j as f64 / (LOCAL_GRID - 1) as f64)
        .map(|z| (measure.density_ratio(z) - 1.0).abs() / (lambda * (1.0 + z.abs()).powi(kappa)))
        .fold(0.0, f64::max)
}

/// Smallest `K` on a bisection grid with `local_ratio_excess(m, K) ≤ K`.
fn local_constant(measure: &NonGaussMeasure) -> f64 {
    let (mut lo, mut hi): (f64, f64) = (1e-6, 1e6);
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if local_ratio_excess(measure, mid) <= mid {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The fixed mixture-of-Gaussians measures used for the local bound:
/// `k ∈ {2,4,6}` at fractions `{0.1, 0.25, 0.5}` of `λ_k`.
pub fn mog_local_grid() -> Result<Vec<NonGaussMeasure>> {
    let mut out = Vec::new();
    for k in [2usize, 4, 6] {
        let lk = build_mog_measure(k, 0.0)?.lambda_k();
        for frac in [0.1, 0.25, 0.5] {
            out.push(build_mog_measure(k, frac * lk)?);
        }
    }
    Ok(out)
}

/// The fixed NGCA calibration grid (mixture-of-Gaussians measure).
pub(crate) fn ngca_grid() -> Result<Vec<LdlrInstance>> {
    let mut out = Vec::new();
    for (k, degrees) in [(2usize, &[2usize, 4, 6][..]), (4, &[4, 6][..])] {
        for lambda in [0.05, 0.1, 0.2] {
            let measure = build_mog_measure(k, lambda)?;
            for &t in degrees {
                for d in [4usize, 6, 8] {
                    for n in [1usize, 2, 4] {
                        out.push(LdlrInstance::ngca(n, d, t, &measure)?);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Recomputes every constant from its grid, safety factor included.
///
/// Keys:
/// * `integrated_hermite.c`: smallest `C` with
///   `max_r E[V̄^{ki} V^r] ≤ (C k i)^{ki/2} d^{−⌈ki/2⌉}` on the grid
///   `k ∈ {2,3,4}`, `i ∈ {1,2,3}`, `d ∈ {6,8,10}`, `ki ≤ 2(d−1)`;
/// * `mog_local.k{k}`: local density-ratio constant `K` for the measures
///   of [`mog_local_grid`], see [`local_ratio_excess`];
/// * `ngca.upper.k{k}` and `ngca.lower.k{k}`: constants of
///   [`ngca_ldlr_bounds`] over the NGCA grid.
pub fn calibrate_constants() -> Result<CalibratedConstants> {
    let mut values = BTreeMap::new();
    let mut c_int: f64 = 0.0;
    for d in [6usize, 8, 10] {
        for k in 2..=4usize {
            for i in 1..=3usize {
                let t = k * i;
                if t > 2 * (d - 1) {
                    continue;
                }
                let sup = (0..=t.min(d))
                    .map(|ell| rademacher_mean_moment(d, t as u32, if ell == 0 { 0 } else { (1u32 << ell) - 1 }))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max);
                let needed = (sup * (d as f64).powi(t.div_ceil(2) as i32)).powf(2.0 / t as f64) / t as f64;
                c_int = c_int.max(needed);
            }
        }
    }
    values.insert("integrated_hermite.c".to_string(), c_int * SAFETY_FACTOR);

    let mut upper: BTreeMap<usize, f64> = BTreeMap::new();
    let mut lower: BTreeMap<usize, f64> = BTreeMap::new();
    for inst in ngca_grid()? {
        let norm = ldlr_norm_exact(&inst)?;
        let base = scale(&inst);
        let u = upper.entry(inst.k).or_insert(0.0);
        *u = u.max(norm / base);
        if let (Some(_), _) = ngca_ldlr_bounds(&inst, 1.0, 1.0) {
            let needed = base / norm.powf(inst.k as f64 / inst.degree as f64);
            let l = lower.entry(inst.k).or_insert(0.0);
            *l = l.max(needed);
        }
    }
    for (k, c) in upper {
        values.insert(format!("ngca.upper.k{k}"), c * SAFETY_FACTOR);
    }
    for (k, c) in lower {
        values.insert(format!("ngca.lower.k{k}"), c * SAFETY_FACTOR);
    }
    let mut local: BTreeMap<usize, f64> = BTreeMap::new();
    for m in mog_local_grid()? {
        let c = local.entry(m.order()).or_insert(0.0);
        *c = c.max(local_constant(&m));
    }
    for (k, c) in local {
        values.insert(format!("mog_local.k{k}"), c * SAFETY_FACTOR);
    }
    Ok(CalibratedConstants { values })
}
