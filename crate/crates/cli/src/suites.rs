//! Named verification suites.
//!
//! Every suite returns a [`CheckReport`]: one record per check with an id,
//! a pass/fail status, the measured value and the bound or target it was
//! compared with. Monte Carlo checks report `|mean − target| / se` against
//! a band of 5 standard errors.

use memlab_core::estimators::{
    cca_matricization_estimator, cross_moment_tensor, gaussian_reference_constant, mr_matricization_estimator,
    ngca_spectral, partial_trace_spectral, tensor_power_method, PowerMethodConfig,
};
use memlab_core::harness::{
    fixture_algorithms, reduce_memory_to_distributed, run_memory_bounded, wrap_iteration_as_memory_bounded,
    Protocol, QuantizerSpec, TensorPowerPsi,
};
use memlab_core::hermite::{gauss_hermite_rule, partial_exp_tail, sign_parseval_sum, HermiteBasis};
use memlab_core::models::{
    build_bounded_llr_measure, build_mog_measure, cca_lambda_k, cca_to_parity, sample, Hidden, ModelSpec,
    NonGaussMeasure, Problem, SampleBatch,
};
use memlab_core::rng::{child_rng, child_seed, fill_gaussian, gaussian_vector};
use memlab_core::tensor::{overlap, EntryBudget};
use memlab_core::verify::{
    calibrate_constants, check_rademacher_bounds, integrated_hermite_cross, integrated_hermite_norm, ldlr_norm_exact,
    local_ratio_excess, multi_integrated_hermite_cross, ngca_ldlr_bounds, rademacher_mean_moment,
    tpca_llr_hermite_check, CalibratedConstants, CheckRecord, CheckReport, LdlrInstance, PriorFunction,
};
use rayon::prelude::*;

use crate::error::{CliError, Result};

pub const SUITE_NAMES: [&str; 10] = [
    "hermite",
    "constructions",
    "samplers",
    "models",
    "rademacher",
    "ldlr",
    "oracles",
    "harness",
    "estimators",
    "reference",
];

const BAND: f64 = 5.0;
const SAMPLER_N: usize = 100_000;

pub fn run_suite(name: &str, seed: u64) -> Result<CheckReport> {
    match name {
        "hermite" => hermite(),
        "constructions" => constructions(),
        "samplers" => samplers(seed),
        "models" => {
            let mut report = constructions()?;
            report.extend(samplers(seed)?);
            Ok(report)
        }
        "rademacher" => rademacher(seed),
        "ldlr" => ldlr(seed),
        "oracles" => {
            let mut report = rademacher(seed)?;
            report.extend(ldlr(seed)?);
            Ok(report)
        }
        "harness" => harness(seed),
        "estimators" => estimators(seed),
        "reference" => reference(seed),
        other => Err(CliError::UnknownSuite(other.to_string(), SUITE_NAMES.join(", "))),
    }
}

fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standardised distance of a sample mean from its target.
fn z_score(values: impl Iterator<Item = f64>, target: f64) -> f64 {
    let (mean, se) = mean_and_se(values);
    (mean - target).abs() / se.max(1e-12)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

fn hermite() -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let basis = HermiteBasis::new(20);
    let h = |k: usize, x: f64| basis.eval(k, x).expect("degree within basis");

    let mut worst = 0.0f64;
    for i in 0..=20 {
        for j in 0..=20 {
            let rule = gauss_hermite_rule((i + j) / 2 + 1)?;
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((rule.integrate(|x| h(i, x) * h(j, x)) - want).abs());
        }
    }
    report.push(CheckRecord::at_most("hermite.orthonormality", worst, 1e-10));

    let rule = gauss_hermite_rule(12)?;
    let shifted = [-1.0f64, 0.0, 0.5, 2.0].iter().flat_map(|&mu| {
        let rule = &rule;
        (0..=8usize).map(move |k| (rule.integrate(|z| h(k, mu + z)) - mu.powi(k as i32) / factorial(k).sqrt()).abs())
    });
    report.push(CheckRecord::at_most("hermite.shifted_mean", max_of(shifted), 1e-10));

    let rule = gauss_hermite_rule(10)?;
    let mut worst = 0.0f64;
    for rho in [-0.9f64, 0.0, 0.3, 1.0] {
        let s = (1.0 - rho * rho).max(0.0).sqrt();
        for i in 0..=6 {
            for j in 0..=6 {
                let v = rule.integrate(|a| rule.integrate(|b| h(i, a) * h(j, rho * a + s * b)));
                let want = if i == j { rho.powi(i as i32) } else { 0.0 };
                worst = worst.max((v - want).abs());
            }
        }
    }
    report.push(CheckRecord::at_most("hermite.correlated", worst, 1e-10));

    let growth = (0..=1000).flat_map(|step| {
        let z = -5.0 + step as f64 * 0.01;
        (0..=10usize).map(move |k| (z, k))
    });
    let ratio = max_of(growth.map(|(z, k)| h(k, z).abs() / (1.0 + z.abs()).powi(k as i32)));
    report.push(CheckRecord::at_most("hermite.simple_bound", ratio, 1.0));

    // λ^t/t! ≤ Σ_{j≥t} λ^j/j! ≤ (λ^t/t!) / (1 − λ/(t+1)) whenever t + 1 > λ
    let mut violation = 0.0f64;
    for lambda in [0.5f64, 1.0, 2.0, 5.0] {
        for t in 0..=40u64 {
            if (t + 1) as f64 <= lambda {
                continue;
            }
            let tail = partial_exp_tail(lambda, t);
            let lead = lambda.powi(t as i32) / factorial(t as usize);
            let upper = lead / (1.0 - lambda / (t as f64 + 1.0));
            violation = violation.max(lead / tail - 1.0).max(tail / upper - 1.0);
        }
    }
    report.push(CheckRecord::at_most("hermite.partial_exp.sandwich", violation, 1e-12));

    let mut excess = 0.0f64;
    for lambda in [0.1f64, 0.5, 1.0, 2.0] {
        for eps in [1e-2f64, 1e-5, 1e-9] {
            let t = (std::f64::consts::E.powi(2) * lambda).max((1.0 / eps).ln()).max(1.0).ceil() as u64;
            excess = excess.max(partial_exp_tail(lambda, t) / eps);
        }
    }
    report.push(CheckRecord::at_most("hermite.partial_exp.epsilon", excess, 1.0));
    Ok(report)
}

fn constructions() -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let rule = gauss_hermite_rule(30)?;
    let frozen = CalibratedConstants::frozen()?;
    let low_moments = |m: &NonGaussMeasure, k: usize| -> Result<f64> {
        (1..k).map(|i| m.hermite_coeff(i, &rule).map(f64::abs)).try_fold(0.0f64, |a, b| b.map(|b| a.max(b))).map_err(CliError::from)
    };

    for k in [2usize, 4, 6] {
        let lk = build_mog_measure(k, 0.0)?.lambda_k();
        for frac in [0.1, 0.25, 0.5] {
            let lambda = frac * lk;
            let m = build_mog_measure(k, lambda)?;
            let id = format!("constructions.mog.k{k}.frac{frac}");
            report.push(CheckRecord::at_most(format!("{id}.low_moments"), low_moments(&m, k)?, 1e-7));
            report.push(CheckRecord::close(format!("{id}.gap"), m.moment_gap()?.abs(), lambda, 1e-6));
            let c = frozen.get(&format!("mog_local.k{k}"))?;
            report.push(CheckRecord::at_most(format!("{id}.local_ratio"), local_ratio_excess(&m, c), c));
        }
    }

    for k in [2usize, 3, 4, 6] {
        let lk = build_bounded_llr_measure(k, 1e-3)?.lambda_k();
        for frac in [0.1, 0.5, 1.0] {
            let lambda = frac * lk;
            let m = build_bounded_llr_measure(k, lambda)?;
            let id = format!("constructions.bounded_llr.k{k}.frac{frac}");
            report.push(CheckRecord::at_most(format!("{id}.low_moments"), low_moments(&m, k)?, 1e-7));
            report.push(CheckRecord::close(format!("{id}.gap"), m.moment_gap()?.abs(), lambda, 1e-6));
            let worst = max_of((0..10_000).map(|j| (m.density_ratio(-5.0 + j as f64 * 1e-3) - 1.0).abs()));
            report.push(CheckRecord::at_most(format!("{id}.ratio"), worst, lambda / lk + 1e-12));
        }
    }

    let basis = HermiteBasis::new(2);
    let got = gauss_hermite_rule(1)?.integrate(|x| basis.eval(2, x).expect("degree 2"));
    let want = -std::f64::consts::FRAC_1_SQRT_2;
    report.push(CheckRecord::new("constructions.quadrature_l1", got == want, got, want));
    Ok(report)
}

fn tensor_entries_check(id: &str, batch: &SampleBatch, mean: &[f64]) -> CheckRecord {
    let worst = max_of(mean.iter().enumerate().map(|(e, &target)| z_score(batch.records().map(|r| r[e]), target)));
    CheckRecord::at_most(id, worst, BAND)
}

fn samplers(seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let budget = EntryBudget::default();
    let sub = |i: u64| child_seed(seed, i);

    // tensor models: every entry of E X = λ V_1 ⊗ ⋯ ⊗ V_k / √(d^k)
    let tensor_cases: [(&str, Problem, usize, usize, f64); 3] =
        [("tpca.k3.d4", Problem::Tpca, 3, 4, 2.0), ("atpca.k2.d6", Problem::Atpca, 2, 6, 1.5), ("atpca.k4.d3", Problem::Atpca, 4, 3, 1.5)];
    for (i, (name, problem, k, d, snr)) in tensor_cases.into_iter().enumerate() {
        let mut rng = child_rng(sub(i as u64), 0);
        let spec = match problem {
            Problem::Tpca => ModelSpec::tpca_from_prior(k, d, snr, &mut rng)?,
            _ => ModelSpec::atpca_coordinate(k, d, snr, &mut rng)?,
        };
        let full = match problem {
            Problem::Tpca => (0..k).fold(vec![1.0], |acc: Vec<f64>, _| {
                let v = spec.truth();
                acc.iter().flat_map(|&a| v.iter().map(move |&x| a * x)).collect()
            }),
            _ => spec.truth(),
        };
        let scale = snr / (d as f64).powf(k as f64 / 2.0);
        let mean: Vec<f64> = full.iter().map(|x| scale * x).collect();
        let batch = sample(&spec, SAMPLER_N, sub(i as u64 + 100), budget)?;
        report.push(tensor_entries_check(&format!("samplers.{name}.mean"), &batch, &mean));
    }

    // NGCA: Hermite moments of the projection follow ν; the complement is N(0, 1)
    let measure = build_mog_measure(4, 0.8)?;
    let coeffs = measure.coefficients().to_vec();
    let spec = ModelSpec::ngca_from_prior(6, measure, &mut child_rng(sub(10), 0))?;
    let v = spec.truth();
    let batch = sample(&spec, SAMPLER_N, sub(110), budget)?;
    let basis = HermiteBasis::new(6);
    let proj: Vec<f64> = batch.records().map(|x| x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / 6f64.sqrt()).collect();
    let worst = max_of((1..=6).map(|t| z_score(proj.iter().map(|&p| basis.eval(t, p).expect("degree ≤ 6")), coeffs[t])));
    report.push(CheckRecord::at_most("samplers.ngca.d6.k4.projection", worst, BAND));
    let comp: Vec<f64> = batch.records().map(|x| (x[0] * v[1] - x[1] * v[0]) / 2f64.sqrt()).collect();
    let worst = z_score(comp.iter().copied(), 0.0).max(z_score(comp.iter().map(|c| c * c), 1.0));
    report.push(CheckRecord::at_most("samplers.ngca.d6.k4.complement", worst, BAND));

    // CCA: the cross-moment tensor is λ · ⊗ v_j / √(d^k)
    for (i, (k, d, snr)) in [(2usize, 3usize, 0.3), (3, 2, 0.3)].into_iter().enumerate() {
        let spec = ModelSpec::cca_coordinate(k, d, snr, &mut child_rng(sub(20 + i as u64), 0))?;
        let batch = sample(&spec, SAMPLER_N, sub(120 + i as u64), budget)?;
        let scale = snr / (d as f64).powf(k as f64 / 2.0);
        let mean: Vec<f64> = spec.truth().iter().map(|x| scale * x).collect();
        let products = |e: usize| {
            batch.records().map(move |r| (0..k).map(|j| r[j * d + (e / d.pow((k - 1 - j) as u32)) % d]).product::<f64>())
        };
        let worst = max_of(mean.iter().enumerate().map(|(e, &target)| z_score(products(e), target)));
        report.push(CheckRecord::at_most(format!("samplers.cca.k{k}.d{d}.cross_moment"), worst, BAND));
    }

    let (k, d, snr) = (3usize, 2usize, 0.2);
    let spec = ModelSpec::cca_coordinate(k, d, snr, &mut child_rng(sub(30), 0))?;
    let batch = sample(&spec, SAMPLER_N, sub(130), budget)?;
    let (parity, out) = cca_to_parity(&spec, &batch, sub(131))?;
    let Hidden::Parity { coords, rate } = &parity.hidden else {
        return Err(CliError::Config("parity reduction returned a non-parity model".into()));
    };
    report.push(CheckRecord::close("samplers.parity.rate", *rate, snr / cca_lambda_k(k), 1e-15));
    let labels = out.labels().unwrap_or_default();
    let corr = out.records().zip(labels).map(|(f, &r)| {
        let s: f64 = coords.iter().map(|&c| if f[c] >= 0.0 { 1.0 } else { -1.0 }).product();
        (2.0 * f64::from(r) - 1.0) * s
    });
    report.push(CheckRecord::at_most("samplers.parity.correlation", z_score(corr, *rate), BAND));
    Ok(report)
}

fn random_prior(d: usize, seed: u64) -> Result<PriorFunction> {
    Ok(PriorFunction::from_values(d, gaussian_vector(1 << d, seed))?)
}

fn rademacher(seed: u64) -> Result<CheckReport> {
    let mut report = check_rademacher_bounds(10, 6)?;

    let mut worst = 0.0f64;
    for d in [2usize, 5, 8, 11] {
        let one = PriorFunction::constant(d, 1.0);
        for k in 1..=4usize {
            for i in 0..=3usize {
                let a = integrated_hermite_norm(k, i, &one)?;
                let b = rademacher_mean_moment(d, (k * i) as u32, 0)?;
                worst = worst.max((a - b).abs());
            }
        }
    }
    report.push(CheckRecord::at_most("rademacher.constant_prior", worst, 1e-12));

    let mut largest = 0.0f64;
    for (n, d) in [3usize, 5, 7].into_iter().enumerate() {
        let s = random_prior(d, child_seed(seed, n as u64))?;
        for k in 1..=4usize {
            for i in 0..=4usize {
                for j in (0..=4usize).filter(|&j| j != i) {
                    largest = largest.max(integrated_hermite_cross(k, i, j, &s)?.abs());
                }
            }
        }
    }
    let s = random_prior(5, child_seed(seed, 10))?;
    let triples: Vec<[usize; 3]> = (0..27).map(|m| [m / 9, (m / 3) % 3, m % 3]).collect();
    for a in &triples {
        for b in triples.iter().filter(|b| *b != a) {
            largest = largest.max(multi_integrated_hermite_cross(a, b, &s)?.abs());
        }
    }
    report.push(CheckRecord::new("rademacher.cross_terms", largest == 0.0, largest, 0.0));
    Ok(report)
}

fn ldlr(seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let frozen = CalibratedConstants::frozen()?;

    for k in [2usize, 4] {
        let (c_lo, c_up) = (frozen.get(&format!("ngca.lower.k{k}"))?, frozen.get(&format!("ngca.upper.k{k}"))?);
        let (mut up_ratio, mut lo_ratio, mut monotone) = (0.0f64, 0.0f64, true);
        for lambda in [0.05, 0.1, 0.2] {
            let m = build_mog_measure(k, lambda)?;
            for n in 1..=4usize {
                for d in 4..=8usize {
                    let mut prev = 0.0;
                    for t in 1..=6usize {
                        let inst = LdlrInstance::ngca(n, d, t, &m)?;
                        let norm = ldlr_norm_exact(&inst)?;
                        let (lower, upper) = ngca_ldlr_bounds(&inst, c_lo, c_up);
                        up_ratio = up_ratio.max(norm / upper);
                        if let Some(lower) = lower {
                            lo_ratio = lo_ratio.max(lower / norm);
                        }
                        monotone &= norm >= prev;
                        prev = norm;
                    }
                }
            }
        }
        report.push(CheckRecord::at_most(format!("ldlr.ngca.k{k}.upper"), up_ratio, 1.0));
        report.push(CheckRecord::at_most(format!("ldlr.ngca.k{k}.lower"), lo_ratio, 1.0));
        report.push(CheckRecord::new(format!("ldlr.ngca.k{k}.monotone"), monotone, f64::from(u8::from(monotone)), 1.0));
    }

    let cca: Vec<f64> =
        (1..=8).map(|t| ldlr_norm_exact(&LdlrInstance::cca(3, 5, 2, t, 0.3)?)).collect::<memlab_core::Result<_>>()?;
    let monotone = cca.windows(2).all(|w| w[1] >= w[0]);
    report.push(CheckRecord::new("ldlr.cca.monotone", monotone, f64::from(u8::from(monotone)), 1.0));

    report.push(CheckRecord::close("ldlr.cca.parseval", sign_parseval_sum(), 1.0, 1e-8));

    let fresh = calibrate_constants()?;
    let same_keys = fresh.iter().map(|(k, _)| k).eq(frozen.iter().map(|(k, _)| k));
    let drift = max_of(fresh.iter().map(|(key, v)| frozen.get(key).map_or(f64::INFINITY, |s| (v - s).abs() / v.abs())));
    report.push(CheckRecord::at_most("ldlr.frozen_constants", if same_keys { drift } else { f64::INFINITY }, 1e-11));

    let checks = tpca_llr_hermite_check(2, 4, 0.5, 40_000, seed)?;
    let worst = max_of(checks.iter().map(|c| (c.estimate - c.target).abs() / c.std_error.max(1e-12)));
    report.push(CheckRecord::at_most("ldlr.tpca_llr", worst, BAND));
    Ok(report)
}

fn tpca_batch(k: usize, d: usize, n: usize, snr: f64, seed: u64) -> Result<(ModelSpec, SampleBatch)> {
    let spec = ModelSpec::tpca_from_prior(k, d, snr, &mut child_rng(seed, 0))?;
    let batch = sample(&spec, n, child_seed(seed, 1), EntryBudget::default())?;
    Ok((spec, batch))
}

fn harness(seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let (d, k, n) = (3usize, 2usize, 24usize);
    let (_, batch) = tpca_batch(k, d, n, 1.5, child_seed(seed, 0))?;
    for (name, alg) in fixture_algorithms(d, k, n)? {
        let (direct, final_state) = run_memory_bounded(alg.as_ref(), &batch)?;
        for per_machine in [1usize, 6, 24] {
            let protocol = reduce_memory_to_distributed(alg.as_ref(), n, per_machine)?;
            let (reduced, board) = protocol.run(&batch)?;
            let id = format!("harness.{name}.n{per_machine}");
            let mismatches =
                reduced.estimate.iter().zip(&direct.estimate).filter(|(a, b)| a.to_bits() != b.to_bits()).count()
                    + reduced.estimate.len().abs_diff(direct.estimate.len());
            report.push(CheckRecord::new(format!("{id}.bit_identical"), mismatches == 0, mismatches as f64, 0.0));
            let p = protocol.params();
            let want = (n / per_machine) * alg.state_bits() * alg.passes();
            let ok = board.bits.len() == want && p.machines * p.bits_per_machine == want;
            report.push(CheckRecord::new(format!("{id}.transcript_len"), ok, board.bits.len() as f64, want as f64));
            let tail_ok = board.bits[board.bits.len() - alg.state_bits()..] == *final_state.bits();
            let audit = board.audit_writers(&protocol);
            report.push(CheckRecord::new(
                format!("{id}.final_state_and_writers"),
                tail_ok && audit,
                f64::from(u8::from(tail_ok && audit)),
                1.0,
            ));
        }
    }

    let (d, k, n, passes) = (6usize, 4usize, 64usize, 10usize);
    let (spec, batch) = tpca_batch(k, d, n, 2.0, child_seed(seed, 1))?;
    let init = gaussian_vector(d, child_seed(seed, 2));
    let alg = wrap_iteration_as_memory_bounded(
        TensorPowerPsi { k },
        QuantizerSpec::default(),
        passes,
        d,
        n,
        init.clone(),
        2 * d * 32,
    )?;
    let (quantized, _) = run_memory_bounded(&alg, &batch)?;
    let cfg = PowerMethodConfig { max_iters: passes, tol: f64::MIN_POSITIVE, init: Some(init), init_seed: 0 };
    let float = tensor_power_method(&batch, &cfg)?;
    let truth = spec.truth();
    let gap = (overlap(&truth, &quantized.estimate)? - overlap(&truth, &float.estimate)?).abs();
    report.push(CheckRecord::at_most("harness.quantized_power.gap", gap, 1e-6));
    let protocol = reduce_memory_to_distributed(&alg, n, 16)?;
    let (dist, _) = protocol.run(&batch)?;
    let same = dist.estimate == quantized.estimate;
    report.push(CheckRecord::new("harness.quantized_power.distributed", same, f64::from(u8::from(same)), 1.0));
    Ok(report)
}

/// The spectral estimators exercised by the detection checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Spectral {
    Power,
    PartialTrace,
    Matricization,
    Ngca,
    Cca,
}

const SPECTRAL: [Spectral; 5] =
    [Spectral::Power, Spectral::PartialTrace, Spectral::Matricization, Spectral::Ngca, Spectral::Cca];

impl Spectral {
    fn name(self) -> &'static str {
        match self {
            Self::Power => "power",
            Self::PartialTrace => "partial_trace",
            Self::Matricization => "matricization",
            Self::Ngca => "ngca_spectral",
            Self::Cca => "cca_matricization",
        }
    }

    /// `λ = 1` when the model admits it at order `k`, else the largest
    /// admissible value.
    fn signal_snr(self, k: usize) -> Result<f64> {
        Ok(match self {
            Self::Ngca if build_mog_measure(k, 1.0).is_err() => build_mog_measure(k, 0.0)?.lambda_k() / 2.0,
            Self::Cca => cca_lambda_k(k).min(1.0),
            _ => 1.0,
        })
    }

    fn model(self, k: usize, d: usize, snr: f64, seed: u64) -> Result<ModelSpec> {
        let mut rng = child_rng(seed, 0);
        Ok(match self {
            Self::Power | Self::PartialTrace => ModelSpec::tpca_from_prior(k, d, snr, &mut rng)?,
            Self::Matricization => ModelSpec::atpca_coordinate(k, d, snr, &mut rng)?,
            Self::Ngca => ModelSpec::ngca_from_prior(d, build_mog_measure(k, snr)?, &mut rng)?,
            Self::Cca => ModelSpec::cca_coordinate(k, d, snr, &mut rng)?,
        })
    }

    fn overlap(self, k: usize, d: usize, snr: f64, n: usize, seed: u64) -> Result<f64> {
        let spec = self.model(k, d, snr, seed)?;
        let budget = EntryBudget::default();
        let batch = sample(&spec, n, child_seed(seed, 1), budget)?;
        let square = PowerMethodConfig { init_seed: child_seed(seed, 2), ..PowerMethodConfig::for_dim(d) };
        let flat = PowerMethodConfig { init_seed: child_seed(seed, 2), ..PowerMethodConfig::for_dim(d.pow(k as u32 / 2)) };
        let report = match self {
            Self::Power => tensor_power_method(&batch, &square)?,
            Self::PartialTrace => partial_trace_spectral(&batch, &square)?,
            Self::Matricization => mr_matricization_estimator(&batch, &flat)?,
            Self::Ngca => ngca_spectral(&batch, k, &square)?,
            Self::Cca => cca_matricization_estimator(&batch, &flat, budget)?,
        };
        Ok(overlap(&spec.truth(), &report.estimate)?)
    }

    fn median_overlap(self, k: usize, d: usize, snr: f64, n: usize, seeds: &[u64]) -> Result<f64> {
        let values = seeds.par_iter().map(|&s| self.overlap(k, d, snr, n, s)).collect::<Result<Vec<_>>>()?;
        Ok(median(values))
    }
}

fn outer(factors: &[&[f64]]) -> Vec<f64> {
    factors.iter().fold(vec![1.0], |acc, v| acc.iter().flat_map(|&a| v.iter().map(move |&x| a * x)).collect())
}

fn single_record(problem: Problem, k: usize, d: usize, record: Vec<f64>) -> Result<SampleBatch> {
    let len = record.len();
    Ok(SampleBatch::from_parts(problem, k, d, 1.0, 0, len, record, None)?)
}

fn noiseless(report: &mut CheckReport) -> Result<()> {
    const EXACT: f64 = 1.0 - 1e-8;
    let v = [1.0, 2.0, -1.0, 0.5];
    let batch = single_record(Problem::Tpca, 2, 4, outer(&[&v, &v]))?;
    let cfg = PowerMethodConfig { max_iters: 100, tol: 1e-14, init: Some(vec![1.0, 0.0, 0.0, 0.0]), init_seed: 0 };
    let got = overlap(&v, &tensor_power_method(&batch, &cfg)?.estimate)?;
    report.push(CheckRecord::at_least("estimators.noiseless.power.k2", got, EXACT));

    let d = 6;
    let v: Vec<f64> = (0..d).map(|i| if i % 3 == 1 { -1.0 } else { 1.0 }).collect();
    let x: Vec<f64> = outer(&[&v, &v, &v, &v]).iter().map(|a| 2.0 * a / (d * d) as f64).collect();
    let batch = single_record(Problem::Tpca, 4, d, x)?;
    let got = overlap(&v, &partial_trace_spectral(&batch, &PowerMethodConfig::for_dim(d))?.estimate)?;
    report.push(CheckRecord::at_least("estimators.noiseless.partial_trace.k4", got, EXACT));

    let (a, b) = ([1.0, 2.0, 0.0], [0.0, -1.0, 3.0]);
    let batch = single_record(Problem::Atpca, 2, 3, outer(&[&a, &b]))?;
    let got = overlap(&outer(&[&a, &b]), &mr_matricization_estimator(&batch, &PowerMethodConfig::for_dim(3))?.estimate)?;
    report.push(CheckRecord::at_least("estimators.noiseless.matricization.k2", got, EXACT));

    let (c, e) = ([0.5, -1.0, 1.0], [2.0, 0.0, 1.0]);
    let spike = outer(&[&a, &b, &c, &e]);
    let batch = single_record(Problem::Atpca, 4, 3, spike.clone())?;
    let got = overlap(&spike, &mr_matricization_estimator(&batch, &PowerMethodConfig::for_dim(9))?.estimate)?;
    report.push(CheckRecord::at_least("estimators.noiseless.matricization.k4", got, EXACT));

    let views = [vec![1.0, 2.0], vec![0.0, -3.0]];
    let batch = SampleBatch::from_parts(Problem::Cca, 2, 2, 0.5, 0, 4, views.concat(), None)?;
    let target = outer(&[&views[0], &views[1]]);
    let injected = cross_moment_tensor(&batch, EntryBudget::default())?.as_slice() == target.as_slice();
    let est = cca_matricization_estimator(&batch, &PowerMethodConfig::for_dim(2), EntryBudget::default())?;
    let got = overlap(&target, &est.estimate)?;
    report.push(CheckRecord::new("estimators.noiseless.cca_injected_mean", injected && got >= EXACT, got, EXACT));
    Ok(())
}

fn estimators(seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    noiseless(&mut report)?;

    let (d, k) = (6usize, 4usize);
    let seeds: Vec<u64> = (0..10).map(|i| child_seed(seed, 1000 + i)).collect();
    let base_n = 16 * d * d;
    for est in SPECTRAL {
        let snr = est.signal_snr(k)?;
        let signal = est.median_overlap(k, d, snr, base_n, &seeds)?;
        let null = est.median_overlap(k, d, 0.0, base_n, &seeds)?;
        report.push(CheckRecord::at_least(format!("estimators.detection.{}", est.name()), signal, 10.0 * null));

        let medians = [base_n / 4, base_n, 4 * base_n]
            .iter()
            .map(|&n| est.median_overlap(k, d, snr, n, &seeds))
            .collect::<Result<Vec<_>>>()?;
        let drop = max_of(medians.windows(2).map(|w| w[0] - w[1]));
        report.push(CheckRecord::at_most(format!("estimators.monotone_in_n.{}", est.name()), drop, 0.0));
    }
    Ok(report)
}

const REFERENCE_DRAWS: usize = 10_000_000;
const REFERENCE_CHUNK: usize = 100_000;

fn reference(seed: u64) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let orders = [2usize, 4, 6];
    for (di, d) in [5usize, 20].into_iter().enumerate() {
        let base = child_seed(seed, di as u64);
        // per chunk: (Σ f_k, Σ f_k²) for each order, reduced below in chunk order
        let partial: Vec<Vec<(f64, f64)>> = (0..REFERENCE_DRAWS / REFERENCE_CHUNK)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = child_rng(base, chunk as u64);
                let mut z = vec![0.0; d];
                let mut acc = vec![(0.0, 0.0); orders.len()];
                for _ in 0..REFERENCE_CHUNK {
                    fill_gaussian(&mut rng, &mut z);
                    let w = z.iter().map(|x| x * x).sum::<f64>() - d as f64;
                    for (slot, &k) in acc.iter_mut().zip(&orders) {
                        let f = w.powi((k as i32 - 2) / 2) * z[0] * z[0];
                        slot.0 += f;
                        slot.1 += f * f;
                    }
                }
                acc
            })
            .collect();
        let n = REFERENCE_DRAWS as f64;
        for (j, &k) in orders.iter().enumerate() {
            let (sum, sq) = partial.iter().fold((0.0, 0.0), |(a, b), c| (a + c[j].0, b + c[j].1));
            let mean = sum / n;
            let se = ((sq / n - mean * mean) * n / (n - 1.0) / n).sqrt();
            let exact = gaussian_reference_constant(k, d)?;
            let z = (mean - exact).abs() / se;
            report.push(CheckRecord::at_most(format!("reference.k{k}.d{d}.monte_carlo"), z, BAND));
        }
    }
    for d in [1usize, 5, 20, 100] {
        let c = gaussian_reference_constant(4, d)?;
        report.push(CheckRecord::new(format!("reference.k4.d{d}.exact"), c == 2.0, c, 2.0));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(matches!(run_suite("nope", 0), Err(CliError::UnknownSuite(..))));
    }

    #[test]
    fn median_of_even_and_odd_lists() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
