use memlab_core::estimators::{
    brute_force_cca, brute_force_ngca, cca_matricization_estimator, cross_moment_tensor, gaussian_reference_constant,
    minimize_ngca_discrepancy, mr_matricization_estimator, ngca_spectral, ngca_spectral_matrix,
    partial_trace_matrix, partial_trace_spectral, tensor_power_method, wedin_constant, BruteForceConfig,
    PowerMethodConfig, SphereNet,
};
use memlab_core::models::{
    build_mog_measure, sample_atpca, sample_cca, sample_ngca, sample_tpca, ModelSpec, NonGaussMeasure, Problem,
    SampleBatch,
};
use memlab_core::rng::rng_from_seed;
use memlab_core::tensor::{overlap, EntryBudget};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

fn outer(factors: &[&[f64]]) -> Vec<f64> {
    factors.iter().fold(vec![1.0], |acc, v| acc.iter().flat_map(|&a| v.iter().map(move |&x| a * x)).collect())
}

fn tensor_batch(problem: Problem, k: usize, d: usize, records: Vec<Vec<f64>>) -> SampleBatch {
    let len = records[0].len();
    SampleBatch::from_parts(problem, k, d, 1.0, 0, len, records.concat(), None).unwrap()
}

fn cfg_with(init: Vec<f64>, iters: usize) -> PowerMethodConfig {
    PowerMethodConfig { max_iters: iters, tol: 1e-14, init: Some(init), init_seed: 0 }
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

#[test]
fn power_method_noiseless_matrix() {
    let v = [1.0, 2.0, -1.0, 0.5];
    let batch = tensor_batch(Problem::Tpca, 2, 4, vec![outer(&[&v, &v])]);
    let r = tensor_power_method(&batch, &cfg_with(vec![1.0, 0.0, 0.0, 0.0], 50)).unwrap();
    assert!(overlap(&v, &r.estimate).unwrap() >= 1.0 - 1e-9);
    assert!(r.iterations <= 50);
    let norm: f64 = r.estimate.iter().map(|x| x * x).sum::<f64>();
    assert!((norm - 1.0).abs() <= 1e-12);
}

#[test]
fn power_method_orthogonal_start_stays_orthogonal() {
    let v = [1.0, 0.0, 0.0];
    let w = [0.0, 1.0, 0.0];
    let x: Vec<f64> = outer(&[&v, &v]).iter().zip(outer(&[&w, &w])).map(|(a, b)| a + 0.5 * b).collect();
    let batch = tensor_batch(Problem::Tpca, 2, 3, vec![x]);
    let r = tensor_power_method(&batch, &cfg_with(vec![0.0, 1.0, 1.0], 50)).unwrap();
    assert_eq!(overlap(&v, &r.estimate).unwrap(), 0.0);
    // a pure rank-one matrix annihilates an orthogonal start
    let pure = tensor_batch(Problem::Tpca, 2, 3, vec![outer(&[&v, &v])]);
    assert!(tensor_power_method(&pure, &cfg_with(vec![0.0, 1.0, 0.0], 5)).is_err());
}

#[test]
fn power_method_order_three_fixed_point() {
    let v = [1.0, -1.0, 1.0, 1.0];
    let x: Vec<f64> = outer(&[&v, &v, &v]).iter().map(|a| 50.0 * a / 8.0).collect();
    let mut rng = rng_from_seed(4);
    let noisy: Vec<f64> = x.iter().map(|a| { let z: f64 = StandardNormal.sample(&mut rng); a + 0.1 * z }).collect();
    let batch = tensor_batch(Problem::Tpca, 3, 4, vec![noisy.clone()]);
    let r = tensor_power_method(&batch, &cfg_with(vec![1.0, 0.0, 0.5, 0.2], 200)).unwrap();
    assert!(r.converged);
    let u = &r.estimate;
    let mut image = vec![0.0; 4];
    for (e, val) in noisy.iter().enumerate() {
        image[e % 4] += val * u[e / 16] * u[(e / 4) % 4];
    }
    let scale = image.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = if image.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let residual = image.iter().zip(u).map(|(a, b)| (sign * a / scale - b).powi(2)).sum::<f64>().sqrt();
    assert!(residual <= 1e-8, "{residual}");
}

#[test]
fn partial_trace_order_two_is_the_mean() {
    let records: Vec<Vec<f64>> = (0..3).map(|i| (0..9).map(|j| (i * 9 + j) as f64).collect()).collect();
    let batch = tensor_batch(Problem::Tpca, 2, 3, records);
    let m = partial_trace_matrix(&batch).unwrap();
    for a in 0..3 {
        for b in 0..3 {
            assert_eq!(m.get(a, b), (9 + a * 3 + b) as f64);
        }
    }
}

#[test]
fn partial_trace_noiseless_recovery() {
    for (k, d) in [(2usize, 3usize), (2, 8), (4, 3), (4, 6), (4, 8)] {
        let v: Vec<f64> = (0..d).map(|i| if i % 3 == 1 { -1.0 } else { 1.0 }).collect();
        let factors: Vec<&[f64]> = vec![&v; k];
        let x: Vec<f64> = outer(&factors).iter().map(|a| 2.0 * a / (d as f64).powf(k as f64 / 2.0)).collect();
        let batch = tensor_batch(Problem::Tpca, k, d, vec![x]);
        let r = partial_trace_spectral(&batch, &PowerMethodConfig::for_dim(d)).unwrap();
        assert!(overlap(&v, &r.estimate).unwrap() >= 1.0 - 1e-9, "k={k} d={d}");
        // the paired-index sum of λ v^{⊗4}/d^2 is (λ/d) v vᵀ · Σ v_γ² / d
        if k == 4 {
            let m = partial_trace_matrix(&batch).unwrap();
            assert!((m.get(0, 0) - 2.0 / d as f64).abs() < 1e-12);
        }
    }
    let odd = tensor_batch(Problem::Tpca, 3, 2, vec![vec![1.0; 8]]);
    assert!(partial_trace_spectral(&odd, &PowerMethodConfig::for_dim(2)).is_err());
}

#[test]
fn partial_trace_pure_noise_is_uninformative() {
    let d = 10;
    let truth = vec![1.0; d];
    for seed in 0..5 {
        let spec = ModelSpec::tpca(2, d, 0.0, truth.clone()).unwrap();
        let batch = sample_tpca(&spec, 10_000, seed, EntryBudget::default()).unwrap();
        let r = partial_trace_spectral(&batch, &PowerMethodConfig::for_dim(d)).unwrap();
        let e1: Vec<f64> = (0..d).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect();
        assert!(overlap(&e1, &r.estimate).unwrap() <= 10.0 / d as f64);
    }
}

#[test]
fn matricization_noiseless() {
    let a = [1.0, 2.0, 0.0];
    let b = [0.0, -1.0, 3.0];
    let batch = tensor_batch(Problem::Atpca, 2, 3, vec![outer(&[&a, &b])]);
    let r = mr_matricization_estimator(&batch, &PowerMethodConfig::for_dim(3)).unwrap();
    assert!(overlap(&outer(&[&a, &b]), &r.estimate).unwrap() >= 1.0 - 1e-9);

    let d = 3;
    let mut x = vec![0.0; 81];
    x[1 * 27 + 2 * 9 + 0 * 3 + 2] = 5.0;
    let batch = tensor_batch(Problem::Atpca, 4, d, vec![x]);
    let r = mr_matricization_estimator(&batch, &PowerMethodConfig::for_dim(d)).unwrap();
    let mut mags: Vec<(usize, f64)> = r.estimate.iter().map(|v| v.abs()).enumerate().collect();
    mags.sort_by(|p, q| q.1.total_cmp(&p.1));
    assert_eq!(mags[0].0, 1 * 27 + 2 * 9 + 2);
    assert!(mags[1].1 / mags[0].1 <= 1e-6);

    let zero = tensor_batch(Problem::Atpca, 2, 2, vec![vec![0.0; 4]]);
    assert!(mr_matricization_estimator(&zero, &PowerMethodConfig::for_dim(2)).is_err());
}

#[test]
fn matricization_detects_signal() {
    let (d, k) = (4usize, 4usize);
    let n = 16 * d * d;
    let mut with = Vec::new();
    let mut without = Vec::new();
    for seed in 0..5u64 {
        for (snr, out) in [(1.0, &mut with), (0.0, &mut without)] {
            let spec = ModelSpec::atpca_coordinate(k, d, snr, &mut rng_from_seed(seed)).unwrap();
            let batch = sample_atpca(&spec, n, seed + 100, EntryBudget::default()).unwrap();
            let r = mr_matricization_estimator(&batch, &PowerMethodConfig::for_dim(d * d)).unwrap();
            out.push(overlap(&spec.truth(), &r.estimate).unwrap());
        }
    }
    with.sort_by(f64::total_cmp);
    without.sort_by(f64::total_cmp);
    assert!(with[2] >= 10.0 * without[2], "{with:?} {without:?}");
}

#[test]
fn reference_constant_closed_forms() {
    for d in [1usize, 3, 5, 20, 100] {
        assert_eq!(gaussian_reference_constant(2, d).unwrap(), 1.0);
        assert_eq!(gaussian_reference_constant(4, d).unwrap(), 2.0);
        assert_eq!(gaussian_reference_constant(6, d).unwrap(), (2 * d + 8) as f64);
    }
    assert!(gaussian_reference_constant(5, 3).is_err());
}

/// `E[(Q−d)^m z_1²] = E[(Q−d)^m Q] / d` by exchangeability, with central
/// moments of `Q ~ χ²_d` from its raw moments `Π_{r<j} (d + 2r)`.
fn reference_by_exchangeability(k: usize, d: usize) -> f64 {
    let m = (k - 2) / 2;
    let di = d as i128;
    let raw = |j: usize| (0..j).fold(1i128, |acc, r| acc * (di + 2 * r as i128));
    let binom = |n: usize, r: usize| (0..r).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128);
    let central = |p: usize| -> i128 { (0..=p).map(|j| binom(p, j) * raw(j) * (-di).pow((p - j) as u32)).sum() };
    let numerator = central(m + 1) + di * central(m);
    assert_eq!(numerator % di, 0);
    (numerator / di) as f64
}

#[test]
fn reference_constant_matches_exchangeability_oracle() {
    for k in [2usize, 4, 6, 8, 10] {
        for d in [1usize, 2, 5, 9, 20] {
            assert_eq!(gaussian_reference_constant(k, d).unwrap(), reference_by_exchangeability(k, d), "k={k} d={d}");
        }
    }
}

#[test]
fn reference_constant_monte_carlo() {
    let (k, d) = (6usize, 3usize);
    let mut rng = rng_from_seed(17);
    let n = 400_000;
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let q: f64 = z.iter().map(|x| x * x).sum();
            (q - d as f64).powi((k as i32 - 2) / 2) * z[0] * z[0]
        })
        .collect();
    let mean = draws.iter().sum::<f64>() / n as f64;
    let se = (draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0) / n as f64).sqrt();
    assert!((mean - gaussian_reference_constant(k, d).unwrap()).abs() <= 5.0 * se);
}

#[test]
fn ngca_order_two_is_covariance_minus_identity() {
    let records = vec![vec![1.0, 2.0], vec![-1.0, 0.0], vec![0.0, 3.0]];
    let batch = tensor_batch(Problem::Ngca, 2, 2, records.clone());
    let m = ngca_spectral_matrix(&batch, 2).unwrap();
    let cov = |a: usize, b: usize| records.iter().map(|x| x[a] * x[b]).sum::<f64>() / 3.0;
    for a in 0..2 {
        for b in 0..2 {
            let id = if a == b { 1.0 } else { 0.0 };
            assert!((m.get(a, b) - (cov(a, b) - id)).abs() < 1e-14);
        }
    }
    assert!(ngca_spectral_matrix(&batch, 3).is_err());
}

fn op_norm(m: &memlab_core::linalg::Matrix, d: usize) -> f64 {
    let dense: Vec<f64> = (0..d * d).map(|e| m.get(e / d, e % d)).collect();
    let sym = nalgebra::DMatrix::from_row_slice(d, d, &dense);
    sym.symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[test]
fn ngca_null_matrix_shrinks() {
    let d = 10;
    let spec = ModelSpec::ngca(d, NonGaussMeasure::standard_gaussian(), vec![1.0; d]).unwrap();
    let small = sample_ngca(&spec, 1_000, 3).unwrap();
    let large = sample_ngca(&spec, 100_000, 3).unwrap();
    let a = op_norm(&ngca_spectral_matrix(&small, 4).unwrap(), d);
    let b = op_norm(&ngca_spectral_matrix(&large, 4).unwrap(), d);
    assert!(b < a, "{a} {b}");
}

#[test]
fn ngca_matrix_expectation() {
    let d = 3;
    let measure = build_mog_measure(4, 0.5).unwrap();
    // moment_gap is E Z^k − E η^k, so the excess kurtosis is its negation
    let excess = -measure.moment_gap().unwrap();
    let v = vec![1.0, -1.0, 1.0];
    let spec = ModelSpec::ngca(d, measure, v.clone()).unwrap();
    let batch = sample_ngca(&spec, 200_000, 5).unwrap();
    let c = gaussian_reference_constant(4, d).unwrap();
    for (a, b) in [(0usize, 0usize), (0, 1), (1, 2), (2, 2)] {
        let vals: Vec<f64> = batch
            .records()
            .map(|x| {
                let w = x.iter().map(|t| t * t).sum::<f64>() - d as f64;
                w * x[a] * x[b] - if a == b { c } else { 0.0 }
            })
            .collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let se = (vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        let target = excess / d as f64 * v[a] * v[b];
        assert!((mean - target).abs() <= 5.0 * se, "({a},{b}) {mean} vs {target} ± {se}");
    }
    let r = ngca_spectral(&batch, 4, &PowerMethodConfig::for_dim(d)).unwrap();
    assert!(overlap(&v, &r.estimate).unwrap() > 0.95);
    assert!(r.spectral_value.unwrap().signum() == excess.signum());
}

#[test]
fn cca_injected_mean_recovery() {
    let views = [vec![1.0, 2.0], vec![0.0, -3.0]];
    let record: Vec<f64> = views.concat();
    let batch = SampleBatch::from_parts(Problem::Cca, 2, 2, 0.5, 0, 4, record, None).unwrap();
    let t = cross_moment_tensor(&batch, EntryBudget::default()).unwrap();
    assert_eq!(t.as_slice(), outer(&[&views[0], &views[1]]).as_slice());
    let r = cca_matricization_estimator(&batch, &PowerMethodConfig::for_dim(2), EntryBudget::default()).unwrap();
    assert!(overlap(&outer(&[&views[0], &views[1]]), &r.estimate).unwrap() >= 1.0 - 1e-9);
}

#[test]
fn cca_null_singular_value_shrinks() {
    let spec = ModelSpec::cca(2, 3, 0.0, vec![vec![3f64.sqrt(), 0.0, 0.0]; 2]).unwrap();
    let cfg = PowerMethodConfig::for_dim(3);
    let sv = |n| {
        let b = sample_cca(&spec, n, 9).unwrap();
        cca_matricization_estimator(&b, &cfg, EntryBudget::default()).unwrap().spectral_value.unwrap()
    };
    assert!(sv(100_000) < sv(1_000));
}

#[test]
fn cca_coordinate_spike_detection() {
    let cfg = PowerMethodConfig::for_dim(2);
    let run = |snr: f64| {
        let spec = ModelSpec::cca_coordinate(2, 2, snr, &mut rng_from_seed(2)).unwrap();
        let b = sample_cca(&spec, 100_000, 8).unwrap();
        let r = cca_matricization_estimator(&b, &cfg, EntryBudget::default()).unwrap();
        overlap(&spec.truth(), &r.estimate).unwrap()
    };
    let signal = run(0.5);
    let null = run(0.0);
    assert!(signal >= 10.0 * null, "{signal} {null}");
}

#[test]
fn net_coverage() {
    for (d, delta) in [(2usize, 0.2), (3, 0.5), (4, 0.8)] {
        let net = SphereNet::build(d, delta, 1).unwrap();
        assert!(net.probe_gap(10_000, 77) <= delta, "d={d}");
    }
}

#[test]
fn ngca_net_minimum_noiseless_proxy() {
    let net = SphereNet::build(3, 0.3, 2).unwrap();
    let v = unit(&[1.0, -2.0, 0.5]);
    let (k, lambda) = (4usize, 0.7);
    let f: Vec<f64> = net.iter().map(|w| lambda * w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().powi(k as i32)).collect();
    let best = minimize_ngca_discrepancy(&net, &f, k, lambda);
    let nearest = net
        .iter()
        .map(|w| w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>().abs())
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
        .unwrap()
        .0;
    assert_eq!(best.index, nearest);
    assert_eq!(best.sign, 1.0);
    let gap = net.distance_to_net(&v).min(net.distance_to_net(&v.iter().map(|x| -x).collect::<Vec<_>>()));
    assert!(best.discrepancy <= lambda * k as f64 * gap);
}

fn net_discrepancy(net: &SphereNet, a: &[f64], b: &[f64], k: usize) -> f64 {
    let ip = |x: &[f64], w: &[f64]| x.iter().zip(w).map(|(p, q)| p * q).sum::<f64>();
    net.iter().map(|w| (ip(a, w).powi(k as i32) - ip(b, w).powi(k as i32)).abs()).fold(0.0, f64::max)
}

#[test]
fn wedin_separation_on_random_pairs() {
    let delta = 0.25;
    let net = SphereNet::build(3, delta, 5).unwrap();
    let mut rng = rng_from_seed(6);
    for k in [2usize, 3, 4] {
        let ck = wedin_constant(k);
        for _ in 0..200 {
            let a = unit(&(0..3).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>());
            let b = unit(&(0..3).map(|_| StandardNormal.sample(&mut rng)).collect::<Vec<f64>>());
            let dist_minus = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let dist_plus = a.iter().zip(&b).map(|(x, y)| (x + y).powi(2)).sum::<f64>().sqrt();
            let dist = if k % 2 == 0 { dist_minus.min(dist_plus) } else { dist_minus };
            assert!(net_discrepancy(&net, &a, &b, k) >= ck * dist - 2.0 * k as f64 * delta);
        }
    }
}

#[test]
fn brute_force_ngca_recovers_direction() {
    let measure = build_mog_measure(4, 0.8).unwrap();
    let v = vec![1.0, 1.0];
    let spec = ModelSpec::ngca(2, measure, v.clone()).unwrap();
    let batch = sample_ngca(&spec, 20_000, 12).unwrap();
    let cfg = BruteForceConfig::new(0.05, 4.0);
    let r = brute_force_ngca(&batch, 4, &cfg).unwrap();
    assert!(overlap(&v, &r.estimate).unwrap() > 0.9);
    let wide = sample_ngca(&ModelSpec::ngca(5, build_mog_measure(4, 0.5).unwrap(), vec![1.0; 5]).unwrap(), 10, 1).unwrap();
    assert!(brute_force_ngca(&wide, 4, &cfg).is_err());
}

#[test]
fn brute_force_cca_recovers_views() {
    let root = 2f64.sqrt();
    let spec = ModelSpec::cca(2, 2, 0.5, vec![vec![root, 0.0], vec![1.0, -1.0]]).unwrap();
    let batch = sample_cca(&spec, 20_000, 4).unwrap();
    let r = brute_force_cca(&batch, &BruteForceConfig::new(0.15, 6.0)).unwrap();
    assert!(overlap(&spec.truth(), &r.estimate).unwrap() > 0.8);
    let mut tiny = BruteForceConfig::new(0.05, 6.0);
    tiny.max_evaluations = 1000;
    assert!(brute_force_cca(&batch, &tiny).is_err());
}

#[test]
fn spectral_estimators_are_sign_symmetric() {
    let d = 4;
    let spec = ModelSpec::tpca(4, d, 2.0, vec![1.0, -1.0, 1.0, 1.0]).unwrap();
    let batch = sample_tpca(&spec, 200, 3, EntryBudget::default()).unwrap();
    let mut neg = batch.clone();
    neg.map_records(|r| r.iter_mut().for_each(|x| *x = -*x));
    let cfg = PowerMethodConfig::for_dim(d);
    let truth = spec.truth();
    let pairs = [
        (tensor_power_method(&batch, &cfg).unwrap(), tensor_power_method(&neg, &cfg).unwrap()),
        (partial_trace_spectral(&batch, &cfg).unwrap(), partial_trace_spectral(&neg, &cfg).unwrap()),
    ];
    for (a, b) in pairs {
        let (oa, ob) = (overlap(&truth, &a.estimate).unwrap(), overlap(&truth, &b.estimate).unwrap());
        assert!((oa - ob).abs() < 1e-9, "{oa} {ob}");
    }
    let flat_truth: Vec<f64> = truth.clone();
    let a = mr_matricization_estimator(&batch, &PowerMethodConfig::for_dim(16)).unwrap();
    let b = mr_matricization_estimator(&neg, &PowerMethodConfig::for_dim(16)).unwrap();
    let full = outer(&vec![flat_truth.as_slice(); 4]);
    assert!((overlap(&full, &a.estimate).unwrap() - overlap(&full, &b.estimate).unwrap()).abs() < 1e-9);

    let ng = ModelSpec::ngca(d, build_mog_measure(4, 0.5).unwrap(), vec![1.0; d]).unwrap();
    let nb = sample_ngca(&ng, 2000, 1).unwrap();
    let mut nn = nb.clone();
    nn.map_records(|r| r.iter_mut().for_each(|x| *x = -*x));
    let a = ngca_spectral(&nb, 4, &cfg).unwrap();
    let b = ngca_spectral(&nn, 4, &cfg).unwrap();
    assert!((overlap(&ng.truth(), &a.estimate).unwrap() - overlap(&ng.truth(), &b.estimate).unwrap()).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn power_iterates_have_unit_norm(seed in 0u64..1000, iters in 1usize..8) {
        let mut rng = rng_from_seed(seed);
        let x: Vec<f64> = (0..27).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let batch = tensor_batch(Problem::Tpca, 3, 3, vec![x]);
        let r = tensor_power_method(&batch, &PowerMethodConfig { max_iters: iters, tol: 1e-14, init: None, init_seed: seed }).unwrap();
        let norm: f64 = r.estimate.iter().map(|x| x * x).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
        prop_assert!(r.iterations <= iters);
    }
}
