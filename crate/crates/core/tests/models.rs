use approx::assert_abs_diff_eq;
use memlab_core::hermite::{gauss_hermite_rule, HermiteBasis};
use memlab_core::models::{
    batch_io, build_bounded_llr_measure, build_mog_measure, cca_lambda_k, cca_to_parity, ngca_to_glm, sample,
    sample_atpca, sample_cca, sample_ngca, sample_tpca, Hidden, MeasureKind, ModelSpec, NonGaussMeasure, Problem,
};
use memlab_core::rng::rng_from_seed;
use memlab_core::tensor::EntryBudget;
use memlab_core::Error;

fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn within(values: impl Iterator<Item = f64>, target: f64, sigmas: f64) -> bool {
    let (m, se) = mean_and_se(values);
    (m - target).abs() <= sigmas * se.max(1e-12)
}

#[test]
fn tpca_mean_and_variance() {
    let v = vec![1.0, -1.0, 1.0];
    let spec = ModelSpec::tpca(3, 3, 2.0, v.clone()).unwrap();
    let n = 10_000;
    let batch = sample_tpca(&spec, n, 7, EntryBudget::default()).unwrap();
    assert_eq!(batch.len(), n);
    let scale = 2.0 / 27f64.sqrt();
    for e in 0..27 {
        let (a, b, c) = (e / 9, (e / 3) % 3, e % 3);
        let target = scale * v[a] * v[b] * v[c];
        let (m, _) = mean_and_se(batch.records().map(|r| r[e]));
        assert!((m - target).abs() <= 5.0 / (n as f64).sqrt(), "entry {e}");
    }
    let (var, _) = mean_and_se(batch.records().map(|r| (r[5] - scale * v[0] * v[1] * v[2]).powi(2)));
    assert!((var - 1.0).abs() < 0.05);

    let null = sample_tpca(&ModelSpec::tpca(3, 3, 0.0, v).unwrap(), n, 8, EntryBudget::default()).unwrap();
    for e in 0..27 {
        assert!(within(null.records().map(|r| r[e]), 0.0, 5.0));
    }
}

#[test]
fn atpca_coordinate_prior_and_mean() {
    let mut rng = rng_from_seed(3);
    let spec = ModelSpec::atpca_coordinate(2, 4, 1.5, &mut rng).unwrap();
    let Hidden::Spike(spike) = &spec.hidden else { panic!() };
    let i = spike.factors()[0].iter().position(|&x| x != 0.0).unwrap();
    let j = spike.factors()[1].iter().position(|&x| x != 0.0).unwrap();
    assert_abs_diff_eq!(spike.factors()[0][i], 2.0, epsilon = 1e-15);
    let batch = sample_atpca(&spec, 20_000, 11, EntryBudget::default()).unwrap();
    // signal entry λ · d / √(d^2) = λ
    assert!(within(batch.records().map(|r| r[i * 4 + j]), 1.5, 5.0));
    let other = (i * 4 + j + 1) % 16;
    assert!(within(batch.records().map(|r| r[other]), 0.0, 5.0));
}

#[test]
fn sample_budget_is_enforced() {
    let spec = ModelSpec::tpca(4, 10, 1.0, vec![1.0; 10]).unwrap();
    assert!(matches!(sample_tpca(&spec, 100, 0, EntryBudget(10_000)), Err(Error::Budget { .. })));
    assert!(sample(&spec, 2, 0, EntryBudget(100_000)).is_ok());
}

#[test]
fn samplers_are_deterministic() {
    let spec = ModelSpec::tpca(2, 5, 1.0, vec![1.0; 5]).unwrap();
    let a = sample(&spec, 3000, 99, EntryBudget::default()).unwrap();
    let b = sample(&spec, 3000, 99, EntryBudget::default()).unwrap();
    assert_eq!(a.data(), b.data());
    let c = sample(&spec, 3000, 100, EntryBudget::default()).unwrap();
    assert_ne!(a.data(), c.data());

    let m = build_bounded_llr_measure(3, 0.5 * build_bounded_llr_measure(3, 1e-3).unwrap().lambda_k()).unwrap();
    let ng = ModelSpec::ngca(4, m, vec![1.0, -1.0, 1.0, 1.0]).unwrap();
    assert_eq!(sample_ngca(&ng, 2000, 5).unwrap().data(), sample_ngca(&ng, 2000, 5).unwrap().data());
}

#[test]
fn mog_single_component_example() {
    let lambda = 0.3;
    let m = build_mog_measure(2, lambda).unwrap();
    assert_abs_diff_eq!(m.lambda_k(), 1.0, epsilon = 1e-12);
    let MeasureKind::GaussMixture(mix) = m.kind() else { panic!() };
    assert_eq!(mix.means, vec![0.0]);
    assert_abs_diff_eq!(mix.variance, 1.0 - lambda, epsilon = 1e-12);
    assert_abs_diff_eq!(m.moment_gap().unwrap(), lambda, epsilon = 1e-12);
    assert!(build_mog_measure(2, 0.51).is_err());
    assert!(build_mog_measure(3, 0.1).is_err());
}

#[test]
fn constructions_match_moments() {
    let rule = gauss_hermite_rule(30).unwrap();
    for k in [2usize, 4, 6] {
        let lk = build_mog_measure(k, 0.0).unwrap().lambda_k();
        for frac in [0.1, 0.25, 0.5] {
            let m = build_mog_measure(k, frac * lk).unwrap();
            assert_abs_diff_eq!(m.hermite_coeff(0, &rule).unwrap(), 1.0, epsilon = 1e-12);
            for i in 1..k {
                assert!(m.hermite_coeff(i, &rule).unwrap().abs() < 1e-7, "mog k={k} i={i}");
            }
            assert_abs_diff_eq!(m.moment_gap().unwrap().abs(), frac * lk, epsilon = 1e-6);
        }
    }
    for k in [2usize, 3, 4, 6] {
        let lk = build_bounded_llr_measure(k, 1e-3).unwrap().lambda_k();
        for frac in [0.1, 0.5, 1.0] {
            let m = build_bounded_llr_measure(k, frac * lk).unwrap();
            for i in 1..k {
                assert!(m.hermite_coeff(i, &rule).unwrap().abs() < 1e-7, "llr k={k} i={i}");
            }
            assert_abs_diff_eq!(m.moment_gap().unwrap().abs(), frac * lk, epsilon = 1e-6);
            let mass = m.expect(|_| 1.0, 40).unwrap();
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
            let bound = frac + 1e-12;
            let worst = (0..10_000).map(|j| (m.density_ratio(-5.0 + j as f64 * 1e-3) - 1.0).abs()).fold(0.0, f64::max);
            assert!(worst <= bound, "k={k} frac={frac}: {worst}");
            if frac == 1.0 {
                assert!((0..10_000).all(|j| m.density_ratio(-1.0 + j as f64 * 2e-4) >= 0.0));
            }
            if k % 2 == 1 {
                assert!(m.symmetry_defect(4001) < 1e-12);
            }
        }
        assert!(build_bounded_llr_measure(k, lk * 1.01).is_err());
    }
}

#[test]
fn vanishing_snr_gives_gaussian() {
    let m = build_mog_measure(4, 0.0).unwrap();
    assert!(m.coefficients()[1..].iter().all(|c| c.abs() < 1e-12));
}

#[test]
fn ngca_projection_follows_measure() {
    let m = build_mog_measure(4, 0.8).unwrap();
    let coeffs = m.coefficients().to_vec();
    let v = vec![1.0, 1.0, -1.0, 1.0, -1.0];
    let spec = ModelSpec::ngca(5, m, v.clone()).unwrap();
    let batch = sample_ngca(&spec, 40_000, 21).unwrap();
    let basis = HermiteBasis::new(6);
    let proj: Vec<f64> = batch.records().map(|x| x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / 5f64.sqrt()).collect();
    for t in 1..=5 {
        assert!(within(proj.iter().map(|&p| basis.eval(t, p).unwrap()), coeffs[t], 5.0), "t={t}");
    }
    // the orthogonal complement is standard Gaussian: coordinate difference 0-1 is orthogonal to V
    let comp: Vec<f64> = batch.records().map(|x| (x[0] - x[1]) / 2f64.sqrt()).collect();
    assert!(within(comp.iter().map(|c| c * c), 1.0, 5.0));
}

#[test]
fn cca_cross_moment_and_marginals() {
    let spec = ModelSpec::cca(2, 1, 0.3, vec![vec![1.0], vec![1.0]]).unwrap();
    let n = 100_000;
    let batch = sample_cca(&spec, n, 4).unwrap();
    assert!(within(batch.records().map(|r| r[0] * r[1]), 0.3, 5.0));
    assert!(within(batch.records().map(|r| r[0]), 0.0, 5.0));
    assert!(within(batch.records().map(|r| r[1] * r[1]), 1.0, 5.0));
    let acc = n as f64 / batch.proposals() as f64;
    assert!(acc >= 1.0 / (1.0 + 0.3 / cca_lambda_k(2)) - 0.01 && acc <= 1.0);
    assert!(ModelSpec::cca(2, 1, 0.7, vec![vec![1.0], vec![1.0]]).is_err());
}

#[test]
fn glm_reduction_labels_follow_density_ratio() {
    let lk = build_bounded_llr_measure(3, 1e-3).unwrap().lambda_k();
    let m = build_bounded_llr_measure(3, lk).unwrap();
    let nu3 = m.coefficients()[3];
    let v = vec![1.0, -1.0, 1.0, -1.0];
    let spec = ModelSpec::ngca(4, m, v.clone()).unwrap();
    let batch = sample_ngca(&spec, 60_000, 8).unwrap();
    let glm = ngca_to_glm(&spec, &batch, 9).unwrap();
    assert_eq!(glm.problem, Problem::Glm);
    let labels = glm.labels().unwrap();
    let basis = HermiteBasis::new(3);
    let signed = glm.records().zip(labels).map(|(f, &r)| {
        let xi = f.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / 2.0;
        (2.0 * f64::from(r) - 1.0) * basis.eval(3, xi).unwrap()
    });
    assert!(within(signed, nu3, 5.0));
    assert!(within(glm.records().map(|f| f[2] * f[2]), 1.0, 5.0));
    assert!(within(glm.records().map(|f| f[1]), 0.0, 5.0));

    let even = ModelSpec::ngca(4, build_mog_measure(4, 0.5).unwrap(), v).unwrap();
    let b2 = sample_ngca(&even, 100, 1).unwrap();
    assert!(ngca_to_glm(&even, &b2, 2).is_err());
}

#[test]
fn parity_reduction_rate() {
    let lambda = 0.2;
    let d = 2;
    let root = 2f64.sqrt();
    let views = vec![vec![root, 0.0], vec![0.0, root], vec![root, 0.0]];
    let spec = ModelSpec::cca(3, d, lambda, views).unwrap();
    let batch = sample_cca(&spec, 100_000, 12).unwrap();
    let (parity, out) = cca_to_parity(&spec, &batch, 13).unwrap();
    let Hidden::Parity { coords, rate } = &parity.hidden else { panic!() };
    assert_eq!(coords, &vec![0, 3, 4]);
    assert_abs_diff_eq!(*rate, lambda / cca_lambda_k(3), epsilon = 1e-15);
    let corr = out.records().zip(out.labels().unwrap()).map(|(f, &r)| {
        let s: f64 = coords.iter().map(|&c| if f[c] >= 0.0 { 1.0 } else { -1.0 }).product();
        (2.0 * f64::from(r) - 1.0) * s
    });
    assert!(within(corr, *rate, 5.0));
    let (k4, _) = mean_and_se(out.records().map(|f| f[1].powi(4)));
    assert!((k4 - 3.0).abs() < 0.15);

    let even = ModelSpec::cca(2, d, 0.1, vec![vec![root, 0.0], vec![0.0, root]]).unwrap();
    let b = sample_cca(&even, 10, 1).unwrap();
    assert!(cca_to_parity(&even, &b, 1).is_err());
}

#[test]
fn null_parity_labels_are_independent() {
    let root = 2f64.sqrt();
    let spec = ModelSpec::cca(3, 2, 0.0, vec![vec![root, 0.0]; 3]).unwrap();
    let batch = sample_cca(&spec, 50_000, 2).unwrap();
    let (_, out) = cca_to_parity(&spec, &batch, 3).unwrap();
    let corr = out.records().zip(out.labels().unwrap()).map(|(f, &r)| (2.0 * f64::from(r) - 1.0) * f[0]);
    assert!(within(corr, 0.0, 5.0));
}

#[test]
fn batch_round_trip() {
    let spec = ModelSpec::cca(2, 3, 0.2, vec![vec![3f64.sqrt(), 0.0, 0.0]; 2]).unwrap();
    let batch = sample_cca(&spec, 50, 77).unwrap();
    let (_, parity_like) = {
        let root = 3f64.sqrt();
        let s3 = ModelSpec::cca(3, 3, 0.2, vec![vec![root, 0.0, 0.0]; 3]).unwrap();
        let b3 = sample_cca(&s3, 20, 1).unwrap();
        cca_to_parity(&s3, &b3, 2).unwrap()
    };
    for b in [batch, parity_like] {
        let mut buf = Vec::new();
        batch_io::write_batch(&mut buf, &b).unwrap();
        assert_eq!(&buf[..8], b"MLBATCH\0");
        let back = batch_io::read_batch(buf.as_slice()).unwrap();
        assert_eq!(back.data(), b.data());
        assert_eq!(back.labels(), b.labels());
        assert_eq!((back.problem, back.k, back.d, back.seed), (b.problem, b.k, b.d, b.seed));
        assert_eq!(back.snr.to_bits(), b.snr.to_bits());
        buf[0] = b'X';
        assert!(batch_io::read_batch(buf.as_slice()).is_err());
    }
}

#[test]
fn gaussian_measure_samples_are_standard() {
    let spec = ModelSpec::ngca(3, NonGaussMeasure::standard_gaussian(), vec![1.0; 3]).unwrap();
    let batch = sample_ngca(&spec, 30_000, 5).unwrap();
    for (a, b) in [(0, 0), (1, 1), (0, 1), (1, 2)] {
        let target = if a == b { 1.0 } else { 0.0 };
        assert!(within(batch.records().map(|x| x[a] * x[b]), target, 5.0));
    }
}
