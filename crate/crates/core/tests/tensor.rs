use approx::assert_abs_diff_eq;
use memlab_core::linalg::{power_iteration, top_singular_triplet, Matrix, PowerConfig};
use memlab_core::tensor::{
    contract, contract_flat, matricize, matricize_inverse, overlap, rank1_densify, DenseTensor, EntryBudget,
    RankOneSpike,
};
use memlab_core::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn naive_contract(x: &[f64], k: usize, d: usize, psi: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; d];
    for flat in 0..d.pow(k as u32) {
        // decode (j_1, …, j_k), last index fastest
        let mut idx = vec![0; k];
        let mut rest = flat;
        for slot in idx.iter_mut().rev() {
            *slot = rest % d;
            rest /= d;
        }
        let mut p = 0;
        for &j in &idx[..k - 1] {
            p = p * d + j;
        }
        out[idx[k - 1]] += x[flat] * psi[p];
    }
    out
}

#[test]
fn densify_examples() {
    let s = 2f64.sqrt();
    let spike = RankOneSpike::new(vec![vec![s, 0.0], vec![s, 0.0]], 1.0).unwrap();
    let t = rank1_densify(&spike, EntryBudget::default()).unwrap();
    assert_abs_diff_eq!(t.get(&[0, 0]), 1.0, epsilon = 1e-15);
    assert_eq!(t.as_slice().iter().filter(|&&v| v != 0.0).count(), 1);

    let zero = RankOneSpike::symmetric(vec![1.0, -1.0, 1.0], 3, 0.0).unwrap();
    assert!(rank1_densify(&zero, EntryBudget::default()).unwrap().as_slice().iter().all(|&v| v == 0.0));

    let vec1 = RankOneSpike::new(vec![vec![3f64.sqrt(), 0.0, 0.0]], 2.0).unwrap();
    let t1 = rank1_densify(&vec1, EntryBudget::default()).unwrap();
    assert_abs_diff_eq!(t1.as_slice()[0], 2.0, epsilon = 1e-14);
    assert_eq!(&t1.as_slice()[1..], &[0.0, 0.0]);
}

#[test]
fn spike_requires_sqrt_d_norm() {
    assert!(RankOneSpike::symmetric(vec![1.0, 1.0, 0.5], 2, 1.0).is_err());
    assert!(RankOneSpike::new(vec![vec![1.0, 1.0], vec![1.0]], 1.0).is_err());
}

#[test]
fn budget_guard() {
    assert!(matches!(DenseTensor::zeros(4, 101, EntryBudget::default()), Err(Error::Budget { .. })));
    assert!(matches!(DenseTensor::zeros(3, 10, EntryBudget(999)), Err(Error::Budget { .. })));
    assert!(DenseTensor::zeros(3, 10, EntryBudget(1000)).is_ok());
}

#[test]
fn contraction_examples() {
    // k = 2: contract(A, u) = Aᵀ u
    let a = DenseTensor::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let u = DenseTensor::from_vec(1, 2, vec![1.0, -1.0]).unwrap();
    assert_eq!(contract(&a, &u).unwrap(), vec![-2.0, -2.0]);
    assert_eq!(contract_flat(&a, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);

    let e1 = [1.0, 0.0];
    let e2 = [0.0, 1.0];
    let x = DenseTensor::outer(&[&e1, &e1, &e2], 1.0, EntryBudget::default()).unwrap();
    let psi = DenseTensor::outer(&[&e1, &e1], 1.0, EntryBudget::default()).unwrap();
    assert_eq!(contract(&x, &psi).unwrap(), vec![0.0, 1.0]);

    assert!(contract(&x, &u).is_err());
    let psi3 = DenseTensor::zeros(2, 3, EntryBudget::default()).unwrap();
    assert!(contract(&x, &psi3).is_err());
}

#[test]
fn matricization_examples() {
    let a = DenseTensor::from_vec(2, 3, (0..9).map(f64::from).collect()).unwrap();
    let m = matricize(&a).unwrap();
    assert_eq!(m.as_slice(), a.as_slice());
    assert_eq!(m.rows(), 3);

    let t = DenseTensor::from_vec(4, 2, (0..16).map(f64::from).collect()).unwrap();
    let m = matricize(&t).unwrap();
    // 1-based (1,2,2,1) is 0-based (0,1,1,0); row (0,1) = 1, column (1,0) = 2
    assert_eq!(m.get(1, 2), t.get(&[0, 1, 1, 0]));

    assert!(matricize(&DenseTensor::zeros(3, 2, EntryBudget::default()).unwrap()).is_err());
}

#[test]
fn rank_one_spike_matricizes_to_rank_one() {
    let v = vec![1.0, -1.0, 1.0, 1.0];
    let w = vec![1.0, 1.0, -1.0, 1.0];
    let spike = RankOneSpike::new(vec![v.clone(), w.clone(), v, w], 1.5).unwrap();
    let t = rank1_densify(&spike, EntryBudget::default()).unwrap();
    assert_abs_diff_eq!(t.frobenius_norm(), 1.5, epsilon = 1e-9);
    let m = matricize(&t).unwrap();
    let nm = DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice());
    let sv = nm.singular_values();
    let mut sorted: Vec<f64> = sv.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    assert_abs_diff_eq!(sorted[0], 1.5, epsilon = 1e-9);
    assert!(sorted[1] < 1e-9);

    let trip = top_singular_triplet(&m, &PowerConfig::for_dim(16)).unwrap();
    assert_abs_diff_eq!(trip.value, 1.5, epsilon = 1e-9);
}

#[test]
fn overlap_examples() {
    assert_eq!(overlap(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
    assert_eq!(overlap(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
    assert_abs_diff_eq!(overlap(&[1.0, 0.0], &[3.0, 3.0]).unwrap(), 0.5, epsilon = 1e-15);
    assert!(overlap(&[0.0, 0.0], &[1.0, 0.0]).is_err());
}

#[test]
fn power_iteration_matches_nalgebra_eigenvalue() {
    let data = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 1.0];
    let m = Matrix::from_vec(3, 3, data.to_vec()).unwrap();
    let pair = power_iteration(|x, y| m.matvec(x, y), vec![1.0, 1.0, 1.0], &PowerConfig { max_iters: 500, tol: 1e-14, init_seed: 0 })
        .unwrap();
    let eig = nalgebra::SymmetricEigen::new(DMatrix::from_row_slice(3, 3, &data));
    let top = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_abs_diff_eq!(pair.value, top, epsilon = 1e-9);
}

fn tensor_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (2usize..=4, 1usize..=5).prop_flat_map(|(k, d)| {
        let n = d.pow(k as u32);
        let m = d.pow(k as u32 - 1);
        (Just(k), Just(d), prop::collection::vec(-2.0f64..2.0, n), prop::collection::vec(-2.0f64..2.0, m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn contraction_matches_nested_loops((k, d, x, psi) in tensor_strategy()) {
        let t = DenseTensor::from_vec(k, d, x.clone()).unwrap();
        let got = contract_flat(&t, &psi).unwrap();
        let want = naive_contract(&x, k, d, &psi);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn matricization_is_an_exact_isometry(d in 1usize..4, a in prop::collection::vec(-3.0f64..3.0, 81), b in prop::collection::vec(-3.0f64..3.0, 81)) {
        let n = d.pow(4);
        let s = DenseTensor::from_vec(4, d, a[..n].to_vec()).unwrap();
        let t = DenseTensor::from_vec(4, d, b[..n].to_vec()).unwrap();
        let (ms, mt) = (matricize(&s).unwrap(), matricize(&t).unwrap());
        let back = matricize_inverse(&ms, 4, d).unwrap();
        prop_assert_eq!(&back, &s);
        let mi: f64 = ms.as_slice().iter().zip(mt.as_slice()).map(|(x, y)| x * y).sum();
        prop_assert_eq!(mi.to_bits(), s.inner(&t).unwrap().to_bits());
    }

    #[test]
    fn overlap_is_scale_and_sign_invariant(v in prop::collection::vec(-1.0f64..1.0, 4), w in prop::collection::vec(-1.0f64..1.0, 4), c in 0.1f64..10.0) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3) && w.iter().any(|x| x.abs() > 1e-3));
        let base = overlap(&v, &w).unwrap();
        let scaled: Vec<f64> = w.iter().map(|x| -c * x).collect();
        prop_assert!((overlap(&v, &scaled).unwrap() - base).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&base));
    }

    #[test]
    fn self_inner_product_is_nonnegative(x in prop::collection::vec(-1.0f64..1.0, 27)) {
        let t = DenseTensor::from_vec(3, 3, x.clone()).unwrap();
        let ip = t.inner(&t).unwrap();
        prop_assert!(ip >= 0.0);
        prop_assert_eq!(ip == 0.0, x.iter().all(|&v| v == 0.0));
    }
}
