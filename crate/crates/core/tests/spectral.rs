mod common;

use nalgebra::DMatrix;
use netcontract::matrix::{
    abscissa_report, matrix_measure, operator_norm, perron_pair, spectral_abscissa, PerronOptions,
};
use netcontract::{classify, MetzlerMatrix, Norm, Structure};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{eigen_abscissa, irreducible_metzler, metzler};

fn sized_metzler(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec((-5.0..5.0f64, 0.0..3.0f64, prop::bool::weighted(0.6)), n * n).prop_map(move |cells| {
        DMatrix::from_fn(n, n, |i, j| {
            let (diag, off, keep) = cells[i * n + j];
            if i == j {
                diag
            } else if keep {
                off
            } else {
                0.0
            }
        })
    })
}

fn metzler_strategy(max_n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (1..=max_n).prop_flat_map(sized_metzler)
}

fn metzler_pair(max_n: usize) -> impl Strategy<Value = (DMatrix<f64>, DMatrix<f64>)> {
    (1..=max_n).prop_flat_map(|n| (sized_metzler(n), sized_metzler(n)))
}

#[test]
fn abscissa_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for n in [2, 3, 5, 8, 13, 30] {
        for _ in 0..10 {
            let a = irreducible_metzler(&mut rng, n, 0.3);
            let got = spectral_abscissa(&a).unwrap();
            let want = eigen_abscissa(a.entries());
            assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "n = {n}: {got} vs {want}");
        }
    }
}

#[test]
fn reducible_abscissa_matches_dense_eigensolver() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..50 {
        let a = metzler(&mut rng, 7, 0.15);
        let report = abscissa_report(&MetzlerMatrix::new(a.clone()).unwrap(), &PerronOptions::default()).unwrap();
        let want = eigen_abscissa(&a);
        assert!((report.value - want).abs() < 1e-8 * want.abs().max(1.0), "{} vs {want}", report.value);
        assert_eq!(report.reducible_fallback, report.structure == Structure::ReducibleOther);
    }
}

#[test]
fn perron_pair_agrees_with_abscissa_up_to_200() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for n in [1, 2, 10, 50, 120, 200] {
        let a = irreducible_metzler(&mut rng, n, 0.05);
        let alpha = spectral_abscissa(&a).unwrap();
        let p = perron_pair(&a, 1e-10).unwrap();
        assert!((alpha - p.abscissa).abs() <= 1e-9, "n = {n}");
    }
}

#[test]
fn perron_vector_is_positive_eigenvector() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..30 {
        let a = irreducible_metzler(&mut rng, 9, 0.2);
        let p = perron_pair(&a, 1e-12).unwrap();
        assert_eq!(p.eigenvector[0], 1.0);
        assert!(p.eigenvector.iter().all(|&v| v > 0.0));
        let r = a.entries() * &p.eigenvector - &p.eigenvector * p.abscissa;
        assert!(r.amax() <= 1e-9 * p.eigenvector.amax());
    }
}

#[test]
fn classification_cases() {
    let cycle = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
    assert_eq!(classify(&cycle).unwrap(), Structure::Irreducible);
    let chain = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.0, -1.0]);
    assert_eq!(classify(&chain).unwrap(), Structure::ReducibleOther);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, 2.0]));
    assert_eq!(
        classify(&diag).unwrap(),
        Structure::CompletelyReducible(vec![vec![0], vec![1]])
    );
    let bad = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    assert_eq!(classify(&bad).unwrap(), Structure::NotMetzler);
}

proptest! {
    #[test]
    fn measures_bound_the_abscissa(a in metzler_strategy(6)) {
        let alpha = eigen_abscissa(&a);
        for norm in [Norm::One, Norm::Two, Norm::Inf] {
            let mu = matrix_measure(&a, norm, None).unwrap();
            prop_assert!(alpha <= mu + 1e-9 * mu.abs().max(1.0), "{norm}: alpha {alpha} > mu {mu}");
        }
    }

    #[test]
    fn gershgorin_row_bound(a in metzler_strategy(6)) {
        let m = MetzlerMatrix::new(a.clone()).unwrap();
        let alpha = abscissa_report(&m, &PerronOptions::default()).unwrap().value;
        let bound = a.row_iter().map(|r| r.sum()).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(alpha <= bound + 1e-12, "{alpha} > {bound}");
    }

    #[test]
    fn measure_shifts_with_identity(a in metzler_strategy(5), c in -10.0..10.0f64) {
        let n = a.nrows();
        let shifted = &a + DMatrix::identity(n, n) * c;
        for norm in [Norm::One, Norm::Two, Norm::Inf] {
            let (m0, m1) = (matrix_measure(&a, norm, None).unwrap(), matrix_measure(&shifted, norm, None).unwrap());
            prop_assert!((m1 - m0 - c).abs() <= 1e-12, "{norm}: {}", m1 - m0 - c);
        }
    }

    #[test]
    fn measure_is_subadditive_and_bounded_by_norm((a, b) in metzler_pair(5)) {
        for norm in [Norm::One, Norm::Two, Norm::Inf] {
            let sum = matrix_measure(&(&a + &b), norm, None).unwrap();
            let parts = matrix_measure(&a, norm, None).unwrap() + matrix_measure(&b, norm, None).unwrap();
            prop_assert!(sum <= parts + 1e-9);
            prop_assert!(matrix_measure(&a, norm, None).unwrap() <= operator_norm(&a, norm, norm) + 1e-9);
        }
    }

    #[test]
    fn metzler_measures_are_monotone(a in metzler_strategy(6), bump in prop::collection::vec(0.0..2.0f64, 36)) {
        let n = a.nrows();
        let b = DMatrix::from_fn(n, n, |i, j| a[(i, j)] + bump[i * n + j]);
        for norm in [Norm::One, Norm::Two, Norm::Inf] {
            prop_assert!(matrix_measure(&a, norm, None).unwrap() <= matrix_measure(&b, norm, None).unwrap() + 1e-12);
        }
    }

    #[test]
    fn scaled_measure_is_similarity(a in metzler_strategy(5), s in prop::collection::vec(0.1..10.0f64, 5)) {
        let n = a.nrows();
        let t = &s[..n];
        let sim = DMatrix::from_fn(n, n, |i, j| t[i] * a[(i, j)] / t[j]);
        for norm in [Norm::One, Norm::Two, Norm::Inf] {
            let direct = matrix_measure(&a, norm, Some(t)).unwrap();
            let via = matrix_measure(&sim, norm, None).unwrap();
            prop_assert!((direct - via).abs() < 1e-9 * via.abs().max(1.0));
        }
    }
}
