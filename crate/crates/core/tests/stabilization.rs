mod common;

use netcontract::matrix::spectral_abscissa;
use netcontract::stabilization::{
    marginal_stability_certificate, minimal_effort_stabilize, stabilize_blockwise, verify_optimality, MARGINAL_TOL,
};
use netcontract::{Error, MetzlerMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{eigen_abscissa, irreducible_metzler};

fn flow() -> MetzlerMatrix {
    MetzlerMatrix::from_row_slice(2, &[-1.0, 1.0, 1.0, -1.0]).unwrap()
}

/// Minimises `w^T l` over `alpha(A - diag l) = target` by compass search on
/// `l = x + s(x) 1`, where `s` shifts `x` onto the boundary. The abscissa is
/// convex in the diagonal, so the search finds the global minimum.
fn compass_oracle(a: &MetzlerMatrix, w: &[f64], target: f64) -> (Vec<f64>, f64) {
    let n = a.dim();
    let total: f64 = w.iter().sum();
    let eval = |x: &[f64]| -> (f64, Vec<f64>) {
        let alpha = eigen_abscissa(a.minus_diagonal(x).unwrap().entries());
        let s = alpha - target;
        let ell: Vec<f64> = x.iter().map(|v| v + s).collect();
        (w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + s * total, ell)
    };
    let mut x = vec![0.0; n];
    let (mut best, mut ell) = eval(&x);
    let mut step = 1.0;
    while step > 1e-11 {
        let mut improved = false;
        for i in 1..n {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step;
                let (c, l) = eval(&y);
                if c < best - 1e-15 {
                    (x, best, ell) = (y, c, l);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (ell, best)
}

#[test]
fn agrees_with_compass_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let n = rng.random_range(2..=4);
        let a = irreducible_metzler(&mut rng, n, 0.5);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..5.0)).collect();
        let target = spectral_abscissa(&a).unwrap() - rng.random_range(0.1..3.0);
        let r = minimal_effort_stabilize(&a, &w, target).unwrap();
        let (ell, cost) = compass_oracle(&a, &w, target);
        assert!((r.cost - cost).abs() < 1e-7 * cost.abs().max(1.0), "{} vs {cost}", r.cost);
        for (got, want) in r.ell_star.iter().zip(&ell) {
            assert!((got - want).abs() < 1e-4, "{:?} vs {ell:?}", r.ell_star.as_slice());
        }
    }
}

#[test]
fn flow_optimality_conditions() {
    let w = [1.0, 4.0];
    let r = minimal_effort_stabilize(&flow(), &w, -1.0).unwrap();
    assert!(r.feasible() && r.positive_gains);
    let rep = verify_optimality(&flow(), &w, -1.0, r.ell_star.as_slice(), 1e-9).unwrap();
    assert!(rep.optimal(), "{rep:?}");

    let over = [r.ell_star[0] + 0.1, r.ell_star[1]];
    let rep = verify_optimality(&flow(), &w, -1.0, &over, 1e-9).unwrap();
    assert!(rep.feasible && !rep.eigen_condition && rep.cost > r.cost);

    let under = [r.ell_star[0] - 0.1, r.ell_star[1]];
    let rep = verify_optimality(&flow(), &w, -1.0, &under, 1e-9).unwrap();
    assert!(!rep.feasible && rep.abscissa > -1.0);
}

#[test]
fn reducible_inputs() {
    let chain = MetzlerMatrix::from_row_slice(2, &[-1.0, 1.0, 0.0, -1.0]).unwrap();
    assert!(matches!(minimal_effort_stabilize(&chain, &[1.0, 1.0], -1.0), Err(Error::NonIrreducible { .. })));

    let blocks = MetzlerMatrix::from_row_slice(
        4,
        &[-1.0, 1.0, 0.0, 0.0, 4.0, -4.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    )
    .unwrap();
    let r = stabilize_blockwise(&blocks, &[1.0, 1.0, 1.0, 1.0], -1.0).unwrap();
    assert!((r.achieved + 1.0).abs() < 1e-9);
    assert!((r.ell_star[2] - 3.0).abs() < 1e-12 && (r.ell_star[3] - 1.0).abs() < 1e-12);
    assert!(stabilize_blockwise(&chain, &[1.0, 1.0], -1.0).is_err());
}

#[test]
fn marginal_certificate_examples() {
    let laplacian = MetzlerMatrix::from_row_slice(2, &[-1.0, 1.0, 1.0, -1.0]).unwrap();
    let cert = marginal_stability_certificate(&laplacian, MARGINAL_TOL).unwrap();
    let d = cert.d.unwrap();
    assert!((d[1] - 1.0).abs() < 1e-9);
    let unstable = MetzlerMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
    assert!(marginal_stability_certificate(&unstable, MARGINAL_TOL).unwrap().d.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gains_shift_with_target(seed in any::<u64>(), n in 2usize..8, shift in -5.0..5.0f64) {
        let a = irreducible_metzler(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.4);
        let w = vec![1.0; n];
        let base = minimal_effort_stabilize(&a, &w, -1.0).unwrap();
        let moved = minimal_effort_stabilize(&a, &w, -1.0 - shift).unwrap();
        for (b, m) in base.ell_star.iter().zip(moved.ell_star.iter()) {
            prop_assert!((m - b - shift).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn gains_ignore_weight_scale(seed in any::<u64>(), n in 2usize..8, k in 0.01..100.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = irreducible_metzler(&mut rng, n, 0.4);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let wk: Vec<f64> = w.iter().map(|v| v * k).collect();
        let (r, rk) = (minimal_effort_stabilize(&a, &w, -2.0).unwrap(), minimal_effort_stabilize(&a, &wk, -2.0).unwrap());
        prop_assert!((&r.ell_star - &rk.ell_star).amax() < 1e-9 * r.ell_star.amax().max(1.0));
    }

    #[test]
    fn result_satisfies_both_conditions(seed in any::<u64>(), n in 2usize..10, u in 0.01..10.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = irreducible_metzler(&mut rng, n, 0.3);
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
        let target = spectral_abscissa(&a).unwrap() - u;
        let r = minimal_effort_stabilize(&a, &w, target).unwrap();
        prop_assert!(r.feasible());
        prop_assert!(r.eigen_residual < 1e-9);
        let rep = verify_optimality(&a, &w, target, r.ell_star.as_slice(), 1e-8).unwrap();
        prop_assert!(rep.optimal(), "{:?}", rep);
    }
}
