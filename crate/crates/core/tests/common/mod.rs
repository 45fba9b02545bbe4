#![allow(dead_code)]

use nalgebra::DMatrix;
use netcontract::MetzlerMatrix;
use rand::Rng;

/// Random irreducible Metzler matrix: a random Hamiltonian cycle guarantees
/// strong connectivity, extra edges appear with probability `density`.
pub fn irreducible_metzler<R: Rng>(rng: &mut R, n: usize, density: f64) -> MetzlerMatrix {
    let mut m = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    for k in 0..n {
        let (i, j) = (order[k], order[(k + 1) % n]);
        if i != j {
            m[(i, j)] = rng.random_range(0.1..2.0);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && m[(i, j)] == 0.0 && rng.random_bool(density) {
                m[(i, j)] = rng.random_range(0.0..2.0);
            }
        }
        m[(i, i)] = rng.random_range(-5.0..5.0);
    }
    MetzlerMatrix::new(m).expect("generated matrix is Metzler")
}

/// Random Metzler matrix without any connectivity guarantee.
pub fn metzler<R: Rng>(rng: &mut R, n: usize, density: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            rng.random_range(-5.0..5.0)
        } else if rng.random_bool(density) {
            rng.random_range(0.0..3.0)
        } else {
            0.0
        }
    })
}

/// Irreducible tridiagonal Metzler matrix with nonnegative diagonal.
pub fn tridiagonal<R: Rng>(rng: &mut R, n: usize) -> MetzlerMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = rng.random_range(0.0..3.0);
        if i + 1 < n {
            m[(i, i + 1)] = rng.random_range(0.1..5.0);
            m[(i + 1, i)] = rng.random_range(0.1..5.0);
        }
    }
    MetzlerMatrix::new(m).unwrap()
}

/// Largest real part over all eigenvalues, by a dense eigensolver.
pub fn eigen_abscissa(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
