//! Diagonal similarity scaling of Metzler matrices to balanced form.
//!
//! A matrix is balanced when every off-diagonal row sum equals the matching
//! off-diagonal column sum. For an irreducible Metzler `A` there is a
//! positive `d`, unique up to scale, such that `D^{-1} A D` is balanced; it
//! minimises the convex potential `f(d) = 1^T D^{-1} A D 1`. We find it with
//! Osborne-style cyclic coordinate updates, each of which solves the row `i`
//! balance equation exactly and decreases `f`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{MetzlerMatrix, Structure, STRUCTURAL_ZERO};

const D_MIN: f64 = 1e-150;
const D_MAX: f64 = 1e150;
/// Sweeps without any residual improvement before giving up.
const STALL_SWEEPS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct BalanceOptions {
    pub tol: f64,
    pub max_sweeps: usize,
    /// Starting scaling; defaults to all ones.
    pub initial: Option<Vec<f64>>,
}

impl Default for BalanceOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_sweeps: 100_000,
            initial: None,
        }
    }
}

impl BalanceOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancingResult {
    /// Positive scaling with `d[0] = 1` (per irreducible block).
    pub d: DVector<f64>,
    /// `D^{-1} A D`.
    pub balanced: DMatrix<f64>,
    pub iterations: usize,
    /// Final [`imbalance`] of `balanced`.
    pub residual: f64,
    /// Some scaling entry hit the `[1e-150, 1e150]` clamp.
    pub clamped: bool,
}

fn offdiag_sums(a: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = a.nrows();
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for j in 0..n {
        for i in 0..n {
            if i != j {
                let v = a[(i, j)];
                rows[i] += v;
                cols[j] += v;
            }
        }
    }
    (rows, cols)
}

/// Normalised imbalance
/// `max_i |r_i - c_i| / (1 + max_i (|r_i| + |c_i|))` over off-diagonal row
/// sums `r` and column sums `c`. Zero exactly when the matrix is balanced.
///
/// Panics if `a` is not square.
pub fn imbalance(a: &DMatrix<f64>) -> f64 {
    assert!(a.is_square(), "imbalance needs a square matrix");
    let (rows, cols) = offdiag_sums(a);
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for (r, c) in rows.iter().zip(&cols) {
        num = num.max((r - c).abs());
        den = den.max(r.abs() + c.abs());
    }
    num / (1.0 + den)
}

/// `D^{-1} A D` for `D = diag(d)`. The diagonal is copied exactly.
pub fn diagonal_similarity(a: &DMatrix<f64>, d: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        if i == j {
            a[(i, i)]
        } else {
            a[(i, j)] * d[j] / d[i]
        }
    })
}

fn check_positive(d: &[f64], n: usize) -> Result<()> {
    if d.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.len(),
        });
    }
    if d.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(
            "scaling vector must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// Potential `f(d) = sum_ij a_ij d_j / d_i`, homogeneous of degree zero and
/// minimised exactly at the balancing scalings.
pub fn potential(a: &MetzlerMatrix, d: &[f64]) -> Result<f64> {
    let n = a.dim();
    check_positive(d, n)?;
    let m = a.entries();
    let mut f = 0.0;
    for j in 0..n {
        for i in 0..n {
            f += m[(i, j)] * d[j] / d[i];
        }
    }
    Ok(f)
}

/// Log-parameterised potential `f~(g) = sum_ij a_ij exp(g_j - g_i)`, convex in `g`.
pub fn log_potential(a: &MetzlerMatrix, g: &[f64]) -> f64 {
    let m = a.entries();
    let n = a.dim();
    let mut f = 0.0;
    for j in 0..n {
        for i in 0..n {
            f += m[(i, j)] * (g[j] - g[i]).exp();
        }
    }
    f
}

/// Gradient of [`log_potential`]: component `k` is the off-diagonal column
/// sum minus the row sum of `exp(-G) A exp(G)`. It vanishes iff the scaled
/// matrix is balanced.
pub fn log_potential_gradient(a: &MetzlerMatrix, g: &[f64]) -> DVector<f64> {
    let d: Vec<f64> = g.iter().map(|v| v.exp()).collect();
    let (rows, cols) = offdiag_sums(&diagonal_similarity(a.entries(), &d));
    DVector::from_iterator(a.dim(), cols.iter().zip(&rows).map(|(c, r)| c - r))
}

struct BlockOutcome {
    d: Vec<f64>,
    sweeps: usize,
    clamped: bool,
}

/// Osborne iteration on one irreducible block (`m` already extracted).
fn osborne(m: &DMatrix<f64>, mut d: Vec<f64>, opts: &BalanceOptions) -> Result<BlockOutcome> {
    let n = m.nrows();
    if n == 1 {
        return Ok(BlockOutcome {
            d: vec![1.0],
            sweeps: 0,
            clamped: false,
        });
    }
    let mut clamped = false;
    let mut best = imbalance(&diagonal_similarity(m, &d));
    let mut since_improvement = 0;
    let mut sweeps = 0;
    while best > opts.tol {
        if sweeps >= opts.max_sweeps || since_improvement >= STALL_SWEEPS {
            return Err(Error::NoConvergence {
                iterations: sweeps,
                residual: best,
            });
        }
        sweeps += 1;
        for i in 0..n {
            // Row i of D^{-1} A D sums to R / d_i, column i to d_i * C.
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    r += m[(i, j)] * d[j];
                    c += m[(j, i)] / d[j];
                }
            }
            if r > 0.0 && c > 0.0 {
                let next = (r / c).sqrt();
                let bounded = next.clamp(D_MIN, D_MAX);
                clamped |= bounded != next;
                d[i] = bounded;
            }
        }
        let res = imbalance(&diagonal_similarity(m, &d));
        if res < best {
            best = res;
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
    }
    let d0 = d[0];
    d.iter_mut().for_each(|v| *v /= d0);
    Ok(BlockOutcome { d, sweeps, clamped })
}

/// Balances `a` to tolerance `tol` starting from `d = 1`.
pub fn balance(a: &MetzlerMatrix, tol: f64) -> Result<BalancingResult> {
    balance_with(a, &BalanceOptions::with_tol(tol))
}

/// Balances an irreducible or completely reducible Metzler matrix. Completely
/// reducible inputs are balanced block by block, each block normalised so its
/// lowest index has scaling 1.
pub fn balance_with(a: &MetzlerMatrix, opts: &BalanceOptions) -> Result<BalancingResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let n = a.dim();
    let init = match &opts.initial {
        Some(v) => {
            check_positive(v, n)?;
            v.clone()
        }
        None => vec![1.0; n],
    };
    let blocks: Vec<Vec<usize>> = match a.structure() {
        Structure::Irreducible => vec![(0..n).collect()],
        Structure::CompletelyReducible(b) => b.clone(),
        _ => return Err(Error::NotBalancable),
    };

    let mut d = vec![1.0; n];
    let mut iterations = 0;
    let mut clamped = false;
    for idx in &blocks {
        let sub = a.principal_submatrix(idx);
        let start: Vec<f64> = idx.iter().map(|&i| init[i]).collect();
        let out = osborne(sub.entries(), start, opts)?;
        for (k, &i) in idx.iter().enumerate() {
            d[i] = out.d[k];
        }
        iterations = iterations.max(out.sweeps);
        clamped |= out.clamped;
    }
    let balanced = diagonal_similarity(a.entries(), &d);
    let residual = imbalance(&balanced);
    Ok(BalancingResult {
        d: DVector::from_vec(d),
        balanced,
        iterations,
        residual,
        clamped,
    })
}

/// Closed-form balancing scaling of an irreducible tridiagonal Metzler
/// matrix: `d_1 = 1`, `d_{i+1} = d_i * sqrt(a_{i+1,i} / a_{i,i+1})`, which
/// makes `D^{-1} A D` symmetric.
pub fn balance_tridiagonal(a: &MetzlerMatrix) -> Result<DVector<f64>> {
    let n = a.dim();
    let m = a.entries();
    for j in 0..n {
        for i in 0..n {
            if i.abs_diff(j) > 1 && m[(i, j)].abs() >= STRUCTURAL_ZERO {
                return Err(Error::NotTridiagonal(format!(
                    "entry ({i}, {j}) = {} outside the tridiagonal band",
                    m[(i, j)]
                )));
            }
        }
    }
    let mut d = DVector::from_element(n, 1.0);
    for i in 0..n.saturating_sub(1) {
        let (up, down) = (m[(i, i + 1)], m[(i + 1, i)]);
        if up < STRUCTURAL_ZERO || down < STRUCTURAL_ZERO {
            return Err(Error::NotTridiagonal(format!(
                "zero coupling between {i} and {}",
                i + 1
            )));
        }
        d[i + 1] = d[i] * (down / up).sqrt();
    }
    Ok(d)
}
