//! Spectral abscissa and Perron pairs of Metzler matrices.
//!
//! For irreducible `A`, `S = A + r I` with `r = 1 + max |a_ii|` is nonnegative,
//! irreducible and has a positive diagonal, hence primitive. Power iteration
//! on `S` converges to the Perron vector. Collatz–Wielandt bounds
//! `min_i (Ax)_i / x_i <= alpha(A) <= max_i (Ax)_i / x_i` bracket the
//! abscissa at every step; once the bracket is reasonably tight, inverse
//! iteration on the M-matrix `sigma I - A` (with `sigma` above the bracket)
//! finishes the job in a handful of steps.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{MetzlerMatrix, Structure};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerronOptions {
    /// Residual tolerance, relative to `max(1, max |a_ij|)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PerronOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// Spectral abscissa and positive eigenvector (first entry 1) of an
/// irreducible Metzler matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronPair {
    pub abscissa: f64,
    pub eigenvector: DVector<f64>,
    pub iterations: usize,
    /// `|A d - abscissa d|_inf / |d|_inf`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbscissaReport {
    pub value: f64,
    pub structure: Structure,
    /// Set when the input was neither irreducible nor completely reducible
    /// and the value was taken over strongly connected components.
    pub reducible_fallback: bool,
}

const POWER_WARMUP: usize = 64;
const MAX_INVERSE_STEPS: usize = 60;

fn collatz_wielandt(ax: &DVector<f64>, x: &DVector<f64>) -> (f64, f64) {
    ax.iter()
        .zip(x.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            let r = a / b;
            (lo.min(r), hi.max(r))
        })
}

fn normalize_max(x: &mut DVector<f64>) -> bool {
    let m = x.max();
    if !(m > 0.0 && m.is_finite()) || x.iter().any(|&v| !(v > 0.0)) {
        return false;
    }
    x.unscale_mut(m);
    true
}

/// Core Perron solver; `a` must be irreducible Metzler (not re-checked).
pub(crate) fn perron_irreducible(a: &DMatrix<f64>, opts: &PerronOptions) -> Result<PerronPair> {
    let n = a.nrows();
    if n == 1 {
        return Ok(PerronPair {
            abscissa: a[(0, 0)],
            eigenvector: DVector::from_element(1, 1.0),
            iterations: 0,
            residual: 0.0,
        });
    }
    let scale = a.amax().max(1.0);
    let tol_abs = opts.tol * scale;
    let shift = 1.0 + a.diagonal().amax();

    let mut x = DVector::from_element(n, 1.0);
    let mut ax = a * &x;
    let (mut lo, mut hi) = collatz_wielandt(&ax, &x);
    let mut iterations = 0;
    let mut inverse_steps = 0;
    let mut inverse_enabled = true;

    while (hi - lo) * 0.5 > tol_abs {
        if iterations >= opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: (hi - lo) * 0.5 / scale,
            });
        }
        iterations += 1;

        if inverse_enabled && iterations > POWER_WARMUP && inverse_steps < MAX_INVERSE_STEPS {
            inverse_steps += 1;
            let gap = (hi - lo).max(4.0 * f64::EPSILON * scale);
            let sigma = hi + gap;
            let mut m = -a.clone();
            for i in 0..n {
                m[(i, i)] += sigma;
            }
            let candidate = m.lu().solve(&x).map(|mut y| {
                let ok = normalize_max(&mut y);
                (y, ok)
            });
            match candidate {
                Some((y, true)) => {
                    let ay = a * &y;
                    let (l, h) = collatz_wielandt(&ay, &y);
                    if h - l < hi - lo {
                        x = y;
                        ax = ay;
                        lo = l;
                        hi = h;
                        continue;
                    }
                    inverse_enabled = false;
                }
                _ => inverse_enabled = false,
            }
            continue;
        }

        let mut y = &ax + &x * shift;
        if !normalize_max(&mut y) {
            return Err(Error::NoConvergence {
                iterations,
                residual: f64::NAN,
            });
        }
        x = y;
        ax = a * &x;
        let b = collatz_wielandt(&ax, &x);
        lo = b.0;
        hi = b.1;
    }

    let abscissa = 0.5 * (lo + hi);
    let first = x[0];
    x.unscale_mut(first);
    let r = a * &x - &x * abscissa;
    let residual = r.amax() / x.amax();
    Ok(PerronPair {
        abscissa,
        eigenvector: x,
        iterations,
        residual,
    })
}

/// Perron pair of an irreducible Metzler matrix with the default iteration cap.
pub fn perron_pair(a: &MetzlerMatrix, tol: f64) -> Result<PerronPair> {
    perron_pair_with(
        a,
        &PerronOptions {
            tol,
            ..PerronOptions::default()
        },
    )
}

pub fn perron_pair_with(a: &MetzlerMatrix, opts: &PerronOptions) -> Result<PerronPair> {
    if !a.is_irreducible() {
        return Err(Error::NonIrreducible { hint: "" });
    }
    perron_irreducible(a.entries(), opts)
}

/// Spectral abscissa with structure diagnostics.
///
/// Eigenvalues of a Metzler matrix are the union of those of the diagonal
/// blocks of its Frobenius normal form, so the maximum over strongly
/// connected components is exact for every structure; the fallback flag only
/// records that the input was not completely reducible.
pub fn abscissa_report(a: &MetzlerMatrix, opts: &PerronOptions) -> Result<AbscissaReport> {
    let structure = a.structure().clone();
    let value = match &structure {
        Structure::Irreducible => perron_irreducible(a.entries(), opts)?.abscissa,
        Structure::CompletelyReducible(blocks) => max_over_blocks(a, blocks, opts)?,
        Structure::ReducibleOther => {
            let comps = super::strongly_connected_components(a.entries());
            max_over_blocks(a, &comps, opts)?
        }
        Structure::NotMetzler => unreachable!("MetzlerMatrix is validated"),
    };
    let reducible_fallback = matches!(structure, Structure::ReducibleOther);
    Ok(AbscissaReport {
        value,
        structure,
        reducible_fallback,
    })
}

fn max_over_blocks(a: &MetzlerMatrix, blocks: &[Vec<usize>], opts: &PerronOptions) -> Result<f64> {
    blocks.iter().try_fold(f64::NEG_INFINITY, |acc, idx| {
        let sub = a.principal_submatrix(idx);
        Ok(acc.max(perron_irreducible(sub.entries(), opts)?.abscissa))
    })
}

/// Spectral abscissa `alpha(A)` of a Metzler matrix (default tolerance 1e-10).
pub fn spectral_abscissa(a: &MetzlerMatrix) -> Result<f64> {
    Ok(abscissa_report(a, &PerronOptions::default())?.value)
}
