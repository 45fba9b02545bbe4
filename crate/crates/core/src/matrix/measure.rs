//! Vector norms, induced operator norms and matrix measures (logarithmic
//! norms) for the 1, 2 and infinity norms, optionally diagonally scaled.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vector norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    One,
    Two,
    Inf,
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "one" | "l1" => Ok(Norm::One),
            "2" | "two" | "l2" => Ok(Norm::Two),
            "inf" | "infinity" | "linf" | "∞" => Ok(Norm::Inf),
            other => Err(Error::Parse(format!("unknown norm '{other}'"))),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::One => "1",
            Norm::Two => "2",
            Norm::Inf => "inf",
        })
    }
}

pub fn vector_norm(x: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::One => x.iter().map(|v| v.abs()).sum(),
        Norm::Two => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
        Norm::Inf => x.iter().fold(0.0, |m, v| m.max(v.abs())),
    }
}

pub(crate) fn validate_scaling(t: &[f64], n: usize) -> Result<()> {
    if t.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: t.len(),
        });
    }
    if t.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(
            "scaling entries must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// `T A S^{-1}` for diagonal `T` (rows) and `S` (columns).
pub(crate) fn diag_similarity(a: &DMatrix<f64>, rows: Option<&[f64]>, cols: Option<&[f64]>) -> DMatrix<f64> {
    let mut m = a.clone();
    if let Some(t) = rows {
        for (i, ti) in t.iter().enumerate() {
            m.row_mut(i).scale_mut(*ti);
        }
    }
    if let Some(s) = cols {
        for (j, sj) in s.iter().enumerate() {
            m.column_mut(j).unscale_mut(*sj);
        }
    }
    m
}

fn largest_symmetric_eigenvalue(s: DMatrix<f64>) -> f64 {
    if s.nrows() == 1 {
        return s[(0, 0)];
    }
    s.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Matrix measure of `a` induced by `norm`; with `scaling = Some(t)` the
/// measure induced by `|x| = |diag(t) x|`, i.e. the measure of `T A T^{-1}`.
pub fn matrix_measure(a: &DMatrix<f64>, norm: Norm, scaling: Option<&[f64]>) -> Result<f64> {
    let n = super::check_square(a)?;
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let scaled;
    let m = match scaling {
        Some(t) => {
            validate_scaling(t, n)?;
            scaled = diag_similarity(a, Some(t), Some(t));
            &scaled
        }
        None => a,
    };
    let value = match norm {
        Norm::Inf => (0..n)
            .map(|i| {
                m[(i, i)]
                    + (0..n)
                        .filter(|&j| j != i)
                        .map(|j| m[(i, j)].abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
        Norm::One => (0..n)
            .map(|j| {
                m[(j, j)]
                    + (0..n)
                        .filter(|&i| i != j)
                        .map(|i| m[(i, j)].abs())
                        .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max),
        Norm::Two => largest_symmetric_eigenvalue((m + m.transpose()) * 0.5),
    };
    Ok(value)
}

/// Dimension up to which hypercube-vertex enumeration is used for the mixed
/// norms that have no closed form.
const ENUMERATION_LIMIT: usize = 16;

fn max_over_sign_vectors(a: &DMatrix<f64>, codomain: Norm) -> f64 {
    // sup over the unit infinity-ball is attained at a vertex; s and -s give
    // the same value so the last sign is pinned.
    let k = a.ncols();
    let mut best: f64 = 0.0;
    let mut s = DVector::from_element(k, 1.0);
    for mask in 0u32..(1u32 << (k - 1)) {
        for (b, si) in s.iter_mut().enumerate().take(k - 1) {
            *si = if mask >> b & 1 == 1 { -1.0 } else { 1.0 };
        }
        let y = a * &s;
        best = best.max(vector_norm(y.as_slice(), codomain));
    }
    best
}

/// Operator norm `sup |A z|_to / |z|_from`.
///
/// Exact for every pair except `inf -> 1`, `inf -> 2` and `2 -> 1` on
/// dimensions above 16, where a standard upper bound is returned instead.
pub fn operator_norm(a: &DMatrix<f64>, from: Norm, to: Norm) -> f64 {
    let (rows, cols) = a.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let row_norm = |i: usize, p: Norm| {
        let r: Vec<f64> = a.row(i).iter().copied().collect();
        vector_norm(&r, p)
    };
    match (from, to) {
        // Extreme points of the 1-ball are the signed unit vectors.
        (Norm::One, p) => (0..cols)
            .map(|j| vector_norm(a.column(j).as_slice(), p))
            .fold(0.0, f64::max),
        // Row-wise dual norms.
        (Norm::Two, Norm::Inf) => (0..rows).map(|i| row_norm(i, Norm::Two)).fold(0.0, f64::max),
        (Norm::Inf, Norm::Inf) => (0..rows).map(|i| row_norm(i, Norm::One)).fold(0.0, f64::max),
        (Norm::Two, Norm::Two) => a.singular_values().iter().copied().fold(0.0, f64::max),
        (Norm::Inf, p) => {
            if cols <= ENUMERATION_LIMIT {
                max_over_sign_vectors(a, p)
            } else {
                let sums: Vec<f64> = (0..rows).map(|i| row_norm(i, Norm::One)).collect();
                vector_norm(&sums, p)
            }
        }
        (Norm::Two, Norm::One) => {
            // Dual pair: |A|_{2->1} = |A^T|_{inf->2}.
            if rows <= ENUMERATION_LIMIT {
                max_over_sign_vectors(&a.transpose(), Norm::Two)
            } else {
                (0..rows).map(|i| row_norm(i, Norm::Two)).sum()
            }
        }
    }
}

/// Operator norm between diagonally scaled norms
/// `|z|_from = |diag(t_from) z|` and `|y|_to = |diag(t_to) y|`.
pub fn scaled_operator_norm(
    a: &DMatrix<f64>,
    from: Norm,
    from_scaling: Option<&[f64]>,
    to: Norm,
    to_scaling: Option<&[f64]>,
) -> Result<f64> {
    if let Some(t) = to_scaling {
        validate_scaling(t, a.nrows())?;
    }
    if let Some(s) = from_scaling {
        validate_scaling(s, a.ncols())?;
    }
    let m = diag_similarity(a, to_scaling, from_scaling);
    Ok(operator_norm(&m, from, to))
}
