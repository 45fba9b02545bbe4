//! Minimum-effort diagonal stabilization of irreducible Metzler matrices.
//!
//! Given weights `w > 0` and a target abscissa `eta`, the perturbation
//! minimising `w^T l` subject to `alpha(A - diag(l)) <= eta` is
//!
//! ```text
//! l* = D*^{-1} A D* 1 - eta 1,
//! ```
//!
//! where `D* = diag(d*)` balances `diag(w) A`. The closed loop
//! `A - diag(l*)` then has abscissa `eta` with Perron vector `d*`.

use nalgebra::DVector;
use serde::Serialize;

use crate::balancing::{balance_with, diagonal_similarity, imbalance, BalanceOptions};
use crate::error::{Error, Result};
use crate::matrix::{perron_pair_with, MetzlerMatrix, PerronOptions, Structure};

/// Relative tolerance on `|achieved - target|`.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilizationResult {
    pub ell_star: DVector<f64>,
    /// Perron vector of the closed loop, first entry 1.
    pub d_star: DVector<f64>,
    pub target: f64,
    /// Independently recomputed `alpha(A - diag(ell_star))`.
    pub achieved: f64,
    pub cost: f64,
    pub positive_gains: bool,
    /// `|(A - diag ell*) d* - target d*|_inf / |d*|_inf`.
    pub eigen_residual: f64,
    /// Imbalance reached by the balancing step.
    pub balance_residual: f64,
}

impl StabilizationResult {
    pub fn feasible(&self) -> bool {
        (self.achieved - self.target).abs() <= FEASIBILITY_TOL * (1.0 + self.target.abs())
    }
}

fn check_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w.len(),
        });
    }
    if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    Ok(())
}

/// `(A - diag(ell)) d - target d`, infinity norm relative to `|d|_inf`.
fn eigen_residual(a: &MetzlerMatrix, ell: &[f64], d: &DVector<f64>, target: f64) -> f64 {
    let ad = a.entries() * d;
    let r = ad
        .iter()
        .zip(d.iter())
        .zip(ell)
        .fold(0.0f64, |m, ((adi, di), li)| m.max((adi - li * di - target * di).abs()));
    r / d.amax()
}

/// Solver settings for the independent abscissa check of a computed `ell*`.
const VERIFY_PERRON: PerronOptions = PerronOptions {
    tol: 1e-13,
    max_iter: 100_000,
};

/// Balancing tolerance used by [`minimal_effort_stabilize`]. Gain errors scale
/// with the residual imbalance, so this is tighter than the balancing default.
pub const STABILIZE_BALANCE_TOL: f64 = 1e-13;

/// Minimum-effort stabilization balanced to [`STABILIZE_BALANCE_TOL`], or to
/// the default balancing tolerance if rounding stalls the tighter run.
pub fn minimal_effort_stabilize(a: &MetzlerMatrix, w: &[f64], target: f64) -> Result<StabilizationResult> {
    match minimal_effort_stabilize_with(a, w, target, &BalanceOptions::with_tol(STABILIZE_BALANCE_TOL)) {
        Err(Error::NoConvergence { .. }) => minimal_effort_stabilize_with(a, w, target, &BalanceOptions::default()),
        other => other,
    }
}

pub fn minimal_effort_stabilize_with(
    a: &MetzlerMatrix,
    w: &[f64],
    target: f64,
    opts: &BalanceOptions,
) -> Result<StabilizationResult> {
    let n = a.dim();
    check_weights(w, n)?;
    if !target.is_finite() {
        return Err(Error::InvalidArgument("target must be finite".into()));
    }
    if !a.is_irreducible() {
        return Err(Error::NonIrreducible {
            hint: "; for completely reducible input use stabilize_blockwise",
        });
    }

    let weighted = a.row_scaled(w)?;
    let bal = balance_with(&weighted, opts)?;
    let d = bal.d;
    let scaled = diagonal_similarity(a.entries(), d.as_slice());
    let ell: Vec<f64> = scaled.row_iter().map(|row| row.sum() - target).collect();

    let closed = a.minus_diagonal(&ell)?;
    let achieved = perron_pair_with(&closed, &VERIFY_PERRON)?.abscissa;
    let cost = w.iter().zip(&ell).map(|(wi, li)| wi * li).sum();
    let eigen_residual = eigen_residual(a, &ell, &d, target);
    let positive_gains = ell.iter().all(|&l| l > 0.0);
    Ok(StabilizationResult {
        ell_star: DVector::from_vec(ell),
        d_star: d,
        target,
        achieved,
        cost,
        positive_gains,
        eigen_residual,
        balance_residual: bal.residual,
    })
}

/// Stabilizes each irreducible block of a completely reducible matrix with the
/// same target and reassembles the full perturbation. Each block's `d*` is
/// normalised to 1 on its lowest index; `achieved` is the maximum over blocks.
pub fn stabilize_blockwise(a: &MetzlerMatrix, w: &[f64], target: f64) -> Result<StabilizationResult> {
    let n = a.dim();
    check_weights(w, n)?;
    let blocks = match a.structure() {
        Structure::Irreducible => return minimal_effort_stabilize(a, w, target),
        Structure::CompletelyReducible(b) => b.clone(),
        _ => return Err(Error::NotBalancable),
    };
    let mut ell = DVector::zeros(n);
    let mut d = DVector::zeros(n);
    let mut achieved = f64::NEG_INFINITY;
    let mut eigen_residual: f64 = 0.0;
    let mut balance_residual: f64 = 0.0;
    for idx in &blocks {
        let sub = a.principal_submatrix(idx);
        let wb: Vec<f64> = idx.iter().map(|&i| w[i]).collect();
        let r = minimal_effort_stabilize(&sub, &wb, target)?;
        for (k, &i) in idx.iter().enumerate() {
            ell[i] = r.ell_star[k];
            d[i] = r.d_star[k];
        }
        achieved = achieved.max(r.achieved);
        eigen_residual = eigen_residual.max(r.eigen_residual);
        balance_residual = balance_residual.max(r.balance_residual);
    }
    let cost = w.iter().zip(ell.iter()).map(|(wi, li)| wi * li).sum();
    let positive_gains = ell.iter().all(|&l| l > 0.0);
    Ok(StabilizationResult {
        ell_star: ell,
        d_star: d,
        target,
        achieved,
        cost,
        positive_gains,
        eigen_residual,
        balance_residual,
    })
}

/// Certificate for the marginal-stability test: a positive `d` with `A d <= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalCertificate {
    pub abscissa: f64,
    /// Present iff `abscissa <= tol`.
    pub d: Option<DVector<f64>>,
    /// `max_i (A d)_i / |d|_inf` when `d` is present (at most `tol`).
    pub slack: Option<f64>,
}

/// Default abscissa threshold for [`marginal_stability_certificate`].
pub const MARGINAL_TOL: f64 = 1e-10;

/// Returns the Perron vector as a certificate when `alpha(A) <= tol`.
pub fn marginal_stability_certificate(a: &MetzlerMatrix, tol: f64) -> Result<MarginalCertificate> {
    if !a.is_irreducible() {
        return Err(Error::NonIrreducible { hint: "" });
    }
    let p = perron_pair_with(a, &PerronOptions::default())?;
    if p.abscissa > tol {
        return Ok(MarginalCertificate {
            abscissa: p.abscissa,
            d: None,
            slack: None,
        });
    }
    let ad = a.entries() * &p.eigenvector;
    let slack = ad.max() / p.eigenvector.amax();
    Ok(MarginalCertificate {
        abscissa: p.abscissa,
        d: Some(p.eigenvector),
        slack: Some(slack),
    })
}

/// Pass/fail report of the two optimality conditions for a candidate `ell`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    /// `alpha(A - diag(ell))`.
    pub abscissa: f64,
    /// `alpha <= target` within tolerance.
    pub feasible: bool,
    /// Imbalance of `diag(w) D^{-1} (A - diag ell) D` with `D` the closed-loop
    /// Perron vector.
    pub balance_residual: f64,
    pub balanced: bool,
    /// `|(A - diag ell) d - target d|_inf / |d|_inf`.
    pub eigen_residual: f64,
    pub eigen_condition: bool,
    pub cost: f64,
}

impl OptimalityReport {
    pub fn optimal(&self) -> bool {
        self.feasible && self.balanced && self.eigen_condition
    }
}

/// Checks a candidate perturbation against the optimality conditions.
/// `tol` applies to the balance residual and, relative to `1 + |target|`, to
/// the abscissa/eigen conditions.
pub fn verify_optimality(
    a: &MetzlerMatrix,
    w: &[f64],
    target: f64,
    ell: &[f64],
    tol: f64,
) -> Result<OptimalityReport> {
    let n = a.dim();
    check_weights(w, n)?;
    if ell.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: ell.len(),
        });
    }
    if !a.is_irreducible() {
        return Err(Error::NonIrreducible { hint: "" });
    }
    let closed = a.minus_diagonal(ell)?;
    let p = perron_pair_with(&closed, &PerronOptions::default())?;
    let d = &p.eigenvector;
    let mut scaled = diagonal_similarity(closed.entries(), d.as_slice());
    for (i, wi) in w.iter().enumerate() {
        scaled.row_mut(i).scale_mut(*wi);
    }
    let balance_residual = imbalance(&scaled);
    let eigen_residual = eigen_residual(a, ell, d, target);
    let rel = tol * (1.0 + target.abs());
    Ok(OptimalityReport {
        abscissa: p.abscissa,
        feasible: p.abscissa <= target + rel,
        balance_residual,
        balanced: balance_residual <= tol,
        eigen_residual,
        eigen_condition: eigen_residual <= rel,
        cost: w.iter().zip(ell).map(|(wi, li)| wi * li).sum(),
    })
}
