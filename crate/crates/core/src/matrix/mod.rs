//! Dense Metzler matrices: validation, structural classification, spectral
//! abscissa and Perron pairs, and matrix measures.

mod graph;
mod measure;
mod spectral;

use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

pub use graph::{is_strongly_connected, strongly_connected_components, STRUCTURAL_ZERO};
pub use measure::{matrix_measure, operator_norm, scaled_operator_norm, vector_norm, Norm};
pub use spectral::{
    abscissa_report, perron_pair, perron_pair_with, spectral_abscissa, AbscissaReport,
    PerronOptions, PerronPair,
};

/// Graph-structure class of a square matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Structure {
    NotMetzler,
    Irreducible,
    /// Index sets of the irreducible diagonal blocks, each sorted.
    CompletelyReducible(Vec<Vec<usize>>),
    ReducibleOther,
}

pub(crate) fn check_square(a: &DMatrix<f64>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

fn first_negative_offdiag(a: &DMatrix<f64>) -> Option<(usize, usize, f64)> {
    let n = a.nrows();
    for j in 0..n {
        for i in 0..n {
            let v = a[(i, j)];
            if i != j && (v.is_nan() || v <= -STRUCTURAL_ZERO) {
                return Some((i, j, v));
            }
        }
    }
    None
}

fn structure_of_metzler(a: &DMatrix<f64>) -> Structure {
    let components = strongly_connected_components(a);
    if components.len() == 1 {
        Structure::Irreducible
    } else if graph::has_cross_edges(a, &components) {
        Structure::ReducibleOther
    } else {
        Structure::CompletelyReducible(components)
    }
}

/// Classifies a square matrix by sign pattern and graph structure.
pub fn classify(a: &DMatrix<f64>) -> Result<Structure> {
    check_square(a)?;
    if first_negative_offdiag(a).is_some() {
        return Ok(Structure::NotMetzler);
    }
    Ok(structure_of_metzler(a))
}

/// Square matrix with a validated Metzler sign pattern.
///
/// The structural classification is computed on first use and cached.
#[derive(Debug, Clone)]
pub struct MetzlerMatrix {
    entries: DMatrix<f64>,
    structure: OnceLock<Structure>,
}

impl MetzlerMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        check_square(&entries)?;
        if let Some((row, col, value)) = first_negative_offdiag(&entries) {
            return Err(Error::NotMetzler { row, col, value });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(Self {
            entries,
            structure: OnceLock::new(),
        })
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.entries
    }

    /// One of `Irreducible`, `CompletelyReducible` or `ReducibleOther`.
    pub fn structure(&self) -> &Structure {
        self.structure
            .get_or_init(|| structure_of_metzler(&self.entries))
    }

    pub fn is_irreducible(&self) -> bool {
        matches!(self.structure(), Structure::Irreducible)
    }

    /// Principal submatrix on `indices` (in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> MetzlerMatrix {
        let k = indices.len();
        let sub = DMatrix::from_fn(k, k, |r, c| self.entries[(indices[r], indices[c])]);
        MetzlerMatrix {
            entries: sub,
            structure: OnceLock::new(),
        }
    }

    /// `A - diag(ell)`; stays Metzler.
    pub fn minus_diagonal(&self, ell: &[f64]) -> Result<MetzlerMatrix> {
        if ell.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: ell.len(),
            });
        }
        let mut m = self.entries.clone();
        for (i, l) in ell.iter().enumerate() {
            m[(i, i)] -= l;
        }
        MetzlerMatrix::new(m)
    }

    /// `diag(w) * A` for positive `w`; keeps the sign pattern and graph.
    pub fn row_scaled(&self, w: &[f64]) -> Result<MetzlerMatrix> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument("weights must be positive".into()));
        }
        let mut m = self.entries.clone();
        for (i, wi) in w.iter().enumerate() {
            m.row_mut(i).scale_mut(*wi);
        }
        MetzlerMatrix::new(m)
    }
}

impl TryFrom<DMatrix<f64>> for MetzlerMatrix {
    type Error = Error;

    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        MetzlerMatrix::new(m)
    }
}
