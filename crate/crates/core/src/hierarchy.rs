//! Hierarchical contraction for networks of subsystems.
//!
//! A state `x = (x^1, ..., x^m)` is measured with a per-block norm `|.|_i`
//! and a monotonic outer norm. The block bound matrix `B` has the block
//! measures `mu_i(A^ii)` on its diagonal and induced norms `|A^ij|_ij`
//! elsewhere; it is Metzler and `mu(A) <= mu_0(B)`. Replacing `B` by a
//! constant upper bound `J_hat` over the state space turns gain design into
//! minimum-effort stabilization of `J_hat`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{
    matrix_measure, perron_pair_with, scaled_operator_norm, vector_norm, MetzlerMatrix, Norm,
    PerronOptions, STRUCTURAL_ZERO,
};
use crate::stabilization::minimal_effort_stabilize;

/// Norm used on one block, optionally scaled: `|z| = |diag(t) z|_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockNorm {
    pub norm: Norm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<Vec<f64>>,
}

impl BlockNorm {
    pub fn plain(norm: Norm) -> Self {
        Self {
            norm,
            scaling: None,
        }
    }

    pub fn scaled(norm: Norm, scaling: Vec<f64>) -> Self {
        Self {
            norm,
            scaling: Some(scaling),
        }
    }

    pub fn apply(&self, z: &[f64]) -> f64 {
        match &self.scaling {
            Some(t) => {
                let s: Vec<f64> = z.iter().zip(t).map(|(a, b)| a * b).collect();
                vector_norm(&s, self.norm)
            }
            None => vector_norm(z, self.norm),
        }
    }
}

/// Partition of `R^n` into `m` consecutive blocks with a norm per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPartition {
    sizes: Vec<usize>,
    norms: Vec<BlockNorm>,
}

impl BlockPartition {
    pub fn new(sizes: Vec<usize>, norms: Vec<BlockNorm>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must be positive".into()));
        }
        if norms.len() != sizes.len() {
            return Err(Error::DimensionMismatch {
                expected: sizes.len(),
                got: norms.len(),
            });
        }
        for (s, bn) in sizes.iter().zip(&norms) {
            if let Some(t) = &bn.scaling {
                if t.len() != *s {
                    return Err(Error::DimensionMismatch {
                        expected: *s,
                        got: t.len(),
                    });
                }
                if t.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                    return Err(Error::InvalidArgument("block scalings must be positive".into()));
                }
            }
        }
        Ok(Self { sizes, norms })
    }

    pub fn uniform(sizes: Vec<usize>, norm: Norm) -> Result<Self> {
        let norms = vec![BlockNorm::plain(norm); sizes.len()];
        Self::new(sizes, norms)
    }

    /// All blocks 1x1.
    pub fn scalar(n: usize) -> Self {
        Self {
            sizes: vec![1; n],
            norms: vec![BlockNorm::plain(Norm::Inf); n],
        }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn norms(&self) -> &[BlockNorm] {
        &self.norms
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.sizes.len());
        let mut acc = 0;
        for s in &self.sizes {
            off.push(acc);
            acc += s;
        }
        off
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: n,
            });
        }
        Ok(())
    }

    /// Per-block norms `(|x^1|_1, ..., |x^m|_m)`.
    pub fn block_norms(&self, x: &[f64]) -> Vec<f64> {
        self.offsets()
            .iter()
            .zip(&self.sizes)
            .zip(&self.norms)
            .map(|((&o, &s), bn)| bn.apply(&x[o..o + s]))
            .collect()
    }
}

/// Block bound matrix: `B_ii = mu_i(A^ii)`, `B_ij = |A^ij|_ij`.
pub fn block_bound_matrix(a: &DMatrix<f64>, partition: &BlockPartition) -> Result<MetzlerMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    partition.check_dim(a.nrows())?;
    let m = partition.num_blocks();
    let off = partition.offsets();
    let sizes = partition.sizes();
    let norms = partition.norms();
    let mut b = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let block = a.view((off[i], off[j]), (sizes[i], sizes[j])).into_owned();
            b[(i, j)] = if i == j {
                matrix_measure(&block, norms[i].norm, norms[i].scaling.as_deref())?
            } else {
                scaled_operator_norm(
                    &block,
                    norms[j].norm,
                    norms[j].scaling.as_deref(),
                    norms[i].norm,
                    norms[i].scaling.as_deref(),
                )?
            };
        }
    }
    MetzlerMatrix::new(b)
}

/// Axis-aligned box in state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl StateBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument("box needs lower <= upper".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    /// Supremum estimated from below by sampling; not a proof.
    Sampled { samples: usize, domain: StateBox },
}

/// Constant Metzler bound on the block bound matrix over a region and time.
#[derive(Debug, Clone)]
pub struct JacobianBound {
    pub j_hat: MetzlerMatrix,
    pub provenance: Provenance,
}

impl JacobianBound {
    pub fn closed_form(j_hat: MetzlerMatrix) -> Self {
        Self {
            j_hat,
            provenance: Provenance::ClosedForm,
        }
    }

    pub fn certified(&self) -> bool {
        matches!(self.provenance, Provenance::ClosedForm)
    }
}

/// Default number of random interior samples for [`jacobian_sup_estimate`].
pub const DEFAULT_SAMPLES: usize = 10_000;
/// Corners are enumerated only up to this state dimension.
const MAX_CORNER_DIM: usize = 12;

/// Estimates `J_hat` by the elementwise maximum of the block bound matrix over
/// sampled states and times: the box center, its corners (dimension <= 12)
/// and `samples` uniform points, each evaluated at every time in `t_grid`
/// (or at `t = 0` if the grid is empty).
pub fn jacobian_sup_estimate<F>(
    jacobian: F,
    partition: &BlockPartition,
    domain: &StateBox,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<JacobianBound>
where
    F: Fn(f64, &[f64]) -> DMatrix<f64>,
{
    partition.check_dim(domain.dim())?;
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let times: &[f64] = if t_grid.is_empty() { &[0.0] } else { t_grid };
    let dim = domain.dim();
    let mut points = vec![domain.center()];
    if dim <= MAX_CORNER_DIM {
        for mask in 0u32..(1u32 << dim) {
            points.push(
                (0..dim)
                    .map(|k| if mask >> k & 1 == 1 { domain.upper[k] } else { domain.lower[k] })
                    .collect(),
            );
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        points.push(
            (0..dim)
                .map(|k| {
                    let (l, u) = (domain.lower[k], domain.upper[k]);
                    if l == u {
                        l
                    } else {
                        rng.random_range(l..=u)
                    }
                })
                .collect(),
        );
    }

    let m = partition.num_blocks();
    let mut j_hat = DMatrix::from_element(m, m, f64::NEG_INFINITY);
    for &t in times {
        for x in &points {
            let jac = jacobian(t, x);
            let b = block_bound_matrix(&jac, partition)?;
            j_hat.zip_apply(b.entries(), |acc, v| *acc = acc.max(v));
        }
    }
    Ok(JacobianBound {
        j_hat: MetzlerMatrix::new(j_hat)?,
        provenance: Provenance::Sampled {
            samples: points.len() * times.len(),
            domain: domain.clone(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSynthesisResult {
    /// Constant local gains `u_i = v_i`.
    pub v_star: DVector<f64>,
    /// Certified contraction rate.
    pub rate: f64,
    pub cost: f64,
    /// `alpha(J_hat - diag(v_star))`, equal to `-rate`.
    pub closed_loop_abscissa: f64,
    /// Balancing scaling of `diag(w) J_hat` (Perron vector of the closed loop).
    pub d: DVector<f64>,
    /// Whether `J_hat + eta I >= 0` held. When it does not, the gains are
    /// returned only if they still came out strictly positive.
    pub hypothesis_holds: bool,
}

/// `Ok(None)` when `J_hat + eta I >= 0`, otherwise the first violation.
fn gain_hypothesis(j_hat: &MetzlerMatrix, eta: f64) -> Result<Option<String>> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument("rate must be positive".into()));
    }
    let m = j_hat.entries();
    Ok((0..j_hat.dim())
        .find(|&i| m[(i, i)] + eta < -STRUCTURAL_ZERO)
        .map(|i| format!("J_hat + eta I >= 0 fails at ({i}, {i}): {} + {eta} < 0", m[(i, i)])))
}

fn enforce_positive(violation: Option<String>, v: &DVector<f64>) -> Result<bool> {
    match violation {
        None => Ok(true),
        Some(msg) if v.iter().any(|&x| !(x > 0.0)) => Err(Error::HypothesisViolated(format!(
            "{msg}; resulting gains are not all positive"
        ))),
        Some(_) => Ok(false),
    }
}

/// Minimum-cost positive constant gains making `J_hat - diag(v)` have
/// abscissa `-eta`.
pub fn synthesize_gains(j_hat: &MetzlerMatrix, w: &[f64], eta: f64) -> Result<GainSynthesisResult> {
    let violation = gain_hypothesis(j_hat, eta)?;
    let r = minimal_effort_stabilize(j_hat, w, -eta)?;
    let hypothesis_holds = enforce_positive(violation, &r.ell_star)?;
    Ok(GainSynthesisResult {
        rate: eta,
        cost: r.cost,
        closed_loop_abscissa: r.achieved,
        v_star: r.ell_star,
        d: r.d_star,
        hypothesis_holds,
    })
}

/// Closed-form gains for an irreducible tridiagonal `J_hat`: each node cancels
/// its own diagonal term plus the geometric mean coupling to each neighbour.
pub fn tridiagonal_gains(j_hat: &MetzlerMatrix, eta: f64) -> Result<DVector<f64>> {
    // Validates the band structure and couplings.
    crate::balancing::balance_tridiagonal(j_hat)?;
    let violation = gain_hypothesis(j_hat, eta)?;
    let m = j_hat.entries();
    let n = j_hat.dim();
    let link = |i: usize| (m[(i, i + 1)] * m[(i + 1, i)]).sqrt();
    let v = DVector::from_fn(n, |i, _| {
        let mut v = eta + m[(i, i)];
        if i + 1 < n {
            v += link(i);
        }
        if i > 0 {
            v += link(i - 1);
        }
        v
    });
    enforce_positive(violation, &v)?;
    Ok(v)
}

/// Composite norm `|x| = max_i |x^i|_i / p_i`, with `p` the Perron vector of an
/// irreducible bound matrix `B`. Its outer weighted infinity-norm induces
/// `mu_0(B) = alpha(B)`, so `mu(A) <= alpha(B)` for the composite measure.
#[derive(Debug, Clone)]
pub struct PerronWeightedNorm {
    partition: BlockPartition,
    weights: DVector<f64>,
    abscissa: f64,
}

impl PerronWeightedNorm {
    pub fn from_bound(b: &MetzlerMatrix, partition: BlockPartition) -> Result<Self> {
        if b.dim() != partition.num_blocks() {
            return Err(Error::DimensionMismatch {
                expected: partition.num_blocks(),
                got: b.dim(),
            });
        }
        let p = perron_pair_with(b, &PerronOptions::default())?;
        Ok(Self {
            partition,
            weights: p.eigenvector,
            abscissa: p.abscissa,
        })
    }

    /// `alpha(B)`: the certified growth rate in this norm.
    pub fn abscissa(&self) -> f64 {
        self.abscissa
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        self.partition
            .block_norms(x)
            .iter()
            .zip(self.weights.iter())
            .fold(0.0, |m, (v, p)| m.max(v / p))
    }
}
