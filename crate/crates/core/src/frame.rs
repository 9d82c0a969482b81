//! Finite frames in `ℝ^d` and their spectral invariants.
//!
//! A [`Frame`] stores its synthesis matrix `T` (vectors as columns). The frame
//! operator is `S = T Tᵀ`; the optimal frame bounds are its extreme
//! eigenvalues and the optimal Riesz bounds are those of the Gram matrix
//! `Tᵀ T`. Vectors are kept exactly as given: nothing is normalized.
//!
//! Indices are 0-based in this API; reports render them 1-based.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{self, positivity_threshold, rank_nullspace, Matrix, SpdPower, DEFAULT_RANK_TOL};

/// Entrywise tolerance for `T_Φ T_Ψᵀ = I`.
pub const DUALITY_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FrameRepr", into = "FrameRepr")]
pub struct Frame {
    synthesis: Matrix,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRepr {
    dim: usize,
    vectors: Vec<Vec<f64>>,
}

impl TryFrom<FrameRepr> for Frame {
    type Error = Error;
    fn try_from(r: FrameRepr) -> Result<Self> {
        Frame::new(r.dim, &r.vectors)
    }
}

impl From<Frame> for FrameRepr {
    fn from(f: Frame) -> Self {
        FrameRepr { dim: f.dim(), vectors: f.vectors() }
    }
}

impl std::fmt::Debug for Frame {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Frame").field("dim", &self.dim()).field("vectors", &self.vectors()).finish()
    }
}

/// Optimal lower and upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsReport {
    pub lower: f64,
    pub upper: f64,
}

impl BoundsReport {
    /// Lower bound clears the positivity threshold.
    pub fn is_positive(&self) -> bool {
        self.lower > positivity_threshold(self.upper)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcessReport {
    pub excess: usize,
    /// Greedy left-to-right basis of the span (0-based).
    pub riesz_indices: Vec<usize>,
    pub redundant_indices: Vec<usize>,
}

impl Frame {
    /// Builds a frame in `ℝ^dim` from its vectors.
    pub fn new<V: AsRef<[f64]>>(dim: usize, vectors: &[V]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("frame dimension must be at least 1".into()));
        }
        if vectors.is_empty() {
            return Err(Error::InvalidParameter("a frame needs at least one vector".into()));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.as_ref().len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "vector {i} has {} components, expected {dim}",
                    v.as_ref().len()
                )));
            }
        }
        Frame::from_synthesis(Matrix::from_columns(dim, vectors)?)
    }

    pub fn from_synthesis(synthesis: Matrix) -> Result<Self> {
        if synthesis.rows() == 0 || synthesis.cols() == 0 {
            return Err(Error::InvalidParameter(format!(
                "synthesis matrix must be non-empty, got {}x{}",
                synthesis.rows(),
                synthesis.cols()
            )));
        }
        Ok(Frame { synthesis })
    }

    /// The standard basis of `ℝ^dim`.
    pub fn orthonormal_basis(dim: usize) -> Self {
        Frame { synthesis: Matrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.synthesis.rows()
    }

    pub fn len(&self) -> usize {
        self.synthesis.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.synthesis.column(i)
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.vector(i)).collect()
    }

    /// `T_Φ`, the `d × n` matrix with `φᵢ` as column `i`.
    pub fn synthesis(&self) -> &Matrix {
        &self.synthesis
    }

    /// `T_Φᵀ`.
    pub fn analysis(&self) -> Matrix {
        self.synthesis.transpose()
    }

    /// `S_Φ = T_Φ T_Φᵀ`.
    pub fn frame_operator(&self) -> Matrix {
        self.synthesis.outer_gram()
    }

    /// Gram matrix `T_Φᵀ T_Φ`.
    pub fn gram(&self) -> Matrix {
        self.synthesis.inner_gram()
    }

    pub fn bounds(&self) -> Result<BoundsReport> {
        let (lower, upper) = numerics::extreme_eigenvalues(&self.frame_operator())?;
        Ok(BoundsReport { lower, upper })
    }

    pub fn is_frame(&self) -> Result<bool> {
        Ok(self.bounds()?.is_positive())
    }

    /// Bounds, or [`Error::NotAFrame`] when the lower bound is not positive.
    pub fn frame_bounds_checked(&self) -> Result<BoundsReport> {
        let b = self.bounds()?;
        if b.is_positive() {
            Ok(b)
        } else {
            Err(Error::NotAFrame { lower: b.lower, upper: b.upper })
        }
    }

    /// Extreme eigenvalues of the Gram matrix.
    pub fn riesz_bounds(&self) -> Result<BoundsReport> {
        let (lower, upper) = numerics::extreme_eigenvalues(&self.gram())?;
        Ok(BoundsReport { lower, upper })
    }

    pub fn is_riesz_basis(&self) -> Result<bool> {
        Ok(self.len() == self.dim() && self.riesz_bounds()?.is_positive())
    }

    pub fn rank(&self) -> Result<usize> {
        Ok(rank_nullspace(&self.synthesis, DEFAULT_RANK_TOL)?.rank)
    }

    /// Excess `n - rank(T)`, with a greedy left-to-right basis of the span.
    pub fn excess(&self) -> Result<ExcessReport> {
        let full = rank_nullspace(&self.synthesis, DEFAULT_RANK_TOL)?;
        let sigma_max = full.singular_values.first().copied().unwrap_or(0.0);
        let cutoff = DEFAULT_RANK_TOL * sigma_max;

        let mut riesz = Vec::with_capacity(full.rank);
        let mut redundant = Vec::new();
        for i in 0..self.len() {
            if riesz.len() == full.rank {
                redundant.push(i);
                continue;
            }
            let mut candidate = riesz.clone();
            candidate.push(i);
            let sub = self.synthesis.select_columns(&candidate);
            let independent = sigma_max > 0.0
                && rank_nullspace(&sub, DEFAULT_RANK_TOL)?
                    .singular_values
                    .iter()
                    .all(|&s| s > cutoff);
            if independent {
                riesz.push(i);
            } else {
                redundant.push(i);
            }
        }
        Ok(ExcessReport { excess: redundant.len(), riesz_indices: riesz, redundant_indices: redundant })
    }

    /// The frame `{Aφᵢ}` for a `d × d` operator `A`.
    pub fn apply(&self, op: &Matrix) -> Result<Frame> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operator is {}x{}, frame lives in dimension {}",
                op.rows(),
                op.cols(),
                self.dim()
            )));
        }
        Frame::from_synthesis(op * &self.synthesis)
    }

    /// `{c·φᵢ}`.
    pub fn scaled(&self, c: f64) -> Frame {
        Frame { synthesis: self.synthesis.scale(c) }
    }

    /// `{aᵢ·φᵢ}`.
    pub fn scaled_elementwise(&self, scalars: &[f64]) -> Result<Frame> {
        if scalars.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} scalars for {} vectors",
                scalars.len(),
                self.len()
            )));
        }
        let mut t = self.synthesis.clone();
        for (j, &a) in scalars.iter().enumerate() {
            for i in 0..self.dim() {
                t[(i, j)] *= a;
            }
        }
        Frame::from_synthesis(t)
    }

    /// Sub-family on the given indices.
    pub fn select(&self, indices: &[usize]) -> Result<Frame> {
        Frame::from_synthesis(self.synthesis.select_columns(indices))
    }

    /// `S_Φ^p` for the supported exponents. Fails unless `Φ` is a frame.
    pub fn frame_operator_power(&self, power: SpdPower) -> Result<Matrix> {
        numerics::spd_power(&self.frame_operator(), power).map_err(|e| match e {
            Error::NotPositiveDefinite { .. } => match self.bounds() {
                Ok(b) => Error::NotAFrame { lower: b.lower, upper: b.upper },
                Err(e) => e,
            },
            other => other,
        })
    }

    pub fn same_shape(&self, other: &Frame) -> Result<()> {
        if self.dim() != other.dim() || self.len() != other.len() {
            return Err(Error::DimensionMismatch(format!(
                "frames have shapes {}x{} and {}x{}",
                self.dim(),
                self.len(),
                other.dim(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Whether `f = Σ ⟨f, ψᵢ⟩ φᵢ` for all `f`, i.e. `T_Φ T_Ψᵀ = I`.
    pub fn is_dual_of(&self, other: &Frame) -> Result<bool> {
        verify_duality(self, other)
    }
}

/// `T_Φ T_Ψᵀ = I` within [`DUALITY_TOL`] entrywise.
pub fn verify_duality(phi: &Frame, psi: &Frame) -> Result<bool> {
    phi.same_shape(psi)?;
    let product = phi.synthesis() * &psi.analysis();
    Ok(product.approx_eq(&Matrix::identity(phi.dim()), DUALITY_TOL))
}
