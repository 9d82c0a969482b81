//! Dual frames of a finite frame.
//!
//! Every dual of `Φ` has the form `{S⁻¹φᵢ + uᵢ}` where the synthesis matrix of
//! `U` annihilates the analysis operator of `Φ`, i.e. `T_U T_Φᵀ = 0`. Writing
//! `W` for an orthonormal basis of `ker T_Φ`, the admissible `U` are exactly
//! `T_U = M Wᵀ` for an arbitrary `d × excess` coefficient matrix `M`, so the
//! constraint holds by construction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{Frame, DUALITY_TOL};
use crate::numerics::{self, rank_nullspace, Matrix, SpdPower, DEFAULT_RANK_TOL};
use crate::rng::SeededRng;

/// A sequence `U = {uᵢ}` together with its optimal Bessel bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationSequence {
    synthesis: Matrix,
    bessel_bound: f64,
}

impl PerturbationSequence {
    /// Wraps an arbitrary synthesis matrix. No admissibility check.
    pub fn from_synthesis(synthesis: Matrix) -> Result<Self> {
        let bessel_bound = bessel_bound_of(&synthesis)?;
        Ok(PerturbationSequence { synthesis, bessel_bound })
    }

    /// Wraps `T_U` after checking `T_U T_Φᵀ = 0` against `parent`.
    pub fn admissible_for(parent: &Frame, synthesis: Matrix) -> Result<Self> {
        let u = Self::from_synthesis(synthesis)?;
        u.check_admissible(parent)?;
        Ok(u)
    }

    pub fn zeros(dim: usize, count: usize) -> Self {
        PerturbationSequence { synthesis: Matrix::zeros(dim, count), bessel_bound: 0.0 }
    }

    pub fn from_frame(f: &Frame) -> Result<Self> {
        Self::from_synthesis(f.synthesis().clone())
    }

    pub fn dim(&self) -> usize {
        self.synthesis.rows()
    }

    pub fn len(&self) -> usize {
        self.synthesis.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.synthesis.cols() == 0
    }

    pub fn synthesis(&self) -> &Matrix {
        &self.synthesis
    }

    pub fn vectors(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.synthesis.column(i)).collect()
    }

    /// `λ_max(T_U T_Uᵀ)`.
    pub fn bessel_bound(&self) -> f64 {
        self.bessel_bound
    }

    /// `max |T_U T_Φᵀ|` entrywise.
    pub fn residual(&self, parent: &Frame) -> Result<f64> {
        if parent.dim() != self.dim() || parent.len() != self.len() {
            return Err(Error::DimensionMismatch(format!(
                "perturbation is {}x{}, frame is {}x{}",
                self.dim(),
                self.len(),
                parent.dim(),
                parent.len()
            )));
        }
        Ok((&self.synthesis * &parent.analysis()).max_abs())
    }

    pub fn check_admissible(&self, parent: &Frame) -> Result<()> {
        let residual = self.residual(parent)?;
        if residual > DUALITY_TOL {
            return Err(Error::InadmissiblePerturbation { residual });
        }
        Ok(())
    }

    pub fn is_admissible(&self, parent: &Frame) -> Result<bool> {
        Ok(self.residual(parent)? <= DUALITY_TOL)
    }

    /// `{ε uᵢ}`; the Bessel bound scales by `ε²`.
    pub fn scaled(&self, eps: f64) -> Self {
        PerturbationSequence { synthesis: self.synthesis.scale(eps), bessel_bound: eps * eps * self.bessel_bound }
    }
}

fn bessel_bound_of(t: &Matrix) -> Result<f64> {
    if t.cols() == 0 {
        return Ok(0.0);
    }
    Ok(numerics::extreme_eigenvalues(&t.outer_gram())?.1.max(0.0))
}

/// `{εuᵢ}`.
pub fn scale_perturbation(u: &PerturbationSequence, eps: f64) -> Result<PerturbationSequence> {
    if !eps.is_finite() {
        return Err(Error::NonFinite(format!("scaling factor {eps}")));
    }
    Ok(u.scaled(eps))
}

/// A frame with its canonical dual and a basis for all admissible perturbations.
#[derive(Debug, Clone, PartialEq)]
pub struct DualFamily {
    pub parent: Frame,
    pub canonical: Frame,
    /// Orthonormal columns spanning `ker T_Φ` (`n × excess`).
    pub perturbation_basis: Matrix,
}

impl DualFamily {
    pub fn excess(&self) -> usize {
        self.perturbation_basis.cols()
    }

    /// Shape `(d, excess)` expected by [`make_dual`].
    pub fn coeff_shape(&self) -> (usize, usize) {
        (self.parent.dim(), self.excess())
    }
}

/// `{S⁻¹φᵢ}`.
pub fn canonical_dual(phi: &Frame) -> Result<Frame> {
    phi.apply(&phi.frame_operator_power(SpdPower::Inverse)?)
}

/// `{S^{-1/2}φᵢ}`, a Parseval frame.
pub fn canonical_parseval(phi: &Frame) -> Result<Frame> {
    phi.apply(&phi.frame_operator_power(SpdPower::InverseSqrt)?)
}

pub fn perturbation_space(phi: &Frame) -> Result<DualFamily> {
    let canonical = canonical_dual(phi)?;
    let null = rank_nullspace(phi.synthesis(), DEFAULT_RANK_TOL)?;
    Ok(DualFamily { parent: phi.clone(), canonical, perturbation_basis: null.null_basis })
}

/// The dual `{S⁻¹φᵢ + uᵢ}` with `T_U = coeffs · Wᵀ`.
pub fn make_dual(family: &DualFamily, coeffs: &Matrix) -> Result<(Frame, PerturbationSequence)> {
    let (d, k) = family.coeff_shape();
    if coeffs.rows() != d || coeffs.cols() != k {
        return Err(Error::ShapeMismatch(format!(
            "coefficient matrix is {}x{}, expected {d}x{k}",
            coeffs.rows(),
            coeffs.cols()
        )));
    }
    let u_syn = if k == 0 {
        Matrix::zeros(d, family.parent.len())
    } else {
        coeffs * &family.perturbation_basis.transpose()
    };
    let dual = Frame::from_synthesis(family.canonical.synthesis() + &u_syn)?;
    Ok((dual, PerturbationSequence::from_synthesis(u_syn)?))
}

/// Coefficients drawn row-major, i.i.d. uniform on `[-scale, scale]`.
pub fn random_coeffs(rows: usize, cols: usize, rng: &mut SeededRng, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.symmetric(scale)).collect();
    Matrix::from_row_major(rows, cols, data).expect("finite samples")
}

/// A seeded random member of the dual family.
pub fn random_dual(phi: &Frame, seed: u64, scale: f64) -> Result<(Frame, PerturbationSequence)> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale must be finite and non-negative, got {scale}")));
    }
    let family = perturbation_space(phi)?;
    let (d, k) = family.coeff_shape();
    let coeffs = random_coeffs(d, k, &mut SeededRng::new(seed), scale);
    make_dual(&family, &coeffs)
}

/// `U = Φᵈ − S⁻¹Φ` for a given dual `Φᵈ`.
pub fn perturbation_of(phi: &Frame, dual: &Frame) -> Result<PerturbationSequence> {
    phi.same_shape(dual)?;
    let canonical = canonical_dual(phi)?;
    PerturbationSequence::from_synthesis(dual.synthesis() - canonical.synthesis())
}
