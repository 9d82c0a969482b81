//! Dense real linear algebra for the small matrices frame computations need.
//!
//! Everything here works on a row-major [`Matrix`] of `f64`. The symmetric
//! eigensolver is a cyclic Jacobi iteration and the rank/null-space routine is
//! a one-sided (Hestenes) Jacobi SVD, which keeps tiny singular values
//! accurate instead of squaring them through a Gram product.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;
/// Off-diagonal Frobenius norm, relative to the input norm, at which the
/// eigensolver stops.
pub const EIG_CONVERGENCE: f64 = 1e-14;
/// Maximum relative asymmetry accepted by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Default relative singular-value cutoff for [`rank_nullspace`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Absolute part of the positive-definiteness / frame decision threshold.
pub const ABS_TOL: f64 = 1e-12;
/// Relative part of the positive-definiteness / frame decision threshold.
pub const REL_TOL: f64 = 1e-10;

/// Smallest eigenvalue that still counts as strictly positive, given the
/// largest eigenvalue of the same operator.
pub fn positivity_threshold(lambda_max: f64) -> f64 {
    ABS_TOL + REL_TOL * lambda_max.max(0.0)
}

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixRepr {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl TryFrom<MatrixRepr> for Matrix {
    type Error = Error;
    fn try_from(r: MatrixRepr) -> Result<Self> {
        Matrix::from_row_major(r.rows, r.cols, r.entries)
    }
}

impl From<Matrix> for MatrixRepr {
    fn from(m: Matrix) -> Self {
        MatrixRepr { rows: m.rows, cols: m.cols, entries: m.data }
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {pos} is {}", data[pos])));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::from_row_major(rows.len(), cols, data)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(rows: usize, columns: &[C]) -> Result<Self> {
        let mut m = Matrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(Error::ShapeMismatch(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            for (i, &v) in c.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("column {j}, entry {i} is {v}")));
                }
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        assert_eq!(values.len(), self.rows, "column length mismatch");
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Sub-matrix made of the listed columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(self.rows, indices.len());
        for (k, &j) in indices.iter().enumerate() {
            for i in 0..self.rows {
                m[(i, k)] = self[(i, j)];
            }
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * c).collect() }
    }

    /// `A Aᵀ`, filled symmetrically.
    pub fn outer_gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v: f64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    /// `Aᵀ A`, filled symmetrically.
    pub fn inner_gram(&self) -> Matrix {
        let mut g = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in i..self.cols {
                let mut v = 0.0;
                for k in 0..self.rows {
                    v += self[(k, i)] * self[(k, j)];
                }
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        g
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn approx_eq(&self, other: &Matrix, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols) && self.max_abs_diff(other) <= tol
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Maximum entrywise asymmetry `|m_ij - m_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix sum shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix difference shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Eigenvalues in ascending order with unit eigenvectors as matching columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// `V diag(f(λ)) Vᵀ`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)]).sum();
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }
}

fn check_symmetric(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "symmetric eigenproblem needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let asym = m.asymmetry();
    if asym > SYMMETRY_TOL * m.max_abs() {
        return Err(Error::NonSymmetric { asymmetry: asym });
    }
    let n = m.rows;
    let mut s = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    Ok(s)
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on a symmetrized copy. Returns the diagonalized matrix and,
/// when requested, the accumulated rotations.
fn jacobi(a: &mut Matrix, mut v: Option<&mut Matrix>) -> Result<()> {
    let n = a.rows;
    let target = EIG_CONVERGENCE * a.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(a) <= target {
            return Ok(());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r == p || r == q {
                        continue;
                    }
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    let new_rp = c * arp - s * arq;
                    let new_rq = s * arp + c * arq;
                    a[(r, p)] = new_rp;
                    a[(p, r)] = new_rp;
                    a[(r, q)] = new_rq;
                    a[(q, r)] = new_rq;
                }
                if let Some(v) = v.as_deref_mut() {
                    for r in 0..n {
                        let vrp = v[(r, p)];
                        let vrq = v[(r, q)];
                        v[(r, p)] = c * vrp - s * vrq;
                        v[(r, q)] = s * vrp + c * vrq;
                    }
                }
            }
        }
    }
    if off_diagonal_norm(a) <= target {
        Ok(())
    } else {
        Err(Error::NoConvergence { sweeps: MAX_SWEEPS })
    }
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]).then(i.cmp(&j)));
    order
}

/// Flips `column` of `m` so its first clearly nonzero entry is positive.
fn normalize_sign(m: &mut Matrix, column: usize) {
    let first = (0..m.rows).map(|i| m[(i, column)]).find(|v| v.abs() > 1e-12);
    if matches!(first, Some(v) if v < 0.0) {
        for i in 0..m.rows {
            m[(i, column)] = -m[(i, column)];
        }
    }
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
pub fn sym_eig(m: &Matrix) -> Result<SpectralDecomposition> {
    let mut a = check_symmetric(m)?;
    let n = a.rows;
    let mut v = Matrix::identity(n);
    jacobi(&mut a, Some(&mut v))?;
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let order = ascending_order(&diag);
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut eigenvectors = v.select_columns(&order);
    for j in 0..n {
        normalize_sign(&mut eigenvectors, j);
    }
    Ok(SpectralDecomposition { eigenvalues, eigenvectors })
}

/// Eigenvalues only, ascending. Same iteration as [`sym_eig`] without
/// accumulating rotations.
pub fn sym_eigvals(m: &Matrix) -> Result<Vec<f64>> {
    let mut a = check_symmetric(m)?;
    jacobi(&mut a, None)?;
    let mut diag: Vec<f64> = (0..a.rows).map(|i| a[(i, i)]).collect();
    diag.sort_by(f64::total_cmp);
    Ok(diag)
}

/// Extreme eigenvalues `(λ_min, λ_max)` of a symmetric matrix.
pub fn extreme_eigenvalues(m: &Matrix) -> Result<(f64, f64)> {
    let vals = sym_eigvals(m)?;
    Ok((vals.first().copied().unwrap_or(0.0), vals.last().copied().unwrap_or(0.0)))
}

/// Spectral norm: the largest singular value, `sqrt(λ_max(MᵀM))`.
pub fn operator_norm(m: &Matrix) -> Result<f64> {
    if m.rows == 0 || m.cols == 0 {
        return Ok(0.0);
    }
    // MᵀM and MMᵀ share their nonzero spectrum; use the smaller one.
    let gram = if m.rows <= m.cols { m.outer_gram() } else { m.inner_gram() };
    let (_, max) = extreme_eigenvalues(&gram)?;
    Ok(max.max(0.0).sqrt())
}

/// Exponents supported by [`spd_power`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpdPower {
    Inverse,
    Sqrt,
    InverseSqrt,
}

impl SpdPower {
    pub fn exponent(self) -> f64 {
        match self {
            SpdPower::Inverse => -1.0,
            SpdPower::Sqrt => 0.5,
            SpdPower::InverseSqrt => -0.5,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            SpdPower::Inverse => 1.0 / x,
            SpdPower::Sqrt => x.sqrt(),
            SpdPower::InverseSqrt => 1.0 / x.sqrt(),
        }
    }
}

impl TryFrom<f64> for SpdPower {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        if p == -1.0 {
            Ok(SpdPower::Inverse)
        } else if p == 0.5 {
            Ok(SpdPower::Sqrt)
        } else if p == -0.5 {
            Ok(SpdPower::InverseSqrt)
        } else {
            Err(Error::InvalidParameter(format!("unsupported SPD exponent {p}")))
        }
    }
}

/// `V diag(λ^p) Vᵀ` for a symmetric positive definite matrix.
pub fn spd_power(m: &Matrix, power: SpdPower) -> Result<Matrix> {
    let eig = sym_eig(m)?;
    if eig.min() <= positivity_threshold(eig.max()) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: eig.min() });
    }
    Ok(eig.reconstruct_with(|l| power.apply(l)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankNullspace {
    pub rank: usize,
    /// Orthonormal kernel basis as columns (`cols × (cols - rank)`).
    pub null_basis: Matrix,
    /// Singular values in descending order (length `cols`, padded with zeros
    /// when `cols > rows`).
    pub singular_values: Vec<f64>,
}

/// Numerical rank and an orthonormal null-space basis.
///
/// A singular value counts toward the rank when it exceeds
/// `tol_rel * σ_max`.
pub fn rank_nullspace(m: &Matrix, tol_rel: f64) -> Result<RankNullspace> {
    if !(tol_rel > 0.0 && tol_rel < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "rank tolerance must lie in (0, 1), got {tol_rel}"
        )));
    }
    let n = m.cols;
    let (sigma, v) = one_sided_jacobi(m)?;
    let sigma_max = sigma.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = tol_rel * sigma_max;
    let null_cols: Vec<usize> = if sigma_max == 0.0 {
        (0..n).collect()
    } else {
        (0..n).filter(|&j| sigma[j] <= cutoff).collect()
    };
    let rank = n - null_cols.len();
    let mut null_basis = v.select_columns(&null_cols);
    for j in 0..null_basis.cols {
        normalize_sign(&mut null_basis, j);
    }
    let mut singular_values = sigma;
    singular_values.sort_by(|a, b| b.total_cmp(a));
    Ok(RankNullspace { rank, null_basis, singular_values })
}

/// Orthogonalizes the columns of `m` by plane rotations, returning the column
/// norms of `m V` and the accumulated orthogonal `V`.
fn one_sided_jacobi(m: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let (rows, n) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut v = Matrix::identity(n);
    let negligible = {
        let f = f64::EPSILON * m.frobenius_norm();
        f * f
    };
    let col_dot = |a: &Matrix, p: usize, q: usize| -> f64 { (0..rows).map(|i| a[(i, p)] * a[(i, q)]).sum() };

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = col_dot(&a, p, p);
                let beta = col_dot(&a, q, q);
                if alpha <= negligible || beta <= negligible {
                    continue;
                }
                let gamma = col_dot(&a, p, q);
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    a[(i, p)] = c * ap - s * aq;
                    a[(i, q)] = s * ap + c * aq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }
    let sigma = (0..n).map(|j| col_dot(&a, j, j).sqrt()).collect();
    Ok((sigma, v))
}
