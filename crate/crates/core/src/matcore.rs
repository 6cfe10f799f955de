//! Spectral toolkit for real symmetric matrices.
//!
//! Every matrix function in the crate is evaluated through a symmetric
//! eigendecomposition `m = Q diag(λ) Qᵀ`, including the exponential of the
//! non-symmetric product `B·C`, which is similar to a symmetric matrix via
//! `C^{1/2}`.

use std::ops::Deref;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dim_check, Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative asymmetry accepted (and silently removed) on construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A matrix counts as SPD when `λ_min > SPD_REL_TOL · λ_max`.
pub const SPD_REL_TOL: f64 = 1e-12;

const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// Dense real symmetric matrix.
///
/// Construction averages `m` with its transpose after checking that the
/// largest asymmetry is below [`SYMMETRY_TOL`] relative to the largest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        Self::with_tolerance(m, SYMMETRY_TOL)
    }

    /// Like [`SymMatrix::new`] with a caller-chosen relative asymmetry tolerance.
    pub fn with_tolerance(m: Matrix, rel_tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let scale = m.amax();
        let asymmetry = max_asymmetry(&m);
        let tolerance = rel_tol * scale;
        if asymmetry > tolerance || !asymmetry.is_finite() {
            return Err(Error::NotSymmetric { asymmetry, tolerance });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMatrix(sym))
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(Matrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(Matrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(&Vector::from_column_slice(diag)))
    }

    /// Builds from row-major nested rows, as found in JSON documents.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    /// `l · self · lᵀ`, which is symmetric for any `l` of matching width.
    pub fn congruence(&self, l: &Matrix) -> Result<SymMatrix> {
        dim_check("congruence", self.dim(), l.ncols())?;
        let prod = l * &self.0 * l.transpose();
        SymMatrix::new(prod)
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        dim_check("symmetric sum", self.dim(), other.dim())?;
        Ok(SymMatrix(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        dim_check("symmetric difference", self.dim(), other.dim())?;
        Ok(SymMatrix(&self.0 - &other.0))
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        matrix_to_rows(&self.0)
    }
}

impl Deref for SymMatrix {
    type Target = Matrix;

    fn deref(&self) -> &Matrix {
        &self.0
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

fn max_asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::InvalidParameter("matrix must be non-empty".into()));
    }
    for row in rows {
        dim_check("row length", ncols, row.len())?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("matrix entries must be finite".into()));
        }
    }
    Ok(Matrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomp {
    pub eigenvalues: Vector,
    pub eigenvectors: Matrix,
}

impl SpectralDecomp {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// `Q f(D) Qᵀ`. Fails if `f` is not finite at some eigenvalue.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        let q = &self.eigenvectors;
        let weights = self.mapped(f)?;
        let scaled = scale_columns(q, &weights);
        SymMatrix::new(scaled * q.transpose())
    }

    /// `L Q f(D) Qᵀ Lᵀ` without forming the intermediate `N×N` matrix.
    pub fn apply_congruence(&self, l: &Matrix, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
        dim_check("spectral congruence", self.dim(), l.ncols())?;
        let lq = l * &self.eigenvectors;
        let weights = self.mapped(f)?;
        let scaled = scale_columns(&lq, &weights);
        SymMatrix::new(scaled * lq.transpose())
    }

    fn mapped(&self, f: impl Fn(f64) -> f64) -> Result<Vector> {
        let mut out = Vector::zeros(self.dim());
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let v = f(lambda);
            if !v.is_finite() {
                return Err(Error::Singularity { eigenvalue: lambda });
            }
            out[k] = v;
        }
        Ok(out)
    }

    pub fn reconstruct(&self) -> Matrix {
        scale_columns(&self.eigenvectors, &self.eigenvalues) * self.eigenvectors.transpose()
    }

    /// True when `λ_min > SPD_REL_TOL · λ_max` and `λ_max > 0`.
    pub fn is_spd(&self) -> bool {
        let max = self.max_eigenvalue();
        max > 0.0 && self.min_eigenvalue() > SPD_REL_TOL * max
    }

    /// Number of eigenvalues above the scale-relative SPD threshold.
    pub fn numerical_rank(&self) -> usize {
        let max = self.eigenvalues.amax();
        self.eigenvalues
            .iter()
            .filter(|&&l| l > SPD_REL_TOL * max)
            .count()
    }
}

fn scale_columns(m: &Matrix, weights: &Vector) -> Matrix {
    let mut out = m.clone();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        col *= weights[j];
    }
    out
}

pub fn spectral_decompose(m: &SymMatrix) -> Result<SpectralDecomp> {
    let dim = m.dim();
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or(Error::EigenNoConvergence { dim })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenNoConvergence { dim });
    }
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = Vector::from_iterator(dim, order.iter().map(|&k| eig.eigenvalues[k]));
    let mut eigenvectors = Matrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(src).into_owned();
        // Fix the sign so the largest-magnitude component is positive.
        let pivot = col.iamax();
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(SpectralDecomp {
        eigenvalues,
        eigenvectors,
    })
}

pub fn matrix_function(m: &SymMatrix, f: impl Fn(f64) -> f64) -> Result<SymMatrix> {
    spectral_decompose(m)?.apply(f)
}

/// `e^{-t·m}`.
pub fn expm_scaled(m: &SymMatrix, t: f64) -> Result<SymMatrix> {
    matrix_function(m, |x| (-t * x).exp())
}

pub fn require_spd(what: &str, m: &SymMatrix) -> Result<SpectralDecomp> {
    let decomp = spectral_decompose(m)?;
    if decomp.is_spd() {
        Ok(decomp)
    } else {
        Err(Error::NotPositiveDefinite {
            what: what.to_string(),
            min_eigenvalue: decomp.min_eigenvalue(),
        })
    }
}

pub fn is_spd(m: &SymMatrix) -> Result<bool> {
    Ok(spectral_decompose(m)?.is_spd())
}

/// Inverse of an SPD matrix.
pub fn inverse_spd(m: &SymMatrix) -> Result<SymMatrix> {
    let decomp = spectral_decompose(m)?;
    if !decomp.is_spd() {
        return Err(Error::Singularity {
            eigenvalue: decomp.min_eigenvalue(),
        });
    }
    decomp.apply(|x| 1.0 / x)
}

pub fn sqrtm(m: &SymMatrix) -> Result<SymMatrix> {
    require_spd("square-root argument", m)?.apply(f64::sqrt)
}

/// `m^{-1/2}`; a near-singular argument is reported as a rank deficiency.
pub fn sqrtm_inv(m: &SymMatrix) -> Result<SymMatrix> {
    let decomp = spectral_decompose(m)?;
    if !decomp.is_spd() {
        return Err(Error::RankDeficient {
            rank: decomp.numerical_rank(),
            expected: decomp.dim(),
        });
    }
    decomp.apply(|x| 1.0 / x.sqrt())
}

/// Cached factors for `e^{-t·B·C}` with `C` SPD.
///
/// `B·C = C^{-1/2} S C^{1/2}` with `S = C^{1/2} B C^{1/2}` symmetric, so the
/// exponential reduces to the symmetric eigenproblem of `S`.
#[derive(Debug, Clone)]
pub struct SimilarExp {
    c_half: SymMatrix,
    c_half_inv: SymMatrix,
    s: SpectralDecomp,
}

impl SimilarExp {
    pub fn new(b: &SymMatrix, c: &SymMatrix) -> Result<Self> {
        dim_check("B·C exponential", b.dim(), c.dim())?;
        let c_decomp = require_spd("C", c)?;
        let c_half = c_decomp.apply(f64::sqrt)?;
        let c_half_inv = c_decomp.apply(|x| 1.0 / x.sqrt())?;
        let s = spectral_decompose(&b.congruence(c_half.as_matrix())?)?;
        Ok(SimilarExp {
            c_half,
            c_half_inv,
            s,
        })
    }

    /// Eigenvalues of `B·C` (those of `S`), ascending.
    pub fn eigenvalues(&self) -> &Vector {
        &self.s.eigenvalues
    }

    pub fn c_half(&self) -> &SymMatrix {
        &self.c_half
    }

    /// Decomposition of `S = C^{1/2} B C^{1/2}`.
    pub fn symmetric_part(&self) -> &SpectralDecomp {
        &self.s
    }

    pub fn exp(&self, t: f64) -> Result<Matrix> {
        let inner = self.s.apply(|x| (-t * x).exp())?;
        Ok(self.c_half_inv.as_matrix() * inner.as_matrix() * self.c_half.as_matrix())
    }
}

/// `e^{-t·(b·c)}` for SPD `c`.
pub fn expm_nonsym_similar(b: &SymMatrix, c: &SymMatrix, t: f64) -> Result<Matrix> {
    SimilarExp::new(b, c)?.exp(t)
}

/// Smallest eigenvalue of `a − b`: nonnegative iff `a ≥ b` in Löwner order.
pub fn loewner_margin(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    let diff = a.sub(b)?;
    Ok(spectral_decompose(&diff)?.min_eigenvalue())
}

pub fn loewner_geq(a: &SymMatrix, b: &SymMatrix, tol: f64) -> Result<bool> {
    Ok(loewner_margin(a, b)? >= -tol)
}

pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.norm()
}

/// `‖a − b‖_F / ‖b‖_F`, falling back to the absolute norm when `b` is zero.
pub fn relative_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    let diff = frobenius_norm(&(a - b));
    let scale = frobenius_norm(b);
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}
