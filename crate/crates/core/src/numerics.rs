//! Dense complex linear algebra used by the beamformers.
//!
//! Solves go through an LU factorization with partial pivoting; no explicit
//! inverse is ever formed. Orthonormal bases come from a singular value
//! decomposition (rank revealing) or a Householder QR (span preserving).
//! Column phases of every returned basis are arbitrary.

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;

use crate::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative pivot threshold below which a matrix is reported singular.
pub const PIVOT_TOL: f64 = 1e-12;
/// Relative singular value cutoff for numerical rank.
pub const RANK_TOL: f64 = 1e-10;
/// Absolute threshold under which a matrix counts as zero.
pub const ZERO_TOL: f64 = 1e-14;

pub fn max_abs_entry(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest |A[i][j] − conj(A[j][i])|. Infinite for non-square input.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    if !a.is_square() {
        return f64::INFINITY;
    }
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(a: &CMatrix) -> bool {
    hermitian_defect(a) <= 1e-10 * (1.0 + max_abs_entry(a))
}

/// Overwrites the lower triangle with the conjugate of the upper one.
pub fn symmetrize(a: &mut CMatrix) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)].im = 0.0;
        for j in i + 1..n {
            a[(j, i)] = a[(i, j)].conj();
        }
    }
}

/// LU factorization with partial pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuFactor {
    lu: CMatrix,
    perm: Vec<usize>,
}

impl LuFactor {
    /// Factors a square matrix. A pivot smaller than
    /// `PIVOT_TOL · max|A_ij|` is reported as [`Error::SingularMatrix`].
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.nrows(),
                cols: a.ncols(),
            });
        }
        let n = a.nrows();
        let scale = max_abs_entry(a);
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::SingularMatrix);
        }
        let threshold = PIVOT_TOL * scale;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best < threshold {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &CVector) -> Result<CVector> {
        let n = self.dim();
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut x = CVector::from_iterator(n, self.perm.iter().map(|&p| b[p]));
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        Ok(x)
    }

    /// Solves for every column of `b`.
    pub fn solve_columns(&self, b: &CMatrix) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(b.nrows(), b.ncols());
        for (j, col) in b.column_iter().enumerate() {
            out.set_column(j, &self.solve(&col.into_owned())?);
        }
        Ok(out)
    }
}

/// Solves `A·x = b` for Hermitian `A`. Indefinite matrices are fine: the
/// factorization is a pivoted LU, not a Cholesky.
pub fn hermitian_solve(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let defect = hermitian_defect(a);
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    if defect > 1e-10 * (1.0 + max_abs_entry(a)) {
        return Err(Error::NotHermitian(defect));
    }
    LuFactor::new(a)?.solve(b)
}

/// Orthonormal basis of the column space of a matrix.
#[derive(Debug, Clone)]
pub struct RangeBasis {
    /// `rows × rank` matrix with orthonormal columns.
    pub q: CMatrix,
    pub rank: usize,
    /// All singular values in descending order, including those cut off.
    pub singular_values: Vec<f64>,
}

/// Rank-revealing orthonormal basis of `span(A)` via the SVD. Singular
/// values below `RANK_TOL · σ_max` do not count towards the rank.
pub fn orthonormal_range(a: &CMatrix) -> Result<RangeBasis> {
    if a.nrows() == 0 || a.ncols() == 0 || max_abs_entry(a) < ZERO_TOL {
        return Err(Error::ZeroMatrix);
    }
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors were requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let singular_values: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let cutoff = RANK_TOL * singular_values[0];
    let rank = singular_values.iter().filter(|&&s| s > cutoff).count();
    let mut q = CMatrix::zeros(a.nrows(), rank);
    for (dst, &src) in order.iter().take(rank).enumerate() {
        q.set_column(dst, &u.column(src));
    }
    Ok(RangeBasis {
        q,
        rank,
        singular_values,
    })
}

/// Orthonormal basis for the complement of `span(Q)` in `C^ambient_dim`.
/// Errors with [`Error::FullSpace`] when `Q` already has `ambient_dim`
/// columns; see [`orthonormal_complement_or_empty`] for the permissive form.
pub fn orthonormal_complement(q: &CMatrix, ambient_dim: usize) -> Result<CMatrix> {
    if q.ncols() >= ambient_dim {
        return Err(Error::FullSpace(ambient_dim));
    }
    orthonormal_complement_or_empty(q, ambient_dim)
}

/// Same as [`orthonormal_complement`] but returns an `ambient_dim × 0`
/// matrix when the complement is trivial.
pub fn orthonormal_complement_or_empty(q: &CMatrix, ambient_dim: usize) -> Result<CMatrix> {
    if q.nrows() != ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: ambient_dim,
            got: q.nrows(),
        });
    }
    let r = q.ncols();
    if r >= ambient_dim {
        return Ok(CMatrix::zeros(ambient_dim, 0));
    }
    // Householder QR of [Q | I]: the leading r columns of the unitary factor
    // span Q, the trailing ones span its complement.
    let mut augmented = CMatrix::zeros(ambient_dim, r + ambient_dim);
    augmented.view_mut((0, 0), (ambient_dim, r)).copy_from(q);
    augmented
        .view_mut((0, r), (ambient_dim, ambient_dim))
        .fill_with_identity();
    let full = augmented.qr().q();
    Ok(full.columns(r, ambient_dim - r).into_owned())
}

/// Orthonormal basis spanning exactly the columns of `a` (thin Householder
/// QR, no rank truncation). For a square full-rank input the basis is the
/// whole space no matter how ill-conditioned `a` is.
pub fn column_basis(a: &CMatrix) -> Result<CMatrix> {
    if a.ncols() > a.nrows() {
        return Err(Error::BadDimension(format!(
            "{} columns exceed {} rows",
            a.ncols(),
            a.nrows()
        )));
    }
    if max_abs_entry(a) < ZERO_TOL {
        return Err(Error::ZeroMatrix);
    }
    Ok(a.clone().qr().q())
}

/// `xᴴ·A·x`, real part (A Hermitian).
pub fn quadratic_form(a: &CMatrix, x: &CVector) -> f64 {
    x.dotc(&(a * x)).re
}

/// `A + s·I` for square `A`.
pub fn add_scaled_identity(a: &CMatrix, s: f64) -> CMatrix {
    let mut out = a.clone();
    for i in 0..out.nrows().min(out.ncols()) {
        out[(i, i)] += Complex64::new(s, 0.0);
    }
    out
}

/// Adds `s·v·vᴴ` to `a` in place.
pub fn add_outer(a: &mut CMatrix, v: &CVector, s: f64) {
    let n = v.len();
    for j in 0..n {
        let vj = v[j].conj() * s;
        for i in 0..n {
            a[(i, j)] += v[i] * vj;
        }
    }
}

/// Max-entry distance between `QᴴQ` and the identity.
pub fn orthonormality_defect(q: &CMatrix) -> f64 {
    let gram = q.adjoint() * q;
    let eye = CMatrix::identity(q.ncols(), q.ncols());
    max_abs_entry(&(gram - eye))
}
