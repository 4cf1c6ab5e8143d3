//! Small dense complex linear-algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub(crate) fn is_diagonal(m: &DMatrix<Complex64>) -> bool {
    let n = m.nrows();
    for j in 0..m.ncols() {
        for i in 0..n {
            if i != j && m[(i, j)] != Complex64::new(0.0, 0.0) {
                return false;
            }
        }
    }
    true
}

/// Returns `(m + mᴴ) / 2` with a real diagonal, so the result is Hermitian
/// bit-for-bit.
pub(crate) fn hermitian_part(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    let mut out = m.clone();
    for j in 0..n {
        out[(j, j)] = Complex64::new(m[(j, j)].re, 0.0);
        for i in (j + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    out
}

pub(crate) fn eigenvalues(m: &DMatrix<Complex64>) -> DVector<f64> {
    SymmetricEigen::new(m.clone()).eigenvalues
}

/// Solves `m · x = rhs` for Hermitian positive-definite `m`.
pub(crate) fn hpd_solve(m: &DMatrix<Complex64>, rhs: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    hpd_solve_rcond(m, rhs, 0.0)
}

/// As [`hpd_solve`], but also rejects `m` when the squared Cholesky pivots
/// span more than `1 / rcond`.
pub(crate) fn hpd_solve_rcond(
    m: &DMatrix<Complex64>,
    rhs: &DMatrix<Complex64>,
    rcond: f64,
) -> Result<DMatrix<Complex64>> {
    if m.nrows() != rhs.nrows() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: rhs.nrows() });
    }
    if is_diagonal(m) {
        let max = (0..m.nrows()).map(|i| m[(i, i)].re).fold(0.0, f64::max);
        let mut x = rhs.clone();
        for i in 0..m.nrows() {
            let d = m[(i, i)].re;
            if !(d > rcond * max) || !d.is_finite() {
                return Err(Error::Singular(format!("non-positive pivot {d} at index {i}")));
            }
            for j in 0..x.ncols() {
                x[(i, j)] /= d;
            }
        }
        return Ok(x);
    }
    let chol = Cholesky::new(m.clone()).ok_or_else(|| Error::Singular("Cholesky factorization failed".into()))?;
    let pivots: Vec<f64> = chol.l_dirty().diagonal().iter().map(|z| z.norm_sqr()).collect();
    let max = pivots.iter().copied().fold(0.0, f64::max);
    let min = pivots.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > rcond * max) {
        return Err(Error::Singular(format!("ill-conditioned system (pivot ratio {:e})", min / max)));
    }
    Ok(chol.solve(rhs))
}

pub(crate) fn trace(m: &DMatrix<Complex64>) -> f64 {
    (0..m.nrows()).map(|i| m[(i, i)].re).sum()
}

/// `tr(a · b · aᴴ)` for Hermitian `b`.
pub(crate) fn sandwich_trace(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    if is_diagonal(a) && is_diagonal(b) {
        return (0..a.nrows()).map(|i| a[(i, i)].norm_sqr() * b[(i, i)].re).sum();
    }
    let ab = a * b;
    // tr(X Aᴴ) = Σ_ij X_ij conj(A_ij)
    ab.iter().zip(a.iter()).map(|(x, y)| (x * y.conj()).re).sum()
}

pub(crate) fn frobenius(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
