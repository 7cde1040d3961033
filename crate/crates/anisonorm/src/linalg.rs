//! Symmetric factorization helpers shared by the analysis modules.
//!
//! Positive definiteness is always decided the same way: a Cholesky-type
//! factorization succeeds with every pivot above `PD_RELATIVE_TOLERANCE`
//! times the max-abs entry of the input. Log-determinants are accumulated
//! from the factor diagonal, never from a raw determinant.

use nalgebra::DMatrix;

use crate::scalar::Scalar;

/// Relative pivot threshold for the positive-definiteness test.
pub(crate) const PD_RELATIVE_TOLERANCE: f64 = 1e-12;

/// Largest absolute entry of a matrix.
pub(crate) fn max_abs<T: Scalar>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

/// Symmetric part (X + Xᵀ)/2.
pub(crate) fn sym_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let half: T = T::from_f64_approx(0.5);
    let mut s = m.transpose();
    s += m;
    s *= half;
    s
}

/// Scale-aware Cholesky factorization of a symmetric matrix.
///
/// Returns the lower factor `L` with `L Lᵀ = m`, or `None` when any pivot
/// falls at or below `PD_RELATIVE_TOLERANCE · max_abs(m)`, which is the
/// crate-wide definition of "not positive definite".
pub(crate) fn cholesky<T: Scalar>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let threshold = T::from_f64_approx(PD_RELATIVE_TOLERANCE) * max_abs(m);
    let mut l = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= threshold {
            return None;
        }
        let root = d.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / root;
        }
    }
    Some(l)
}

/// Log-determinant of the matrix factored as `L Lᵀ`.
pub(crate) fn logdet_from_cholesky<T: Scalar>(l: &DMatrix<T>) -> T {
    let two: T = T::from_f64_approx(2.0);
    let mut acc = T::zero();
    for j in 0..l.nrows() {
        acc += l[(j, j)].ln();
    }
    two * acc
}

/// Solve `(L Lᵀ) X = B` for `X` given the lower Cholesky factor.
pub(crate) fn cholesky_solve<T: Scalar>(l: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    let mut x = b.clone();
    // Forward substitution L Y = B.
    for col in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
        // Back substitution Lᵀ X = Y.
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Inverse of the matrix factored as `L Lᵀ`.
pub(crate) fn inverse_from_cholesky<T: Scalar>(l: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    cholesky_solve(l, &DMatrix::identity(n, n))
}

/// Symmetric positive semidefinite square root via eigen-decomposition.
///
/// Eigenvalues that round slightly negative are clamped to zero, so the
/// result is well defined for numerically PSD inputs.
pub(crate) fn symmetric_sqrt<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let eig = sym_part(m).symmetric_eigen();
    let n = m.nrows();
    let mut scaled = eig.eigenvectors.clone();
    for j in 0..n {
        let root = eig.eigenvalues[j].max(T::zero()).sqrt();
        for i in 0..n {
            scaled[(i, j)] *= root;
        }
    }
    &scaled * eig.eigenvectors.transpose()
}

/// Largest eigenvalue of a symmetric matrix, clamped to be nonnegative.
pub(crate) fn largest_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> T {
    let eig = sym_part(m).symmetric_eigen();
    eig.eigenvalues
        .iter()
        .fold(T::zero(), |acc, &x| acc.max(x))
}

/// Smallest eigenvalue of a symmetric matrix.
pub(crate) fn smallest_eigenvalue<T: Scalar>(m: &DMatrix<T>) -> T {
    let eig = sym_part(m).symmetric_eigen();
    let mut it = eig.eigenvalues.iter();
    let first = *it.next().expect("nonempty matrix");
    it.fold(first, |acc, &x| acc.min(x))
}
