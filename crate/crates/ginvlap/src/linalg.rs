//! Deterministic dense self-adjoint eigensolves.
//!
//! Thin wrappers over a dense eigensolver that (a) pin the backend to
//! sequential execution so results are bitwise independent of the thread
//! count, and (b) orient every eigenvector deterministically: the entry of
//! largest magnitude (first such index on ties) is made real and positive.
//! Eigenvalues are returned in nondecreasing order.

use std::sync::Once;

use faer::{Mat, Side};
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

fn pin_sequential() {
    static ONCE: Once = Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

fn check_square_finite<T, F: Fn(&T) -> bool>(m: &DMatrix<T>, finite: F) -> Result<usize> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::dimension(format!(
            "eigensolve needs a nonempty square matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !m.iter().all(finite) {
        return Err(Error::numeric("matrix has a non-finite entry"));
    }
    Ok(n)
}

/// Rotates each column so its largest-magnitude entry is real positive.
pub(crate) fn fix_phases(vectors: &mut DMatrix<Complex64>) {
    let (n, cols) = (vectors.nrows(), vectors.ncols());
    for j in 0..cols {
        let mut best = 0usize;
        let mut best_norm = 0.0f64;
        for i in 0..n {
            let a = vectors[(i, j)].norm_sqr();
            if a > best_norm {
                best_norm = a;
                best = i;
            }
        }
        if best_norm > 0.0 {
            let z = vectors[(best, j)];
            let phase = z / z.norm();
            let rot = phase.conj();
            for i in 0..n {
                vectors[(i, j)] *= rot;
            }
        }
    }
}

/// Flips each column so its largest-magnitude entry is positive.
pub(crate) fn fix_signs(vectors: &mut DMatrix<f64>) {
    let (n, cols) = (vectors.nrows(), vectors.ncols());
    for j in 0..cols {
        let mut best = 0usize;
        let mut best_norm = 0.0f64;
        for i in 0..n {
            let a = vectors[(i, j)].abs();
            if a > best_norm {
                best_norm = a;
                best = i;
            }
        }
        if vectors[(best, j)] < 0.0 {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
}

/// Full eigendecomposition of a Hermitian matrix (lower triangle is read).
///
/// Returns `(eigenvalues ascending, eigenvectors as columns)` with the
/// deterministic orientation of [`fix_phases`].
pub(crate) fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    pin_sequential();
    let n = check_square_finite(m, |z| z.re.is_finite() && z.im.is_finite())?;
    let a = Mat::<faer::c64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numeric(format!("eigendecomposition failed to converge: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().map(|z| z.re).collect();
    let u = evd.U();
    let mut vectors = DMatrix::from_fn(n, n, |i, j| *u.get(i, j));
    fix_phases(&mut vectors);
    Ok((values, vectors))
}

/// Full eigendecomposition of a real symmetric matrix (lower triangle is
/// read), with deterministic column signs.
pub(crate) fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    pin_sequential();
    let n = check_square_finite(m, |x| x.is_finite())?;
    let a = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::numeric(format!("eigendecomposition failed to converge: {e:?}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    let u = evd.U();
    let mut vectors = DMatrix::from_fn(n, n, |i, j| *u.get(i, j));
    fix_signs(&mut vectors);
    Ok((values, vectors))
}
