//! Classical (non-invariant) graph Laplacian baseline.
//!
//! The scalar affinity `W_ij = exp(−‖x_i − x_j‖²/ε)` ignores the group
//! action entirely; it serves as the reference the invariant construction
//! is compared against. Degrees, the unnormalized Laplacian `D − W`, and
//! the normalized one `I − D^{−1/2} W D^{−1/2}` (with eigenvectors reported
//! in random-walk gauge `D^{−1/2} u`) mirror the invariant API.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{fix_signs, symmetric_eigen};
use crate::su2::Dataset;

/// Scalar Gaussian affinity matrix with its degrees.
#[derive(Debug, Clone)]
pub struct StandardGl {
    epsilon: f64,
    weights: DMatrix<f64>,
    degrees: Vec<f64>,
}

/// Eigendecomposition of a classical graph Laplacian.
#[derive(Debug, Clone)]
pub struct StandardEigen {
    /// True for the normalized (random-walk) problem.
    pub normalized: bool,
    /// Eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, aligned with the eigenvalues.
    pub eigenvectors: DMatrix<f64>,
}

/// Squared ambient distance between two complex coordinate vectors.
pub(crate) fn dist_sq(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum()
}

/// Builds the scalar affinity `W_ij = exp(−‖x_i − x_j‖²/ε)`.
///
/// # Errors
///
/// [`Error::InvalidArgument`] for a non-positive bandwidth or empty dataset.
pub fn standard_affinity(data: &Dataset, epsilon: f64) -> Result<StandardGl> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "kernel bandwidth must be positive and finite, got {epsilon}"
        )));
    }
    if data.is_empty() {
        return Err(Error::invalid("dataset has no points"));
    }
    let n = data.len();
    let mut weights = DMatrix::zeros(n, n);
    for i in 0..n {
        weights[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let w = (-dist_sq(data.point(i), data.point(j)) / epsilon).exp();
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
    }
    let degrees: Vec<f64> = (0..n).map(|i| weights.row(i).sum()).collect();
    Ok(StandardGl { epsilon, weights, degrees })
}

impl StandardGl {
    /// Kernel bandwidth.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of points.
    pub fn n_points(&self) -> usize {
        self.degrees.len()
    }

    /// The affinity matrix.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Degrees `d_i = Σ_j W_ij` (always ≥ 1 because of the self-loop).
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Solves `(D − W) v = λ v`.
    ///
    /// # Errors
    ///
    /// [`Error::Numeric`] if the eigensolve fails.
    pub fn eig_unnormalized(&self) -> Result<StandardEigen> {
        let n = self.n_points();
        let mut lap = -self.weights.clone();
        for i in 0..n {
            lap[(i, i)] += self.degrees[i];
        }
        let (eigenvalues, eigenvectors) = symmetric_eigen(&lap)?;
        Ok(StandardEigen { normalized: false, eigenvalues, eigenvectors })
    }

    /// Solves the normalized problem via the symmetric similarity transform
    /// — eigenvalues of `I − D^{−1/2} W D^{−1/2}` — and returns the `k`
    /// smallest, ascending, with eigenvectors in random-walk gauge
    /// `D^{−1/2} u`, unit-normalized with deterministic signs.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] unless `1 ≤ k ≤ N`; [`Error::Numeric`] if
    /// the eigensolve fails.
    pub fn eig_normalized(&self, k: usize) -> Result<StandardEigen> {
        let n = self.n_points();
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "requested {k} eigenpairs of an N = {n} Laplacian"
            )));
        }
        let inv_sqrt: Vec<f64> = self.degrees.iter().map(|&d| 1.0 / d.sqrt()).collect();
        let mut lap = DMatrix::from_fn(n, n, |i, j| {
            -self.weights[(i, j)] * inv_sqrt[i] * inv_sqrt[j]
        });
        for i in 0..n {
            lap[(i, i)] += 1.0;
        }
        let (eigenvalues, vectors) = symmetric_eigen(&lap)?;
        let mut vectors = vectors.columns(0, k).into_owned();
        for r in 0..n {
            for c in 0..k {
                vectors[(r, c)] *= inv_sqrt[r];
            }
        }
        for c in 0..k {
            let norm = vectors.column(c).norm();
            if norm > 0.0 {
                for r in 0..n {
                    vectors[(r, c)] /= norm;
                }
            }
        }
        fix_signs(&mut vectors);
        Ok(StandardEigen {
            normalized: true,
            eigenvalues: eigenvalues[..k].to_vec(),
            eigenvectors: vectors,
        })
    }

    /// Applies the normalized Laplacian to sampled function values,
    /// estimating the Laplace–Beltrami value at point `i`:
    /// `(4/ε) [ Σ_j W_ij f_j / Σ_j W_ij − f_i ]`.
    ///
    /// The kernel average minus the center value recovers the analyst's
    /// Laplace–Beltrami operator, negative on nonconstant harmonics; the
    /// matrix `I − D⁻¹W` behind [`StandardGl::eig_normalized`] is its
    /// negative and is positive semidefinite.
    ///
    /// # Errors
    ///
    /// [`Error::Dimension`] if `f` does not have one value per point,
    /// [`Error::InvalidArgument`] for an out-of-range index.
    pub fn apply_normalized(&self, f: &[f64], i: usize) -> Result<f64> {
        let n = self.n_points();
        if f.len() != n {
            return Err(Error::dimension(format!(
                "{} function values for N = {n} points",
                f.len()
            )));
        }
        if i >= n {
            return Err(Error::invalid(format!("point index {i} out of range for N = {n}")));
        }
        // Difference form: Σ_j W_ij (f_j − f_i) / d_i keeps constants at
        // exactly zero; the degree is ≥ 1 thanks to the self-loop.
        let num: f64 = (0..n).map(|j| self.weights[(i, j)] * (f[j] - f[i])).sum();
        Ok(4.0 / self.epsilon * (num / self.degrees[i]))
    }
}

/// Scalar kernel weights between one external point and every dataset
/// point, in dataset order.
///
/// # Errors
///
/// [`Error::InvalidArgument`] for a bad bandwidth, [`Error::Dimension`] for
/// a point of the wrong length.
pub fn standard_kernel_row(point: &[Complex64], data: &Dataset, epsilon: f64) -> Result<Vec<f64>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "kernel bandwidth must be positive and finite, got {epsilon}"
        )));
    }
    let dim = data.layout().ambient_dim();
    if point.len() != dim {
        return Err(Error::dimension(format!(
            "external point has {} coordinates, layout needs {dim}",
            point.len()
        )));
    }
    Ok((0..data.len())
        .map(|j| (-dist_sq(point, data.point(j)) / epsilon).exp())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::IrrepLayout;
    use approx::assert_abs_diff_eq;

    fn two_point_data(sep: f64) -> Dataset {
        let layout = IrrepLayout::new(vec![0]).unwrap();
        Dataset::new(
            layout,
            vec![
                vec![Complex64::new(0.0, 0.0)],
                vec![Complex64::new(sep, 0.0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn two_point_laplacians_are_analytic() {
        let data = two_point_data(0.8);
        let eps = 0.5;
        let w = (-(0.8f64 * 0.8) / eps).exp();
        let gl = standard_affinity(&data, eps).unwrap();
        assert_abs_diff_eq!(gl.weights()[(0, 1)], w, epsilon = 1e-15);
        assert_abs_diff_eq!(gl.degrees()[0], 1.0 + w, epsilon = 1e-15);

        let un = gl.eig_unnormalized().unwrap();
        assert_abs_diff_eq!(un.eigenvalues[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(un.eigenvalues[1], 2.0 * w, epsilon = 1e-12);

        let no = gl.eig_normalized(2).unwrap();
        assert_abs_diff_eq!(no.eigenvalues[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(no.eigenvalues[1], 2.0 * w / (1.0 + w), epsilon = 1e-12);
        // Random-walk kernel vector is constant.
        let v0 = no.eigenvectors.column(0);
        assert_abs_diff_eq!(v0[0], v0[1], epsilon = 1e-12);
        assert!(v0[0] > 0.0, "sign fixing should make it positive");
        // Truncation keeps the leading pair only.
        let head = gl.eig_normalized(1).unwrap();
        assert_eq!(head.eigenvalues.len(), 1);
        assert_eq!(head.eigenvectors.ncols(), 1);
        assert_abs_diff_eq!(head.eigenvalues[0], no.eigenvalues[0], epsilon = 1e-14);
        assert!(gl.eig_normalized(0).is_err());
        assert!(gl.eig_normalized(3).is_err());
    }

    #[test]
    fn apply_normalized_two_point_closed_form() {
        let data = two_point_data(0.8);
        let eps = 0.5;
        let w = (-(0.8f64 * 0.8) / eps).exp();
        let gl = standard_affinity(&data, eps).unwrap();
        // Constants are annihilated exactly.
        assert_eq!(gl.apply_normalized(&[3.0, 3.0], 0).unwrap(), 0.0);
        let f = [1.0, -2.0];
        let expect = 4.0 / eps * (w * (f[1] - f[0]) / (1.0 + w));
        assert_abs_diff_eq!(gl.apply_normalized(&f, 0).unwrap(), expect, epsilon = 1e-13);
        let expect1 = 4.0 / eps * (w * (f[0] - f[1]) / (1.0 + w));
        assert_abs_diff_eq!(gl.apply_normalized(&f, 1).unwrap(), expect1, epsilon = 1e-13);
        assert!(gl.apply_normalized(&f, 2).is_err());
        assert!(gl.apply_normalized(&[1.0], 0).is_err());
    }

    #[test]
    fn eigenvectors_solve_the_unnormalized_problem() {
        let layout = IrrepLayout::new(vec![1, 0]).unwrap();
        let pts = vec![
            vec![Complex64::new(0.3, -0.2), Complex64::new(0.1, 0.4), Complex64::new(-0.5, 0.0)],
            vec![Complex64::new(-0.1, 0.6), Complex64::new(0.2, -0.3), Complex64::new(0.4, 0.1)],
            vec![Complex64::new(0.5, 0.2), Complex64::new(-0.4, 0.1), Complex64::new(0.0, -0.6)],
        ];
        let data = Dataset::new(layout, pts).unwrap();
        let gl = standard_affinity(&data, 0.9).unwrap();
        let eig = gl.eig_unnormalized().unwrap();
        let n = 3;
        for (c, &lambda) in eig.eigenvalues.iter().enumerate() {
            for r in 0..n {
                let mut acc = gl.degrees()[r] * eig.eigenvectors[(r, c)];
                for cc in 0..n {
                    acc -= gl.weights()[(r, cc)] * eig.eigenvectors[(cc, c)];
                }
                assert_abs_diff_eq!(acc, lambda * eig.eigenvectors[(r, c)], epsilon = 1e-10);
            }
        }
        assert!(eig.eigenvalues.iter().all(|&v| v > -1e-12));
    }

    #[test]
    fn kernel_row_matches_affinity_rows() {
        let data = two_point_data(1.1);
        let eps = 0.7;
        let gl = standard_affinity(&data, eps).unwrap();
        let row = standard_kernel_row(data.point(0), &data, eps).unwrap();
        assert_abs_diff_eq!(row[0], gl.weights()[(0, 0)], epsilon = 1e-15);
        assert_abs_diff_eq!(row[1], gl.weights()[(0, 1)], epsilon = 1e-15);
        assert!(standard_kernel_row(&[Complex64::new(0.0, 0.0)], &data, -1.0).is_err());
        assert!(
            standard_kernel_row(&[Complex64::new(0.0, 0.0); 2], &data, 1.0).is_err(),
            "length mismatch must be rejected"
        );
    }

    #[test]
    fn bad_bandwidth_is_rejected() {
        let data = two_point_data(1.0);
        assert!(standard_affinity(&data, 0.0).is_err());
        assert!(standard_affinity(&data, f64::NAN).is_err());
    }
}
