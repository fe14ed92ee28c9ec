//! Group-invariant graph Laplacians for datasets closed under an SU(2)
//! action.
//!
//! A dataset `{x₁, ..., x_N}` in a complex vector space carrying a
//! block-diagonal unitary SU(2) action is *group-closed* when it is, in
//! effect, sampled together with all of its rotates. The invariant affinity
//! between two points is the Haar average of a Gaussian kernel over the
//! group,
//!
//! ```text
//! W(i, j; a) = ∫ exp(−‖xᵢ − b·a·xⱼ‖² / ε) dη(b) -- as a function on SU(2),
//! ```
//!
//! and everything downstream — degrees, Laplacians, eigendecompositions —
//! becomes block-diagonal in the Fourier domain of the group. This crate
//! implements that pipeline:
//!
//! * [`su2`] — group arithmetic in Euler coordinates, Haar quadrature grids,
//!   dataset containers and the block-diagonal action;
//! * [`wigner`] — irreducible unitary representations (Wigner matrices),
//!   Jacobi polynomial evaluation and precomputed tables;
//! * [`fft`] — forward and inverse generalized Fourier transforms on SU(2)
//!   for band-limited functions;
//! * [`ggl`] — per-frequency affinity blocks `Ŵ^ℓ`, invariant degrees, the
//!   unnormalized and normalized invariant Laplacian eigenproblems, and
//!   eigenfunction evaluation on the dataset–group product space;
//! * [`standard_gl`] — the classical scalar graph Laplacian baseline on the
//!   same data;
//! * [`experiments`] — sampling utilities and the three reference
//!   experiments (operator convergence, spectra, denoising) with
//!   deterministic, seedable output.
//!
//! Frequencies of SU(2) are half-integers; throughout the API they are
//! passed *doubled* (`2ℓ`) so they stay exact integers.

pub mod error;
pub mod experiments;
pub mod fft;
pub mod ggl;
pub mod standard_gl;
pub mod su2;
pub mod wigner;

mod bessel;
mod linalg;

pub use error::{Error, Result};
pub use fft::{gauss_legendre, synthesize, FftGrid, FourierCoeffs};
pub use ggl::{
    affinity_on_grid, apply_normalized, degrees, eig_normalized, eig_unnormalized,
    eval_eigenfunction, fourier_blocks, joint_enumeration, pair_blocks, pair_inner_coeffs,
    point_to_set_blocks, AffinitySpectrum, BlockEigen, BlockMethod, BlockParams, EigenIndex,
    GglEigen,
};
pub use standard_gl::{standard_affinity, standard_kernel_row, StandardEigen, StandardGl};
pub use su2::{act, haar_grid, Dataset, GroupElement, IrrepLayout, QuadratureGrid};
pub use wigner::{jacobi, little_d, little_d_from_cos, wigner_d, WignerTable};
