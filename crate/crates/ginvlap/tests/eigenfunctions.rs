//! Orthogonality and normalization of the product-space eigenfunctions
//! `Φ_{ℓ,m,n}(i, g)` under the quadrature inner product
//! `⟨f, h⟩_H = Σ_i Σ_b μ_b conj(f(i, b)) h(i, b)`.
//!
//! For the unnormalized system the block eigenvectors are orthonormal, so
//! Schur orthogonality of the representation entries makes the full family
//! orthogonal across every index triple with `‖Φ_{ℓ,m,n}‖² = 1/(2ℓ+1)`.
//! The normalized (random-walk) system trades that for orthogonality in the
//! degree-weighted vector inner product, which is checked at matrix level.

use num_complex::Complex64;

use ginvlap::ggl::{self, BlockParams};
use ginvlap::{wigner_d, FftGrid};

const N: usize = 3;
const K: usize = 8;
const BAND: u32 = 2;
const EPSILON: f64 = 1.8;

#[test]
fn eigenfunctions_are_orthogonal_with_inverse_dimension_norms() {
    let points = ginvlap::experiments::sample_s4(N, 29);
    let data = ginvlap::experiments::embed_dataset(&points).unwrap();
    let spectrum = ggl::fourier_blocks(&data, &BlockParams::new(EPSILON, BAND, K)).unwrap();
    let system = ggl::eig_unnormalized(&spectrum).unwrap();
    let grid = FftGrid::new(K, BAND).unwrap();

    // Tabulate √μ_b-weighted values of every eigenfunction so inner
    // products become plain complex dot products.
    let mut funcs: Vec<(u32, Vec<Complex64>)> = Vec::new();
    for (&two_l, blk) in &system.blocks {
        let d = two_l as usize + 1;
        for vector in 0..blk.eigenvalues.len() {
            let v = blk.eigenvectors.column(vector);
            for row in 0..d {
                let mut table = Vec::with_capacity(N * grid.len());
                for i in 0..N {
                    for (node, &mu) in grid.nodes().iter().zip(grid.weights()) {
                        let u = wigner_d(two_l, node).unwrap();
                        let mut acc = Complex64::new(0.0, 0.0);
                        for r in 0..d {
                            acc += v[i * d + r] * u[(row, r)].conj();
                        }
                        table.push(mu.sqrt() * acc);
                    }
                }
                funcs.push((two_l, table));
            }
        }
    }
    assert_eq!(funcs.len(), N * (1 + 4 + 9));

    let mut max_cross: f64 = 0.0;
    let mut max_norm_err: f64 = 0.0;
    for s in 0..funcs.len() {
        for t in s..funcs.len() {
            let dot: Complex64 = funcs[s]
                .1
                .iter()
                .zip(&funcs[t].1)
                .map(|(a, b)| a.conj() * b)
                .sum();
            if s == t {
                let expect = 1.0 / (funcs[s].0 as f64 + 1.0);
                max_norm_err = max_norm_err.max((dot.re - expect).abs());
                max_norm_err = max_norm_err.max(dot.im.abs());
            } else {
                max_cross = max_cross.max(dot.norm());
            }
        }
    }
    assert!(max_cross <= 1e-7, "cross inner product {max_cross:.3e}");
    assert!(max_norm_err <= 1e-7, "norm deviation {max_norm_err:.3e}");
}

#[test]
fn normalized_eigenvectors_are_orthogonal_in_the_degree_weighting() {
    let points = ginvlap::experiments::sample_s4(5, 31);
    let data = ginvlap::experiments::embed_dataset(&points).unwrap();
    let spectrum = ggl::fourier_blocks(&data, &BlockParams::new(1.2, 1, K)).unwrap();
    let system = ggl::eig_normalized(&spectrum).unwrap();

    for (&two_l, blk) in &system.blocks {
        let d = two_l as usize + 1;
        let dim = 5 * d;
        for s in 0..dim {
            for t in 0..dim {
                let weighted: Complex64 = (0..dim)
                    .map(|r| {
                        blk.eigenvectors[(r, s)].conj()
                            * system.degrees[r / d]
                            * blk.eigenvectors[(r, t)]
                    })
                    .sum();
                if s == t {
                    assert!(weighted.re > 0.0);
                } else {
                    assert!(
                        weighted.norm() <= 1e-8 * system.degrees[0],
                        "2ℓ={two_l} vectors {s},{t}: D-weighted overlap {:.3e}",
                        weighted.norm()
                    );
                }
            }
        }
    }
}
