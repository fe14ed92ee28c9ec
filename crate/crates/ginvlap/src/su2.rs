//! Group arithmetic and Haar quadrature for SU(2).
//!
//! Elements of SU(2) are parametrized by Euler angles `(α, β, γ)` through the
//! closed form
//!
//! ```text
//! A(α, β, γ) = | cos(β/2) e^{ i(α+γ)/2}    i sin(β/2) e^{ i(α−γ)/2} |
//!              | i sin(β/2) e^{−i(α−γ)/2}    cos(β/2) e^{−i(α+γ)/2} |
//! ```
//!
//! with the canonical windows `α ∈ [0, 2π)`, `β ∈ [0, π]`, `γ ∈ [−2π, 2π)`.
//! The 4π range of `γ` realizes the double cover of the rotation group: the
//! chart is injective away from the poles `β ∈ {0, π}`, where only `α + γ`
//! (resp. `α − γ`) is determined and the split is fixed by zeroing the
//! residual of `γ` (see [`GroupElement::from_euler`]).
//!
//! The normalized Haar measure in this chart is
//!
//! ```text
//! ∫ f dη = 1/(16π²) ∫₀^{2π} ∫₀^{π} ∫_{−2π}^{2π} f(A(α,β,γ)) sin β dα dβ dγ ,
//! ```
//!
//! and [`haar_grid`] discretizes it on the product grid `α = πk₁/K`,
//! `β = πk₂/K`, `γ = πk₃/K` with `sin β` weights normalized to sum to one.
//!
//! [`IrrepLayout`] and [`Dataset`] describe points of a complex vector space
//! that carries a block-diagonal unitary action `⊕ U^{ℓ_j}`: each block is an
//! irreducible frequency `ℓ_j` (stored doubled, `2ℓ_j`, so half-integers are
//! exact) of dimension `2ℓ_j + 1`. [`act`] applies the action of a group
//! element to a point.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wigner::wigner_d;

const TWO_PI: f64 = 2.0 * PI;
const FOUR_PI: f64 = 4.0 * PI;

/// An element of SU(2), stored as canonical Euler angles together with the
/// cached 2×2 matrix of the fundamental representation.
///
/// The matrix is always exactly the closed form `A(α, β, γ)` evaluated at the
/// stored angles; it is unitary with determinant one up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    alpha: f64,
    beta: f64,
    gamma: f64,
    mat: Matrix2<Complex64>,
}

fn fundamental_matrix(alpha: f64, beta: f64, gamma: f64) -> Matrix2<Complex64> {
    let (hc, hs) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let u = Complex64::from_polar(1.0, (alpha + gamma) / 2.0);
    let v = Complex64::from_polar(1.0, (alpha - gamma) / 2.0);
    let i = Complex64::new(0.0, 1.0);
    Matrix2::new(hc * u, i * hs * v, i * hs * v.conj(), hc * u.conj())
}

/// Splits a sum `s = α + γ` (or difference) known modulo 4π into the pole
/// gauge: `γ` residual zero, i.e. `γ ∈ {0, −2π}` chosen so that `α ∈ [0, 2π)`.
fn pole_gauge(s: f64) -> (f64, f64) {
    let s = s.rem_euclid(FOUR_PI);
    if s < TWO_PI {
        (s, 0.0)
    } else {
        (s - TWO_PI, -TWO_PI)
    }
}

impl GroupElement {
    /// Builds a group element from Euler angles, range-reducing them into the
    /// canonical windows.
    ///
    /// Reduction uses only exact identities of the closed form:
    /// `A(α, β, γ) = A(α+π, 2π−β, γ+π)` folds `β` into `[0, π]`, and shifting
    /// `α` and `γ` *jointly* by the same multiple of 2π leaves the matrix
    /// unchanged. At the poles (`β = 0` or `β = π`) only `α + γ` (resp.
    /// `α − γ`) matters and the canonical form puts the whole angle into `α`
    /// modulo the joint shift (`γ ∈ {0, −2π}`).
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] if any angle is not finite.
    pub fn from_euler(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && gamma.is_finite()) {
            return Err(Error::invalid(format!(
                "euler angles must be finite, got ({alpha}, {beta}, {gamma})"
            )));
        }
        let (mut alpha, mut gamma) = (alpha, gamma);
        // β is 4π-periodic; a lone 2π shift flips the matrix sign, which a
        // 2π shift of γ (also a sign flip) cancels. Then fold (π, 2π) down
        // with A(α, β, γ) = A(α+π, 2π−β, γ+π).
        let mut beta = beta.rem_euclid(FOUR_PI);
        if beta >= FOUR_PI {
            beta = 0.0;
        }
        if beta >= TWO_PI {
            beta -= TWO_PI;
            gamma += TWO_PI;
        }
        if beta > PI {
            alpha += PI;
            beta = TWO_PI - beta;
            gamma += PI;
        }
        // Joint 2π shifts bring alpha into [0, 2π); gamma is 4π-periodic.
        let k = (alpha / TWO_PI).floor();
        alpha -= TWO_PI * k;
        gamma -= TWO_PI * k;
        if alpha >= TWO_PI {
            // Guard against rounding at the upper edge of the window.
            alpha -= TWO_PI;
            gamma -= TWO_PI;
        }
        gamma = gamma.rem_euclid(FOUR_PI);
        if gamma >= TWO_PI {
            gamma -= FOUR_PI;
        }
        if beta == 0.0 {
            let (a, g) = pole_gauge(alpha + gamma);
            alpha = a;
            gamma = g;
        } else if beta == PI {
            // Here the matrix depends only on α − γ (mod 4π); the gauge
            // (α, γ) = (s, 0) or (s − 2π, −2π) realizes both residues because
            // (s − 2π) − (−2π) = s.
            let (a, g) = pole_gauge(alpha - gamma);
            alpha = a;
            gamma = g;
        }
        let mat = fundamental_matrix(alpha, beta, gamma);
        Ok(GroupElement { alpha, beta, gamma, mat })
    }

    /// The identity element.
    pub fn identity() -> Self {
        GroupElement {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            mat: Matrix2::identity(),
        }
    }

    /// Recovers canonical Euler angles from a 2×2 special-unitary matrix.
    ///
    /// `β = 2 acos |u₀₀|` lies in `[0, π]`; `arg u₀₀` and `arg u₀₁` fix the
    /// branches of `(α+γ)/2` and `(α−γ)/2`, after which the joint-shift
    /// identity selects the unique representative with `α ∈ [0, 2π)`,
    /// `γ ∈ [−2π, 2π)`. Within `1e-14` of a pole the pole gauge is applied.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] if the matrix is not special unitary to
    /// `1e-9`.
    pub fn from_matrix(mat: &Matrix2<Complex64>) -> Result<Self> {
        let ortho = (mat.adjoint() * mat - Matrix2::identity()).norm();
        let det = mat[(0, 0)] * mat[(1, 1)] - mat[(0, 1)] * mat[(1, 0)];
        if !(ortho < 1e-9 && (det - Complex64::new(1.0, 0.0)).norm() < 1e-9) {
            return Err(Error::invalid(format!(
                "matrix is not special unitary (‖U*U−I‖ = {ortho:.3e}, det = {det})"
            )));
        }
        Ok(Self::from_matrix_unchecked(mat))
    }

    fn from_matrix_unchecked(mat: &Matrix2<Complex64>) -> Self {
        let a = mat[(0, 0)];
        let b = mat[(0, 1)];
        let ca = a.norm().min(1.0);
        let sb = b.norm().min(1.0);
        let (alpha, beta, gamma) = if sb < 1e-14 {
            // β = 0 pole: A = diag(e^{iθ/2}, e^{−iθ/2}) with θ = α + γ.
            let (al, ga) = pole_gauge(2.0 * a.arg());
            (al, 0.0, ga)
        } else if ca < 1e-14 {
            // β = π pole: u₀₁ = i e^{iθ/2} with θ = α − γ.
            let (al, ga) = pole_gauge(2.0 * (b * Complex64::new(0.0, -1.0)).arg());
            (al, PI, ga)
        } else {
            let beta = 2.0 * ca.acos();
            let half_sum = a.arg();
            let half_diff = (b * Complex64::new(0.0, -1.0)).arg();
            let mut alpha = half_sum + half_diff;
            let mut gamma = half_sum - half_diff;
            let k = (alpha / TWO_PI).floor();
            alpha -= TWO_PI * k;
            gamma -= TWO_PI * k;
            if alpha >= TWO_PI {
                alpha -= TWO_PI;
                gamma -= TWO_PI;
            }
            gamma = gamma.rem_euclid(FOUR_PI);
            if gamma >= TWO_PI {
                gamma -= FOUR_PI;
            }
            (alpha, beta, gamma)
        };
        let mat = fundamental_matrix(alpha, beta, gamma);
        GroupElement { alpha, beta, gamma, mat }
    }

    /// Euler angle `α ∈ [0, 2π)`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Euler angle `β ∈ [0, π]`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Euler angle `γ ∈ [−2π, 2π)`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The cached matrix of the fundamental representation.
    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.mat
    }

    /// Group product `self · other` (matrix product, then canonical angles).
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement::from_matrix_unchecked(&(self.mat * other.mat))
    }

    /// Group inverse (the adjoint of the cached matrix).
    pub fn inverse(&self) -> GroupElement {
        GroupElement::from_matrix_unchecked(&self.mat.adjoint())
    }

    /// Draws a Haar-uniform element: a uniform point on the unit 3-sphere
    /// interpreted as the first matrix row `(a, b)`.
    pub fn random<R: rand::Rng + ?Sized>(rng: &mut R) -> GroupElement {
        use rand_distr::{Distribution, StandardNormal};
        loop {
            let q: [f64; 4] = [
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
                StandardNormal.sample(rng),
            ];
            let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 1e-6 {
                let a = Complex64::new(q[0] / norm, q[1] / norm);
                let b = Complex64::new(q[2] / norm, q[3] / norm);
                let mat = Matrix2::new(a, b, -b.conj(), a.conj());
                return GroupElement::from_matrix_unchecked(&mat);
            }
        }
    }
}

/// A quadrature rule for the normalized Haar measure on the product grid
/// `α = πk₁/K (k₁ < 2K)`, `β = πk₂/K (k₂ < K)`, `γ = πk₃/K (k₃ < 4K)` with
/// weights proportional to `sin β` and normalized to sum to one.
///
/// Nodes are stored in row-major `(k₁, k₂, k₃)` order, `k₃` fastest. The node
/// count is `2K · K · 4K = 8K³`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    k: u32,
    nodes: Vec<GroupElement>,
    weights: Vec<f64>,
}

/// Builds the Haar product grid of resolution `K`.
///
/// # Errors
///
/// [`Error::InvalidArgument`] unless `K ≥ 2` and `K` is even.
pub fn haar_grid(k: u32) -> Result<QuadratureGrid> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::invalid(format!("grid resolution K must be even and ≥ 2, got {k}")));
    }
    let k_us = k as usize;
    let mut nodes = Vec::with_capacity(8 * k_us * k_us * k_us);
    let mut weights = Vec::with_capacity(8 * k_us * k_us * k_us);
    let mut sin_sum = 0.0;
    for k2 in 0..k_us {
        sin_sum += (PI * k2 as f64 / k as f64).sin();
    }
    let norm = 1.0 / (sin_sum * (2 * k_us) as f64 * (4 * k_us) as f64);
    for k1 in 0..2 * k_us {
        let alpha = PI * k1 as f64 / k as f64;
        for k2 in 0..k_us {
            let beta = PI * k2 as f64 / k as f64;
            let w = beta.sin() * norm;
            for k3 in 0..4 * k_us {
                let gamma = PI * k3 as f64 / k as f64;
                nodes.push(GroupElement::from_euler(alpha, beta, gamma).expect("finite angles"));
                weights.push(w);
            }
        }
    }
    Ok(QuadratureGrid { k, nodes, weights })
}

impl QuadratureGrid {
    /// The resolution parameter `K`.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Number of nodes, `8K³`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the grid has no nodes (never, for a constructed grid).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Grid nodes in `(k₁, k₂, k₃)` row-major order.
    pub fn nodes(&self) -> &[GroupElement] {
        &self.nodes
    }

    /// Normalized quadrature weights, aligned with [`Self::nodes`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Quadrature sum `Σ wᵢ f(Bᵢ) ≈ ∫ f dη` for a complex integrand.
    pub fn integrate<F: FnMut(&GroupElement) -> Complex64>(&self, mut f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(g, &w)| f(g) * w)
            .sum()
    }
}

/// Block structure of a complex vector space carrying `⊕ U^{ℓ_j}`: an ordered
/// list of irreducible frequencies, each stored doubled (`2ℓ_j`) so that
/// half-integers are exact.
///
/// Block `j` occupies `2ℓ_j + 1` consecutive coordinates; the ambient
/// dimension is the sum of the block sizes. Blocks may repeat and may appear
/// in any order — the order fixes which coordinates transform together.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IrrepLayout {
    blocks: Vec<u32>,
}

impl IrrepLayout {
    /// Builds a layout from doubled frequencies.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] if the list is empty.
    pub fn new(blocks_doubled: Vec<u32>) -> Result<Self> {
        if blocks_doubled.is_empty() {
            return Err(Error::invalid("layout must contain at least one block"));
        }
        Ok(IrrepLayout { blocks: blocks_doubled })
    }

    /// The doubled frequencies `2ℓ_j` in block order.
    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    /// Total dimension `Σ (2ℓ_j + 1)`.
    pub fn ambient_dim(&self) -> usize {
        self.blocks.iter().map(|&b| b as usize + 1).sum()
    }

    /// Iterator over `(2ℓ_j, offset_j)` pairs giving each block's doubled
    /// frequency and starting coordinate.
    pub fn block_offsets(&self) -> impl Iterator<Item = (u32, usize)> + '_ {
        let mut offset = 0usize;
        self.blocks.iter().map(move |&b| {
            let here = offset;
            offset += b as usize + 1;
            (b, here)
        })
    }

    /// Sorted deduplicated doubled frequencies present in the layout.
    pub fn distinct_frequencies(&self) -> Vec<u32> {
        let mut v = self.blocks.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Applies the block-diagonal action `x ↦ (⊕ U^{ℓ_j}(a)) x`.
///
/// # Errors
///
/// [`Error::Dimension`] if `x.len()` differs from the layout's ambient
/// dimension.
pub fn act(a: &GroupElement, x: &[Complex64], layout: &IrrepLayout) -> Result<Vec<Complex64>> {
    if x.len() != layout.ambient_dim() {
        return Err(Error::dimension(format!(
            "point has {} coordinates but layout has ambient dimension {}",
            x.len(),
            layout.ambient_dim()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    for (two_l, offset) in layout.block_offsets() {
        let d = two_l as usize + 1;
        let u = wigner_d(two_l, a)?;
        for r in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..d {
                acc += u[(r, c)] * x[offset + c];
            }
            out[offset + r] = acc;
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct DatasetWire {
    layout: Vec<u32>,
    points: Vec<Vec<f64>>,
}

/// A finite collection of points in a space with a fixed [`IrrepLayout`].
///
/// The JSON wire format is `{"layout": [2ℓ₁, 2ℓ₂, ...], "points": [[re, im,
/// re, im, ...], ...]}` — each point is its coordinates row-major with real
/// and imaginary parts interleaved, so a point has `2 · ambient_dim` numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    layout: IrrepLayout,
    points: Vec<Vec<Complex64>>,
}

impl Dataset {
    /// Builds a dataset, validating every point against the layout.
    ///
    /// # Errors
    ///
    /// [`Error::Dimension`] if a point's length does not match the layout;
    /// [`Error::InvalidArgument`] if a coordinate is not finite.
    pub fn new(layout: IrrepLayout, points: Vec<Vec<Complex64>>) -> Result<Self> {
        let dim = layout.ambient_dim();
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::dimension(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::invalid(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(Dataset { layout, points })
    }

    /// The layout shared by all points.
    pub fn layout(&self) -> &IrrepLayout {
        &self.layout
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// True when the dataset holds no points.
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.points[i]
    }

    /// All points.
    pub fn points(&self) -> &[Vec<Complex64>] {
        &self.points
    }

    /// Squared Euclidean norm of point `i`.
    pub fn norm_sq(&self, i: usize) -> f64 {
        self.points[i].iter().map(|z| z.norm_sqr()).sum()
    }

    /// Serializes to the JSON wire format.
    pub fn to_json(&self) -> String {
        let wire = DatasetWire {
            layout: self.layout.blocks().to_vec(),
            points: self
                .points
                .iter()
                .map(|p| p.iter().flat_map(|z| [z.re, z.im]).collect())
                .collect(),
        };
        serde_json::to_string_pretty(&wire).expect("dataset serialization cannot fail")
    }

    /// Parses the JSON wire format.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] for malformed JSON, [`Error::Dimension`]
    /// when a point disagrees with the layout.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: DatasetWire = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("malformed dataset JSON: {e}")))?;
        let layout = IrrepLayout::new(wire.layout)?;
        let dim = layout.ambient_dim();
        let mut points = Vec::with_capacity(wire.points.len());
        for (i, raw) in wire.points.iter().enumerate() {
            if raw.len() != 2 * dim {
                return Err(Error::dimension(format!(
                    "point {i} has {} numbers, expected {} (2 × ambient dimension)",
                    raw.len(),
                    2 * dim
                )));
            }
            points.push(raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect());
        }
        Dataset::new(layout, points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn mat_close(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>, tol: f64) {
        assert!((a - b).norm() < tol, "matrices differ by {}:\n{a}\nvs\n{b}", (a - b).norm());
    }

    /// Matrix at (π, π/2, 0) by direct substitution into the closed form:
    /// cos(π/4) = sin(π/4) = √2/2, (α+γ)/2 = (α−γ)/2 = π/2.
    #[test]
    fn euler_matrix_reference_value() {
        let g = GroupElement::from_euler(PI, PI / 2.0, 0.0).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expect = Matrix2::new(
            Complex64::new(0.0, s),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(0.0, -s),
        );
        mat_close(g.matrix(), &expect, 1e-14);
    }

    #[test]
    fn determinant_and_unitarity() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = GroupElement::random(&mut rng);
            let m = g.matrix();
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            assert_abs_diff_eq!(det.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(det.im, 0.0, epsilon = 1e-12);
            mat_close(&(m.adjoint() * m), &Matrix2::identity(), 1e-12);
        }
    }

    #[test]
    fn angle_windows_are_canonical() {
        use rand::RngExt;
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        for _ in 0..500 {
            let raw = (
                rng.random_range(-30.0..30.0),
                rng.random_range(-30.0..30.0),
                rng.random_range(-30.0..30.0),
            );
            let g = GroupElement::from_euler(raw.0, raw.1, raw.2).unwrap();
            assert!((0.0..TWO_PI).contains(&g.alpha()), "alpha {}", g.alpha());
            assert!((0.0..=PI).contains(&g.beta()), "beta {}", g.beta());
            assert!((-TWO_PI..TWO_PI).contains(&g.gamma()), "gamma {}", g.gamma());
            // Range reduction must preserve the matrix of the raw angles.
            mat_close(g.matrix(), &fundamental_matrix(raw.0, raw.1, raw.2), 1e-12);
        }
    }

    #[test]
    fn from_matrix_round_trips() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        for _ in 0..500 {
            let g = GroupElement::random(&mut rng);
            let h = GroupElement::from_matrix(g.matrix()).unwrap();
            mat_close(g.matrix(), h.matrix(), 1e-12);
            assert_abs_diff_eq!(g.alpha(), h.alpha(), epsilon = 1e-9);
            assert_abs_diff_eq!(g.beta(), h.beta(), epsilon = 1e-9);
            assert_abs_diff_eq!(g.gamma(), h.gamma(), epsilon = 1e-9);
        }
    }

    #[test]
    fn compose_matches_matrix_product_and_inverse() {
        let mut rng = ChaCha12Rng::seed_from_u64(14);
        for _ in 0..200 {
            let g = GroupElement::random(&mut rng);
            let h = GroupElement::random(&mut rng);
            mat_close(g.compose(&h).matrix(), &(g.matrix() * h.matrix()), 1e-12);
            let e = g.compose(&g.inverse());
            mat_close(e.matrix(), &Matrix2::identity(), 1e-12);
        }
    }

    #[test]
    fn z_rotations_add_angles() {
        let g = GroupElement::from_euler(0.7, 0.0, 0.0).unwrap();
        let h = GroupElement::from_euler(1.1, 0.0, 0.0).unwrap();
        let gh = g.compose(&h);
        let direct = GroupElement::from_euler(1.8, 0.0, 0.0).unwrap();
        mat_close(gh.matrix(), direct.matrix(), 1e-12);
        assert_abs_diff_eq!(gh.alpha(), 1.8, epsilon = 1e-12);
        assert_abs_diff_eq!(gh.beta(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(gh.gamma(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn minus_identity_is_canonical() {
        // −I = A(0, 0, −2π): the pole gauge with γ = −2π.
        let m = Matrix2::new(
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(-1.0, 0.0),
        );
        let g = GroupElement::from_matrix(&m).unwrap();
        assert_eq!(g.beta(), 0.0);
        mat_close(g.matrix(), &m, 1e-12);
        let h = GroupElement::from_euler(TWO_PI, 0.0, 0.0).unwrap();
        mat_close(h.matrix(), &m, 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(GroupElement::from_euler(f64::NAN, 0.0, 0.0).is_err());
        assert!(GroupElement::from_euler(0.0, f64::INFINITY, 0.0).is_err());
        let not_unitary = Matrix2::new(
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        );
        assert!(GroupElement::from_matrix(&not_unitary).is_err());
    }

    #[test]
    fn haar_grid_counts_and_weights() {
        for k in [2u32, 4, 8] {
            let grid = haar_grid(k).unwrap();
            assert_eq!(grid.len(), 8 * (k as usize).pow(3));
            let total: f64 = grid.weights().iter().sum();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
            // Weight proportional to sin β within each β-ring.
            let g0 = &grid.nodes()[0];
            assert_eq!(g0.beta(), 0.0);
            assert_eq!(grid.weights()[0], 0.0);
        }
        assert!(haar_grid(0).is_err());
        assert!(haar_grid(3).is_err());
        assert!(haar_grid(1).is_err());
    }

    #[test]
    fn haar_grid_k32_node_count() {
        // 2K · K · 4K at K = 32.
        assert_eq!(8usize * 32 * 32 * 32, 262_144);
    }

    #[test]
    fn haar_grid_translation_invariance_for_shift_nodes() {
        let k = 4u32;
        let grid = haar_grid(k).unwrap();
        // Left translation by an α-grid rotation permutes the nodes, so every
        // quadrature sum is exactly invariant, for any integrand.
        let shift = GroupElement::from_euler(PI * 3.0 / k as f64, 0.0, 0.0).unwrap();
        let f = |g: &GroupElement| {
            let m = g.matrix();
            (m[(0, 0)] * m[(1, 0)].conj() + m[(0, 1)]).exp()
        };
        let base = grid.integrate(|g| f(g));
        let shifted = grid.integrate(|g| f(&shift.compose(g)));
        assert!((base - shifted).norm() < 1e-12, "{base} vs {shifted}");
    }

    #[test]
    fn act_applies_fundamental_block() {
        // Layout {1/2, 0} on C³: action is diag(A, 1).
        let layout = IrrepLayout::new(vec![1, 0]).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(15);
        let g = GroupElement::random(&mut rng);
        let x = vec![
            Complex64::new(0.3, -0.1),
            Complex64::new(-0.2, 0.8),
            Complex64::new(0.5, 0.25),
        ];
        let y = act(&g, &x, &layout).unwrap();
        let m = g.matrix();
        let y0 = m[(0, 0)] * x[0] + m[(0, 1)] * x[1];
        let y1 = m[(1, 0)] * x[0] + m[(1, 1)] * x[1];
        assert!((y[0] - y0).norm() < 1e-12);
        assert!((y[1] - y1).norm() < 1e-12);
        assert!((y[2] - x[2]).norm() < 1e-15);
        // Norm preservation under the unitary action.
        let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(nx, ny, epsilon = 1e-12);
    }

    #[test]
    fn act_validates_dimensions() {
        let layout = IrrepLayout::new(vec![1, 0]).unwrap();
        let g = GroupElement::identity();
        assert!(matches!(
            act(&g, &[Complex64::new(1.0, 0.0)], &layout),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn layout_accessors() {
        let layout = IrrepLayout::new(vec![1, 0, 1, 4]).unwrap();
        assert_eq!(layout.ambient_dim(), 2 + 1 + 2 + 5);
        let offsets: Vec<_> = layout.block_offsets().collect();
        assert_eq!(offsets, vec![(1, 0), (0, 2), (1, 3), (4, 5)]);
        assert_eq!(layout.distinct_frequencies(), vec![0, 1, 4]);
        assert!(IrrepLayout::new(vec![]).is_err());
    }

    #[test]
    fn dataset_json_round_trip() {
        let layout = IrrepLayout::new(vec![1, 0]).unwrap();
        let pts = vec![
            vec![
                Complex64::new(0.5, 0.5),
                Complex64::new(0.5, 0.5),
                Complex64::new(0.0, 0.0),
            ],
            vec![
                Complex64::new(-0.125, 0.75),
                Complex64::new(0.1, -0.2),
                Complex64::new(0.937_562_3, 0.0),
            ],
        ];
        let data = Dataset::new(layout, pts).unwrap();
        let text = data.to_json();
        let back = Dataset::from_json(&text).unwrap();
        assert_eq!(data, back);
        // Exact float preservation through the decimal encoding.
        assert_eq!(back.point(1)[2].re, 0.937_562_3);
    }

    #[test]
    fn dataset_rejects_mismatched_points() {
        let layout = IrrepLayout::new(vec![1, 0]).unwrap();
        let bad = vec![vec![Complex64::new(1.0, 0.0)]];
        assert!(Dataset::new(layout.clone(), bad).is_err());
        let nan = vec![vec![
            Complex64::new(f64::NAN, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ]];
        assert!(Dataset::new(layout, nan).is_err());
        assert!(Dataset::from_json("{\"layout\": [1], \"points\": [[1.0]]}").is_err());
        assert!(Dataset::from_json("not json").is_err());
    }
}
