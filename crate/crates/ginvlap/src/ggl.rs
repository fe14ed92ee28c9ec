//! The group-invariant graph Laplacian (invariant GL) pipeline.
//!
//! For a dataset `{x_i}` whose ambient space carries a block-diagonal SU(2)
//! action `U(g)`, the invariant affinity between points `i` and `j` is the
//! *function*
//!
//! ```text
//! w_ij(g) = exp(−‖x_i − U(g) x_j‖² / ε) ,
//! ```
//!
//! the kernel between all rotates of `x_i` and `x_j`. The affinity operator
//! on functions `F(j, h)` over the dataset–group product space is a group
//! convolution, so it block-diagonalizes over frequencies: with
//!
//! ```text
//! Ŵ^ℓ_ij = ∫ w_ij(g) conj(U^ℓ(g)) dη(g)      (a (2ℓ+1)×(2ℓ+1) matrix) ,
//! ```
//!
//! the big `N(2ℓ+1) × N(2ℓ+1)` matrix `W^ℓ = [Ŵ^ℓ_ij]` is Hermitian
//! (`Ŵ^ℓ_ji = (Ŵ^ℓ_ij)^H`), the degrees `d_i = Σ_j Ŵ⁰_ij` are real and
//! constant over each fiber, and the invariant GL eigenproblems reduce to
//! one dense Hermitian eigensolve per frequency:
//!
//! * unnormalized: `L^ℓ = D − W^ℓ` with `D = diag(d_i) ⊗ I`;
//! * normalized: `λ, u` of `I − D^{−1/2} W^ℓ D^{−1/2}`, reported with the
//!   random-walk vectors `v = D^{−1/2} u` (unit-normalized).
//!
//! Every eigenvector `v` of `W^ℓ` lifts to `2ℓ+1` eigenfunctions on the
//! product space, one per free row index `m`:
//!
//! ```text
//! Φ_{ℓ,m,v}(i, g) = Σ_r v[i(2ℓ+1) + r] · U^ℓ_{rm}(g⁻¹)
//!                 = Σ_r v[i(2ℓ+1) + r] · conj(U^ℓ_{mr}(g)) .
//! ```
//!
//! Two routes compute the blocks. The *grid quadrature* route samples
//! `w_ij` on an [`FftGrid`] and runs the forward transform; it works for
//! every layout. The *factorized* route applies when the layout contains
//! only frequencies 0 and 1/2: the exponent is then linear in the entries of
//! the fundamental matrix, the `α`/`γ` integrals evaluate in closed form to
//! modified Bessel factors, and only the β-quadrature remains — making
//! datasets of thousands of points practical.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::scaled_ive_into;
use crate::error::{Error, Result};
use crate::fft::{gauss_legendre, FftGrid};
use crate::linalg::{fix_phases, hermitian_eigen};
use crate::su2::{act, Dataset, GroupElement, IrrepLayout, QuadratureGrid};
use crate::wigner::{i_pow, wigner_d, WignerTable, MAX_TWO_L};

/// Strategy for computing the per-pair Fourier blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockMethod {
    /// Factorized route when the layout allows it, grid quadrature otherwise.
    #[default]
    Auto,
    /// Closed-form Bessel factorization (layouts with frequencies 0 and 1/2).
    BesselFactorization,
    /// Sample the affinity on the transform grid and run the forward FFT.
    GridQuadrature,
}

/// Parameters of the block computation.
#[derive(Debug, Clone, Copy)]
pub struct BlockParams {
    /// Kernel bandwidth ε of `exp(−‖·‖²/ε)`.
    pub epsilon: f64,
    /// Largest doubled frequency for which blocks are produced.
    pub max_two_l: u32,
    /// β-resolution: Gauss–Legendre node count (and grid parameter `K` of
    /// the quadrature route). Must satisfy `max_two_l ≤ k − 1`.
    pub k: usize,
    /// Route selection.
    pub method: BlockMethod,
}

impl BlockParams {
    /// Convenience constructor with automatic route selection.
    pub fn new(epsilon: f64, max_two_l: u32, k: usize) -> Self {
        BlockParams { epsilon, max_two_l, k, method: BlockMethod::Auto }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::invalid(format!(
                "kernel bandwidth must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if self.max_two_l > MAX_TWO_L {
            return Err(Error::invalid(format!(
                "doubled frequency {} exceeds the supported maximum {MAX_TWO_L}",
                self.max_two_l
            )));
        }
        if self.k == 0 || self.max_two_l as usize > self.k - 1 {
            return Err(Error::resolution(format!(
                "band 2ℓ = {} needs at least {} β nodes, got {}",
                self.max_two_l,
                self.max_two_l + 1,
                self.k
            )));
        }
        Ok(())
    }
}

/// Offsets of the trivial and spin-half blocks of a factorizable layout.
struct SpinPairing {
    zero_offsets: Vec<usize>,
    half_offsets: Vec<usize>,
}

fn spin_pairing(layout: &IrrepLayout) -> Option<SpinPairing> {
    let mut zero = Vec::new();
    let mut half = Vec::new();
    for (two_l, offset) in layout.block_offsets() {
        match two_l {
            0 => zero.push(offset),
            1 => half.push(offset),
            _ => return None,
        }
    }
    Some(SpinPairing { zero_offsets: zero, half_offsets: half })
}

enum Route {
    Bessel(SpinPairing),
    Grid,
}

fn resolve_route(layout: &IrrepLayout, method: BlockMethod) -> Result<Route> {
    match method {
        BlockMethod::GridQuadrature => Ok(Route::Grid),
        BlockMethod::BesselFactorization => spin_pairing(layout).map(Route::Bessel).ok_or_else(|| {
            Error::invalid(
                "the factorized route supports only layouts built from frequencies 0 and 1/2",
            )
        }),
        BlockMethod::Auto => Ok(match spin_pairing(layout) {
            Some(p) => Route::Bessel(p),
            None => Route::Grid,
        }),
    }
}

/// Shared precomputation for the factorized route.
struct BesselCtx {
    epsilon: f64,
    max_two_l: u32,
    gl_w: Vec<f64>,
    cbeta: Vec<f64>,
    sbeta: Vec<f64>,
    table: WignerTable,
}

/// Per-task scratch for the factorized route (reused across pairs).
struct BesselWs {
    ive1: Vec<f64>,
    ive2: Vec<f64>,
    pref: Vec<f64>,
    ph1: Vec<Complex64>,
    ph2: Vec<Complex64>,
}

impl BesselCtx {
    fn new(params: &BlockParams) -> Result<Self> {
        let (gl_x, gl_w) = gauss_legendre(params.k)?;
        let cbeta: Vec<f64> = gl_x.iter().map(|&x| ((1.0 + x) / 2.0).sqrt()).collect();
        let sbeta: Vec<f64> = gl_x.iter().map(|&x| ((1.0 - x) / 2.0).sqrt()).collect();
        let freqs: Vec<u32> = (0..=params.max_two_l).collect();
        let table = WignerTable::new(&freqs, &gl_x)?;
        Ok(BesselCtx {
            epsilon: params.epsilon,
            max_two_l: params.max_two_l,
            gl_w,
            cbeta,
            sbeta,
            table,
        })
    }

    fn workspace(&self) -> BesselWs {
        let k = self.gl_w.len();
        let span = self.max_two_l as usize + 1;
        BesselWs {
            ive1: vec![0.0; k * span],
            ive2: vec![0.0; k * span],
            pref: vec![0.0; k],
            ph1: vec![Complex64::new(0.0, 0.0); 2 * span - 1],
            ph2: vec![Complex64::new(0.0, 0.0); 2 * span - 1],
        }
    }

    /// Blocks `Ŵ^ℓ_xy` for one ordered pair of points.
    fn pair(
        &self,
        ws: &mut BesselWs,
        pairing: &SpinPairing,
        x: &[Complex64],
        y: &[Complex64],
        norm_x: f64,
        norm_y: f64,
    ) -> BTreeMap<u32, DMatrix<Complex64>> {
        let i = Complex64::new(0.0, 1.0);
        let mut c0 = Complex64::new(0.0, 0.0);
        for &o in &pairing.zero_offsets {
            c0 += x[o].conj() * y[o];
        }
        let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
        for &o in &pairing.half_offsets {
            for r in 0..2 {
                for s in 0..2 {
                    c[r][s] += x[o + r].conj() * y[o + s];
                }
            }
        }
        // Exponent: base + a cos(β/2) cos(u−φ₁) + b sin(β/2) cos(v−φ₂) with
        // u = (α+γ)/2, v = (α−γ)/2; the α/γ integrals give Bessel factors.
        let zeta1 = c[0][0] + c[1][1].conj();
        let zeta2 = i * c[0][1] - i * c[1][0].conj();
        let amp1 = 2.0 * zeta1.norm() / self.epsilon;
        let amp2 = 2.0 * zeta2.norm() / self.epsilon;
        let phi1 = -zeta1.arg();
        let phi2 = -zeta2.arg();
        let base = -(norm_x + norm_y - 2.0 * c0.re) / self.epsilon;

        let k = self.gl_w.len();
        let span = self.max_two_l as usize + 1;
        for b in 0..k {
            let a1 = amp1 * self.cbeta[b];
            let a2 = amp2 * self.sbeta[b];
            scaled_ive_into(a1, &mut ws.ive1[b * span..(b + 1) * span]);
            scaled_ive_into(a2, &mut ws.ive2[b * span..(b + 1) * span]);
            // base + a1 + a2 ≤ −min_g ‖x − U(g)y‖²/ε ≤ 0: never overflows.
            ws.pref[b] = 0.5 * self.gl_w[b] * (base + a1 + a2).exp();
        }
        // Conjugated-representation phases: entries carry e^{+ikφ} factors.
        let l = self.max_two_l as i64;
        for t in 0..(2 * span - 1) {
            let kk = t as i64 - l;
            ws.ph1[t] = Complex64::from_polar(1.0, (kk as f64) * phi1);
            ws.ph2[t] = Complex64::from_polar(1.0, (kk as f64) * phi2);
        }

        let mut out = BTreeMap::new();
        for two_l in 0..=self.max_two_l {
            let d = two_l as usize + 1;
            let mut blk = DMatrix::zeros(d, d);
            for i_m in 0..d {
                let m2 = 2 * i_m as i64 - two_l as i64;
                for i_n in 0..d {
                    let n2 = 2 * i_n as i64 - two_l as i64;
                    let s = (m2 + n2) / 2;
                    let dd = (m2 - n2) / 2;
                    let p = self
                        .table
                        .entry_nodes(two_l, i_m, i_n)
                        .expect("frequency tabulated at construction");
                    let mut acc = 0.0;
                    for b in 0..k {
                        acc += ws.pref[b]
                            * p[b]
                            * ws.ive1[b * span + s.unsigned_abs() as usize]
                            * ws.ive2[b * span + dd.unsigned_abs() as usize];
                    }
                    blk[(i_m, i_n)] = i_pow(-dd)
                        * acc
                        * ws.ph1[(s + l) as usize]
                        * ws.ph2[(dd + l) as usize];
                }
            }
            out.insert(two_l, blk);
        }
        out
    }
}

/// Shared precomputation for the grid-quadrature route: the transform grid
/// plus every dataset point rotated to every node.
struct GridCtx {
    epsilon: f64,
    grid: FftGrid,
    rotated: Vec<Vec<Vec<Complex64>>>, // [point][node][coordinate]
}

impl GridCtx {
    fn new(params: &BlockParams, layout: &IrrepLayout, points: &[&[Complex64]]) -> Result<Self> {
        let grid = FftGrid::new(params.k, params.max_two_l)?;
        // One Wigner matrix set per node, applied to every point at that
        // node, so each representation matrix is built exactly once.
        let freqs = layout.distinct_frequencies();
        let dim = layout.ambient_dim();
        let mut rotated = vec![Vec::with_capacity(grid.len()); points.len()];
        for g in grid.nodes() {
            let mut mats = BTreeMap::new();
            for &two_l in &freqs {
                mats.insert(two_l, wigner_d(two_l, g)?);
            }
            for (slot, point) in rotated.iter_mut().zip(points) {
                let mut out = vec![Complex64::new(0.0, 0.0); dim];
                for (two_l, offset) in layout.block_offsets() {
                    let u = &mats[&two_l];
                    let d = two_l as usize + 1;
                    for r in 0..d {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for cix in 0..d {
                            acc += u[(r, cix)] * point[offset + cix];
                        }
                        out[offset + r] = acc;
                    }
                }
                slot.push(out);
            }
        }
        Ok(GridCtx { epsilon: params.epsilon, grid, rotated })
    }

    /// Blocks `Ŵ^ℓ_xy` where `y` is dataset point `j` (pre-rotated) and `x`
    /// is given explicitly.
    fn pair(&self, x: &[Complex64], norm_x: f64, j: usize, norm_y: f64) -> Result<BTreeMap<u32, DMatrix<Complex64>>> {
        let samples: Vec<Complex64> = self.rotated[j]
            .iter()
            .map(|ry| {
                let mut re_inner = 0.0;
                for (xa, ya) in x.iter().zip(ry) {
                    re_inner += (xa.conj() * ya).re;
                }
                Complex64::new((-(norm_x + norm_y - 2.0 * re_inner) / self.epsilon).exp(), 0.0)
            })
            .collect();
        let coeffs = self.grid.forward(&samples)?;
        // forward() indexes coefficients as f̂[n, m] = ∫ w conj(U_{mn}) dη;
        // the block Ŵ_{mn} = ∫ w conj(U_{mn}) dη is its plain transpose.
        let mut out = BTreeMap::new();
        for (two_l, blk) in coeffs.iter() {
            out.insert(two_l, blk.transpose());
        }
        Ok(out)
    }
}

/// The per-frequency Fourier blocks `W^ℓ = [Ŵ^ℓ_ij]` of a dataset's
/// invariant affinity — one Hermitian `N(2ℓ+1) × N(2ℓ+1)` matrix for every
/// doubled frequency up to the band limit — together with the invariant
/// degrees `d_i = Σ_j Ŵ⁰_ij` read off the frequency-0 block.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinitySpectrum {
    epsilon: f64,
    band: u32,
    degrees: Vec<f64>,
    blocks: BTreeMap<u32, DMatrix<Complex64>>,
}

#[derive(Serialize, Deserialize)]
struct BlockWire {
    two_l: u32,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpectrumWire {
    epsilon: f64,
    band: u32,
    degrees: Vec<f64>,
    blocks: Vec<BlockWire>,
}

fn row_sum_degrees(w0: &DMatrix<Complex64>) -> Vec<f64> {
    (0..w0.nrows())
        .map(|i| (0..w0.ncols()).map(|j| w0[(i, j)].re).sum())
        .collect()
}

impl AffinitySpectrum {
    /// Kernel bandwidth the blocks were computed with.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Number of dataset points `N`.
    pub fn n_points(&self) -> usize {
        self.degrees.len()
    }

    /// Largest doubled frequency carried (blocks exist for all `2ℓ ≤ band`).
    pub fn band(&self) -> u32 {
        self.band
    }

    /// Largest doubled frequency present.
    pub fn max_two_l(&self) -> u32 {
        self.blocks.keys().next_back().copied().unwrap_or(0)
    }

    /// The assembled matrix `W^ℓ` for one doubled frequency.
    pub fn block(&self, two_l: u32) -> Option<&DMatrix<Complex64>> {
        self.blocks.get(&two_l)
    }

    /// Iterates `(2ℓ, W^ℓ)` ascending.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &DMatrix<Complex64>)> {
        self.blocks.iter().map(|(&l, m)| (l, m))
    }

    /// The `(2ℓ+1) × (2ℓ+1)` sub-block `Ŵ^ℓ_ij`.
    pub fn pair_block(&self, two_l: u32, i: usize, j: usize) -> Option<DMatrix<Complex64>> {
        let d = two_l as usize + 1;
        self.blocks.get(&two_l).map(|m| m.view((i * d, j * d), (d, d)).into_owned())
    }

    /// Serializes to JSON: bandwidth, band limit, degrees, then each block
    /// row-major with interleaved real and imaginary parts.
    pub fn to_json(&self) -> String {
        let wire = SpectrumWire {
            epsilon: self.epsilon,
            band: self.band,
            degrees: self.degrees.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|(&two_l, m)| BlockWire {
                    two_l,
                    data: (0..m.nrows())
                        .flat_map(|r| (0..m.ncols()).map(move |c| (r, c)))
                        .flat_map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string(&wire).expect("spectrum serialization cannot fail")
    }

    /// Parses the JSON produced by [`Self::to_json`] and validates it: one
    /// block per doubled frequency `0, ..., band` with matching dimensions,
    /// Hermitian to 1e-8, and stored degrees consistent with the
    /// frequency-0 row sums.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] on malformed or inconsistent JSON,
    /// [`Error::Dimension`] on inconsistent block sizes.
    pub fn from_json(text: &str) -> Result<Self> {
        let wire: SpectrumWire = serde_json::from_str(text)
            .map_err(|e| Error::invalid(format!("malformed spectrum JSON: {e}")))?;
        let n = wire.degrees.len();
        if n == 0 {
            return Err(Error::invalid("spectrum JSON has no degrees (no points)"));
        }
        let mut blocks = BTreeMap::new();
        for bw in wire.blocks {
            if bw.two_l > wire.band {
                return Err(Error::invalid(format!(
                    "block 2ℓ = {} exceeds the declared band {}",
                    bw.two_l, wire.band
                )));
            }
            let dim = n * (bw.two_l as usize + 1);
            if bw.data.len() != 2 * dim * dim {
                return Err(Error::dimension(format!(
                    "block 2ℓ = {} has {} numbers, expected {}",
                    bw.two_l,
                    bw.data.len(),
                    2 * dim * dim
                )));
            }
            let m = DMatrix::from_fn(dim, dim, |r, c| {
                let at = 2 * (r * dim + c);
                Complex64::new(bw.data[at], bw.data[at + 1])
            });
            let mut herm: f64 = 0.0;
            for r in 0..dim {
                for c in r..dim {
                    herm = herm.max((m[(r, c)] - m[(c, r)].conj()).norm());
                }
            }
            if !(herm <= 1e-8) {
                return Err(Error::invalid(format!(
                    "block 2ℓ = {} is not Hermitian (defect {herm:.3e})",
                    bw.two_l
                )));
            }
            if blocks.insert(bw.two_l, m).is_some() {
                return Err(Error::invalid(format!("duplicate block 2ℓ = {}", bw.two_l)));
            }
        }
        for two_l in 0..=wire.band {
            if !blocks.contains_key(&two_l) {
                return Err(Error::invalid(format!(
                    "missing block 2ℓ = {two_l} (band {})",
                    wire.band
                )));
            }
        }
        let sums = row_sum_degrees(&blocks[&0]);
        for (i, (&stored, &sum)) in wire.degrees.iter().zip(&sums).enumerate() {
            if !((stored - sum).abs() <= 1e-8 * (1.0 + stored.abs())) {
                return Err(Error::invalid(format!(
                    "stored degree {stored} of point {i} disagrees with the \
                     frequency-0 row sum {sum}"
                )));
            }
        }
        Ok(AffinitySpectrum {
            epsilon: wire.epsilon,
            band: wire.band,
            degrees: wire.degrees,
            blocks,
        })
    }
}

fn place_block(
    big: &mut BTreeMap<u32, DMatrix<Complex64>>,
    two_l: u32,
    i: usize,
    j: usize,
    blk: &DMatrix<Complex64>,
) {
    let d = two_l as usize + 1;
    let m = big.get_mut(&two_l).expect("block allocated");
    for r in 0..d {
        for c in 0..d {
            m[(i * d + r, j * d + c)] = blk[(r, c)];
            if i != j {
                m[(j * d + c, i * d + r)] = blk[(r, c)].conj();
            }
        }
    }
}

/// Computes the per-frequency Fourier blocks of the dataset's invariant
/// affinity for all doubled frequencies `0, ..., max_two_l`.
///
/// # Errors
///
/// Parameter validation errors ([`Error::InvalidArgument`],
/// [`Error::Resolution`]), or any error of the underlying route.
pub fn fourier_blocks(data: &Dataset, params: &BlockParams) -> Result<AffinitySpectrum> {
    params.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("dataset has no points"));
    }
    let n = data.len();
    let norms: Vec<f64> = (0..n).map(|i| data.norm_sq(i)).collect();
    let mut big: BTreeMap<u32, DMatrix<Complex64>> = (0..=params.max_two_l)
        .map(|two_l| {
            let dim = n * (two_l as usize + 1);
            (two_l, DMatrix::zeros(dim, dim))
        })
        .collect();
    match resolve_route(data.layout(), params.method)? {
        Route::Bessel(pairing) => {
            let ctx = BesselCtx::new(params)?;
            for i in 0..n {
                let row: Vec<BTreeMap<u32, DMatrix<Complex64>>> = (i..n)
                    .into_par_iter()
                    .map_init(
                        || ctx.workspace(),
                        |ws, j| {
                            ctx.pair(ws, &pairing, data.point(i), data.point(j), norms[i], norms[j])
                        },
                    )
                    .collect();
                for (j, pair_blocks) in (i..n).zip(&row) {
                    for (&two_l, blk) in pair_blocks {
                        place_block(&mut big, two_l, i, j, blk);
                    }
                }
            }
        }
        Route::Grid => {
            let points: Vec<&[Complex64]> = (0..n).map(|i| data.point(i)).collect();
            let ctx = GridCtx::new(params, data.layout(), &points)?;
            for i in 0..n {
                let row: Vec<BTreeMap<u32, DMatrix<Complex64>>> = (i..n)
                    .into_par_iter()
                    .map(|j| ctx.pair(data.point(i), norms[i], j, norms[j]))
                    .collect::<Result<_>>()?;
                for (j, pair_blocks) in (i..n).zip(&row) {
                    for (&two_l, blk) in pair_blocks {
                        place_block(&mut big, two_l, i, j, blk);
                    }
                }
            }
        }
    }
    let degrees = row_sum_degrees(&big[&0]);
    Ok(AffinitySpectrum { epsilon: params.epsilon, band: params.max_two_l, degrees, blocks: big })
}

/// Blocks `Ŵ^ℓ` for a single explicit pair of points under the given layout.
///
/// # Errors
///
/// Validation errors as in [`fourier_blocks`], plus [`Error::Dimension`] if
/// a point does not match the layout.
pub fn pair_blocks(
    x: &[Complex64],
    y: &[Complex64],
    layout: &IrrepLayout,
    params: &BlockParams,
) -> Result<BTreeMap<u32, DMatrix<Complex64>>> {
    params.validate()?;
    let dim = layout.ambient_dim();
    if x.len() != dim || y.len() != dim {
        return Err(Error::dimension(format!(
            "points have {} and {} coordinates, layout needs {dim}",
            x.len(),
            y.len()
        )));
    }
    let norm = |p: &[Complex64]| p.iter().map(|z| z.norm_sqr()).sum::<f64>();
    match resolve_route(layout, params.method)? {
        Route::Bessel(pairing) => {
            let ctx = BesselCtx::new(params)?;
            let mut ws = ctx.workspace();
            Ok(ctx.pair(&mut ws, &pairing, x, y, norm(x), norm(y)))
        }
        Route::Grid => {
            let ctx = GridCtx::new(params, layout, &[y])?;
            ctx.pair(x, norm(x), 0, norm(y))
        }
    }
}

/// Blocks `Ŵ^ℓ` between one external point and every dataset point, in
/// dataset order. Used for out-of-sample application of the affinity.
///
/// # Errors
///
/// As in [`pair_blocks`].
pub fn point_to_set_blocks(
    point: &[Complex64],
    data: &Dataset,
    params: &BlockParams,
) -> Result<Vec<BTreeMap<u32, DMatrix<Complex64>>>> {
    params.validate()?;
    let dim = data.layout().ambient_dim();
    if point.len() != dim {
        return Err(Error::dimension(format!(
            "external point has {} coordinates, layout needs {dim}",
            point.len()
        )));
    }
    if point.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("external point has a non-finite coordinate"));
    }
    let n = data.len();
    let norm_x: f64 = point.iter().map(|z| z.norm_sqr()).sum();
    let norms: Vec<f64> = (0..n).map(|i| data.norm_sq(i)).collect();
    match resolve_route(data.layout(), params.method)? {
        Route::Bessel(pairing) => {
            let ctx = BesselCtx::new(params)?;
            Ok((0..n)
                .into_par_iter()
                .map_init(
                    || ctx.workspace(),
                    |ws, j| ctx.pair(ws, &pairing, point, data.point(j), norm_x, norms[j]),
                )
                .collect())
        }
        Route::Grid => {
            let points: Vec<&[Complex64]> = (0..n).map(|i| data.point(i)).collect();
            let ctx = GridCtx::new(params, data.layout(), &points)?;
            (0..n)
                .into_par_iter()
                .map(|j| ctx.pair(point, norm_x, j, norms[j]))
                .collect()
        }
    }
}

/// Per-frequency coefficient matrices `c^ℓ` of the pair inner product,
/// grouping the layout's blocks by frequency so that
///
/// ```text
/// ⟨x, U(g) y⟩ = Σ_ℓ Σ_{m,r} c^ℓ_{mr} U^ℓ_{mr}(g) ,
/// ```
///
/// with `⟨a, b⟩ = Σ conj(a) b` and matrix indices ascending from `−ℓ`. The
/// exponent of the invariant affinity is an affine function of these
/// coefficients, which is what makes both block routes work without ever
/// rotating `y` node by node.
///
/// # Errors
///
/// [`Error::Dimension`] if either point does not match the layout.
pub fn pair_inner_coeffs(
    x: &[Complex64],
    y: &[Complex64],
    layout: &IrrepLayout,
) -> Result<BTreeMap<u32, DMatrix<Complex64>>> {
    let dim = layout.ambient_dim();
    if x.len() != dim || y.len() != dim {
        return Err(Error::dimension(format!(
            "points have {} and {} coordinates, layout needs {dim}",
            x.len(),
            y.len()
        )));
    }
    let mut out: BTreeMap<u32, DMatrix<Complex64>> = layout
        .distinct_frequencies()
        .into_iter()
        .map(|two_l| {
            let d = two_l as usize + 1;
            (two_l, DMatrix::zeros(d, d))
        })
        .collect();
    for (two_l, offset) in layout.block_offsets() {
        let d = two_l as usize + 1;
        let c = out.get_mut(&two_l).expect("allocated above");
        for m in 0..d {
            let xm = x[offset + m].conj();
            for r in 0..d {
                c[(m, r)] += xm * y[offset + r];
            }
        }
    }
    Ok(out)
}

/// The invariant affinity `w_xy(g) = exp(−‖x − U(g) y‖²/ε)` evaluated at
/// every node of a quadrature grid, synthesized from the pair's inner
/// coefficients ([`pair_inner_coeffs`]) rather than by rotating `y` at each
/// node. Values below `1e-300` are flushed to exactly zero.
///
/// # Errors
///
/// [`Error::InvalidArgument`] for a non-positive bandwidth,
/// [`Error::Dimension`] if a point does not match the layout.
pub fn affinity_on_grid(
    x: &[Complex64],
    y: &[Complex64],
    layout: &IrrepLayout,
    epsilon: f64,
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "kernel bandwidth must be positive and finite, got {epsilon}"
        )));
    }
    let coeffs = pair_inner_coeffs(x, y, layout)?;
    let base: f64 = x.iter().chain(y).map(|z| z.norm_sqr()).sum();
    let freqs = layout.distinct_frequencies();
    grid.nodes()
        .iter()
        .map(|b| {
            let mut inner = 0.0;
            for &two_l in &freqs {
                let u = wigner_d(two_l, b)?;
                let c = &coeffs[&two_l];
                let d = two_l as usize + 1;
                for m in 0..d {
                    for r in 0..d {
                        inner += (c[(m, r)] * u[(m, r)]).re;
                    }
                }
            }
            // 2 Re⟨x, U(b) y⟩ ≤ ‖x‖² + ‖y‖², so the exponent never overflows.
            let w = ((2.0 * inner - base) / epsilon).exp();
            Ok(if w < 1e-300 { 0.0 } else { w })
        })
        .collect()
}

/// Applies the normalized invariant GL to a scalar ambient function by
/// direct quadrature, estimating the Laplace–Beltrami value at `(i, g)`:
///
/// ```text
/// (4/ε) [ Σ_{j≠i} Σ_b μ_b w_ij(b) f(U(b) x_j) / Σ_{j≠i} Σ_b μ_b w_ij(b) − f(U(g) x_i) ] ,
/// ```
///
/// where `w_ij(b) = exp(−‖U(g) x_i − U(b) x_j‖²/ε)`, `b` runs over the grid
/// nodes and `μ_b` are the grid weights. The query point itself is left out
/// of both sums: with a kernel narrower than the sample spacing its own
/// mass would dominate the average and saturate the estimate. The kernel average minus the center
/// value recovers the analyst's Laplace–Beltrami operator, whose eigenvalues
/// on nonconstant harmonics are negative; the matrix form `I − D⁻¹W` used by
/// [`eig_normalized`] is its negative and is positive semidefinite. The sums over points run
/// sequentially per point (parallel across points, combined in dataset
/// order), so the result is independent of the thread count.
///
/// # Errors
///
/// [`Error::InvalidArgument`] for bad parameters,
/// [`Error::DegenerateKernel`] if the denominator is not strictly positive.
pub fn apply_normalized<F>(
    data: &Dataset,
    f: F,
    i: usize,
    g: &GroupElement,
    epsilon: f64,
    grid: &QuadratureGrid,
) -> Result<f64>
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "kernel bandwidth must be positive and finite, got {epsilon}"
        )));
    }
    if i >= data.len() {
        return Err(Error::invalid(format!(
            "point index {i} out of range for N = {}",
            data.len()
        )));
    }
    let layout = data.layout();
    let x_g = act(g, data.point(i), layout)?;
    let f_center = f(&x_g);
    // One representation-matrix set per node, shared across all points.
    let freqs = layout.distinct_frequencies();
    let node_mats: Vec<BTreeMap<u32, DMatrix<Complex64>>> = grid
        .nodes()
        .iter()
        .map(|b| {
            freqs
                .iter()
                .map(|&two_l| Ok((two_l, wigner_d(two_l, b)?)))
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let dim = layout.ambient_dim();
    let terms: Vec<(f64, f64)> = (0..data.len())
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); dim],
            |rot, j| {
                // The averaged sums run over the other points only: with a
                // kernel narrower than the sample spacing, the query's own
                // mass would otherwise dominate the average and saturate
                // the estimate.
                if j == i {
                    return (0.0, 0.0);
                }
                let xj = data.point(j);
                // Accumulating μ·w·(f − f_center) instead of μ·w·f keeps
                // constants at exactly zero and avoids cancelling two large
                // sums; the quotient below is algebraically the same.
                let mut num = 0.0;
                let mut den = 0.0;
                for (&mu, mats) in grid.weights().iter().zip(&node_mats) {
                    for (two_l, offset) in layout.block_offsets() {
                        let u = &mats[&two_l];
                        let d = two_l as usize + 1;
                        for r in 0..d {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for c in 0..d {
                                acc += u[(r, c)] * xj[offset + c];
                            }
                            rot[offset + r] = acc;
                        }
                    }
                    let mut dist = 0.0;
                    for (a, b) in x_g.iter().zip(rot.iter()) {
                        dist += (a - b).norm_sqr();
                    }
                    let mut w = (-dist / epsilon).exp();
                    if w < 1e-300 {
                        w = 0.0;
                    }
                    if w > 0.0 {
                        den += mu * w;
                        num += mu * w * (f(rot) - f_center);
                    }
                }
                (num, den)
            },
        )
        .collect();
    let num: f64 = terms.iter().map(|t| t.0).sum();
    let den: f64 = terms.iter().map(|t| t.1).sum();
    if !(den.is_finite() && den > 0.0) {
        return Err(Error::DegenerateKernel(format!(
            "quadrature denominator {den} at point {i}; the kernel bandwidth \
             is too small for the point spacing"
        )));
    }
    Ok(4.0 / epsilon * (num / den))
}

/// Invariant degrees `d_i = Σ_j Ŵ⁰_ij` (real, one per point).
///
/// # Errors
///
/// [`Error::DegenerateKernel`] if any degree is not strictly positive —
/// the bandwidth is too small for the point spacing.
pub fn degrees(spectrum: &AffinitySpectrum) -> Result<Vec<f64>> {
    for (i, &d) in spectrum.degrees.iter().enumerate() {
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::DegenerateKernel(format!(
                "point {i} has degree {d}; the kernel bandwidth is too small for the point spacing"
            )));
        }
    }
    Ok(spectrum.degrees.clone())
}

/// Eigendecomposition of one frequency block of an invariant GL.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    /// Doubled frequency of the block.
    pub two_l: u32,
    /// Eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors as columns, aligned with the eigenvalues.
    pub eigenvectors: DMatrix<Complex64>,
}

/// Full invariant-GL eigendecomposition: one [`BlockEigen`] per frequency.
#[derive(Debug, Clone)]
pub struct GglEigen {
    /// Kernel bandwidth the blocks were computed with.
    pub epsilon: f64,
    /// Number of dataset points.
    pub n_points: usize,
    /// True for the normalized (random-walk) problem.
    pub normalized: bool,
    /// Invariant degrees.
    pub degrees: Vec<f64>,
    /// Per-frequency results.
    pub blocks: BTreeMap<u32, BlockEigen>,
}

/// Solves the unnormalized problems `(D − W^ℓ) v = λ v` for every frequency
/// in the spectrum.
///
/// # Errors
///
/// Degree validation errors from [`degrees`], or [`Error::Numeric`] if an
/// eigensolve fails.
pub fn eig_unnormalized(spectrum: &AffinitySpectrum) -> Result<GglEigen> {
    let deg = degrees(spectrum)?;
    let n = spectrum.n_points();
    let mut blocks = BTreeMap::new();
    for (two_l, w) in spectrum.iter() {
        let d = two_l as usize + 1;
        let mut lap = -w.clone();
        for i in 0..n {
            for r in 0..d {
                lap[(i * d + r, i * d + r)] += Complex64::new(deg[i], 0.0);
            }
        }
        let (eigenvalues, eigenvectors) = hermitian_eigen(&lap)?;
        blocks.insert(two_l, BlockEigen { two_l, eigenvalues, eigenvectors });
    }
    Ok(GglEigen {
        epsilon: spectrum.epsilon(),
        n_points: n,
        normalized: false,
        degrees: deg,
        blocks,
    })
}

/// Solves the normalized problems: eigenvalues of
/// `I − D^{−1/2} W^ℓ D^{−1/2}`, eigenvectors reported in random-walk gauge
/// `v = D^{−1/2} u`, unit-normalized and deterministically phased.
///
/// # Errors
///
/// As in [`eig_unnormalized`].
pub fn eig_normalized(spectrum: &AffinitySpectrum) -> Result<GglEigen> {
    let deg = degrees(spectrum)?;
    let n = spectrum.n_points();
    let inv_sqrt: Vec<f64> = deg.iter().map(|&d| 1.0 / d.sqrt()).collect();
    let mut blocks = BTreeMap::new();
    for (two_l, w) in spectrum.iter() {
        let d = two_l as usize + 1;
        let dim = n * d;
        let mut lap = DMatrix::from_fn(dim, dim, |r, c| {
            -w[(r, c)] * (inv_sqrt[r / d] * inv_sqrt[c / d])
        });
        for t in 0..dim {
            lap[(t, t)] += Complex64::new(1.0, 0.0);
        }
        let (eigenvalues, mut vectors) = hermitian_eigen(&lap)?;
        // Random-walk gauge: scale rows by D^{−1/2}, renormalize columns,
        // re-fix phases (the scaling can move the largest entry).
        for r in 0..dim {
            let s = inv_sqrt[r / d];
            for c in 0..dim {
                vectors[(r, c)] *= s;
            }
        }
        for c in 0..dim {
            let norm = vectors.column(c).norm();
            if norm > 0.0 {
                for r in 0..dim {
                    vectors[(r, c)] /= Complex64::new(norm, 0.0);
                }
            }
        }
        fix_phases(&mut vectors);
        blocks.insert(two_l, BlockEigen { two_l, eigenvalues, eigenvectors: vectors });
    }
    Ok(GglEigen {
        epsilon: spectrum.epsilon(),
        n_points: n,
        normalized: true,
        degrees: deg,
        blocks,
    })
}

/// One entry of the joint eigenvalue enumeration: block eigenvector
/// `vector` of frequency `two_l`, lifted through free row index `column`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenIndex {
    /// The eigenvalue.
    pub eigenvalue: f64,
    /// Doubled frequency of the originating block.
    pub two_l: u32,
    /// Column index of the eigenvector within its block decomposition.
    pub vector: usize,
    /// Free row index `m` (each block eigenvector yields `2ℓ+1` product-space
    /// eigenfunctions).
    pub column: usize,
}

/// Enumerates all product-space eigenvalues ascending: each block eigenvalue
/// appears `2ℓ+1` times. Ties break by `(2ℓ, vector, column)`.
pub fn joint_enumeration(eigen: &GglEigen) -> Vec<EigenIndex> {
    let mut all = Vec::new();
    for (&two_l, blk) in &eigen.blocks {
        let d = two_l as usize + 1;
        for (vector, &eigenvalue) in blk.eigenvalues.iter().enumerate() {
            for column in 0..d {
                all.push(EigenIndex { eigenvalue, two_l, vector, column });
            }
        }
    }
    all.sort_by(|a, b| {
        a.eigenvalue
            .total_cmp(&b.eigenvalue)
            .then(a.two_l.cmp(&b.two_l))
            .then(a.vector.cmp(&b.vector))
            .then(a.column.cmp(&b.column))
    });
    all
}

/// Evaluates the product-space eigenfunction `Φ_{ℓ,m,n}` of an invariant-GL
/// eigensystem at dataset index `i` and group element `g`:
///
/// ```text
/// Φ_{ℓ,m,n}(i, g) = Σ_r v_n[i(2ℓ+1) + r] · U^ℓ_{rm}(g⁻¹)
///                 = Σ_r v_n[i(2ℓ+1) + r] · conj(U^ℓ_{mr}(g)) ,
/// ```
///
/// where `v_n` is the `n`-th eigenvector of the `2ℓ` block and `i_m` the
/// free row index (`0 ≤ i_m ≤ 2ℓ`, counting up from `m = −ℓ`).
///
/// # Errors
///
/// [`Error::InvalidArgument`] if the frequency is absent from the system or
/// an index is out of range.
pub fn eval_eigenfunction(
    system: &GglEigen,
    two_l: u32,
    i_m: usize,
    n: usize,
    i: usize,
    g: &GroupElement,
) -> Result<Complex64> {
    let blk = system.blocks.get(&two_l).ok_or_else(|| {
        Error::invalid(format!("eigensystem has no frequency block 2ℓ = {two_l}"))
    })?;
    let d = two_l as usize + 1;
    if i_m >= d || n >= blk.eigenvalues.len() || i >= system.n_points {
        return Err(Error::invalid(format!(
            "indices (row {i_m}, vector {n}, point {i}) out of range for \
             N = {}, 2ℓ+1 = {d}, {} eigenvectors",
            system.n_points,
            blk.eigenvalues.len()
        )));
    }
    let u = wigner_d(two_l, g)?;
    let v = blk.eigenvectors.column(n);
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..d {
        acc += v[i * d + r] * u[(i_m, r)].conj();
    }
    Ok(acc)
}
