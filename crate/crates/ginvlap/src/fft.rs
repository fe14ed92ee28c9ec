//! Generalized Fourier analysis on SU(2).
//!
//! The Fourier coefficient matrices of `f : SU(2) → C` in the convention of
//! this crate are
//!
//! ```text
//! f̂^ℓ_{nm} = ∫ f(g) conj(U^ℓ_{mn}(g)) dη(g) ,      f(g) = Σ_ℓ (2ℓ+1) tr(f̂^ℓ U^ℓ(g)) ,
//! ```
//!
//! with the sum over `ℓ ∈ {0, 1/2, 1, ...}`. For `f` band-limited to
//! `2ℓ ≤ B` both directions are *exact* on the product grid of [`FftGrid`]:
//!
//! * `A = 2K` equispaced `α` nodes on `[0, 2π)`,
//! * `K` Gauss–Legendre nodes in `x = cos β`,
//! * `C = 4K` equispaced `γ` nodes on `[0, 4π)`,
//!
//! provided `B ≤ K − 1`. The forward transform factorizes into a length-`C`
//! DFT in `γ`, a length-`A` DFT in `α` (plain for integer frequencies,
//! twisted by `e^{iπa/A}` for half-integer ones), and a Gauss–Legendre
//! contraction against the tabulated kernels `P^ℓ_{mn}(x_b)`; the total cost
//! is `O(K³ log K + B³ K)` instead of the naive `O(K³ B³)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::su2::GroupElement;
use crate::wigner::{i_pow, wigner_d, WignerTable, MAX_TWO_L};

use std::f64::consts::PI;

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on
/// `[−1, 1]`, accurate to machine precision.
///
/// # Errors
///
/// [`Error::InvalidArgument`] if `n = 0`.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::invalid("Gauss–Legendre rule needs at least one node"));
    }
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th root from the top, then Newton.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-15 {
                let (p2, d2) = legendre_with_derivative(n, z);
                dp = d2;
                z -= p2 / d2;
                break;
            }
        }
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
            dp = legendre_with_derivative(n, 0.0).1;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        xs[i] = -z;
        ws[i] = w;
        xs[n - 1 - i] = z;
        ws[n - 1 - i] = w;
    }
    Ok((xs, ws))
}

/// Legendre `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut cur = x;
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * cur - (kf - 1.0) * prev) / kf;
        prev = cur;
        cur = next;
    }
    let dp = n as f64 * (x * cur - prev) / (x * x - 1.0);
    (cur, dp)
}

/// Fourier coefficients of a band-limited function: one `(2ℓ+1) × (2ℓ+1)`
/// complex matrix per doubled frequency, row index `n` and column index `m`
/// both ascending from `−ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    blocks: BTreeMap<u32, DMatrix<Complex64>>,
}

impl FourierCoeffs {
    /// All-zero coefficients for every doubled frequency `0, ..., max_two_l`.
    pub fn zeros(max_two_l: u32) -> Self {
        let blocks = (0..=max_two_l)
            .map(|two_l| {
                let d = two_l as usize + 1;
                (two_l, DMatrix::zeros(d, d))
            })
            .collect();
        FourierCoeffs { blocks }
    }

    /// Wraps explicit blocks (keys are doubled frequencies; missing ones are
    /// treated as zero).
    ///
    /// # Errors
    ///
    /// [`Error::Dimension`] if a block for `2ℓ` is not `(2ℓ+1) × (2ℓ+1)`;
    /// [`Error::InvalidArgument`] if a frequency exceeds the supported range.
    pub fn from_blocks(blocks: BTreeMap<u32, DMatrix<Complex64>>) -> Result<Self> {
        for (&two_l, m) in &blocks {
            if two_l > MAX_TWO_L {
                return Err(Error::invalid(format!(
                    "doubled frequency {two_l} exceeds the supported maximum {MAX_TWO_L}"
                )));
            }
            let d = two_l as usize + 1;
            if m.nrows() != d || m.ncols() != d {
                return Err(Error::dimension(format!(
                    "block for 2ℓ = {two_l} must be {d}×{d}, got {}×{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(FourierCoeffs { blocks })
    }

    /// Largest doubled frequency present (0 when empty).
    pub fn max_two_l(&self) -> u32 {
        self.blocks.keys().next_back().copied().unwrap_or(0)
    }

    /// The block for one doubled frequency, if present.
    pub fn block(&self, two_l: u32) -> Option<&DMatrix<Complex64>> {
        self.blocks.get(&two_l)
    }

    /// Mutable access to one block.
    pub fn block_mut(&mut self, two_l: u32) -> Option<&mut DMatrix<Complex64>> {
        self.blocks.get_mut(&two_l)
    }

    /// Iterates `(2ℓ, block)` in ascending frequency order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, &DMatrix<Complex64>)> {
        self.blocks.iter().map(|(&l, m)| (l, m))
    }

    /// Synthesis `f(g) = Σ_ℓ (2ℓ+1) tr(f̂^ℓ U^ℓ(g))`.
    pub fn evaluate(&self, g: &GroupElement) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (&two_l, blk) in &self.blocks {
            let u = wigner_d(two_l, g).expect("validated frequency");
            let d = two_l as usize + 1;
            let mut tr = Complex64::new(0.0, 0.0);
            for i_n in 0..d {
                for i_m in 0..d {
                    tr += blk[(i_n, i_m)] * u[(i_m, i_n)];
                }
            }
            total += (two_l as f64 + 1.0) * tr;
        }
        total
    }

    /// Plancherel energy `Σ_ℓ (2ℓ+1) ‖f̂^ℓ‖_F² = ∫ |f|² dη`.
    pub fn energy(&self) -> f64 {
        self.blocks
            .iter()
            .map(|(&l, m)| (l as f64 + 1.0) * m.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum()
    }

    /// Largest entrywise distance to `other`, treating absent blocks as zero.
    pub fn max_block_distance(&self, other: &FourierCoeffs) -> f64 {
        let zero_for = |two_l: u32| {
            let d = two_l as usize + 1;
            DMatrix::<Complex64>::zeros(d, d)
        };
        let keys: std::collections::BTreeSet<u32> =
            self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        let mut worst = 0.0_f64;
        for two_l in keys {
            let a = self.block(two_l).cloned().unwrap_or_else(|| zero_for(two_l));
            let b = other.block(two_l).cloned().unwrap_or_else(|| zero_for(two_l));
            for (x, y) in a.iter().zip(b.iter()) {
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }
}

/// Synthesis of a coefficient set at one group element (see
/// [`FourierCoeffs::evaluate`]).
pub fn synthesize(coeffs: &FourierCoeffs, g: &GroupElement) -> Complex64 {
    coeffs.evaluate(g)
}

/// Sampling grid and precomputed plans for the forward transform, supporting
/// every doubled frequency up to its band limit.
pub struct FftGrid {
    k: usize,
    max_two_l: u32,
    gl_x: Vec<f64>,
    gl_w: Vec<f64>,
    nodes: Vec<GroupElement>,
    weights: Vec<f64>,
    table: WignerTable,
    fft_a: Arc<dyn Fft<f64>>,
    fft_c: Arc<dyn Fft<f64>>,
    twiddle_a: Vec<Complex64>,
}

impl fmt::Debug for FftGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftGrid")
            .field("k", &self.k)
            .field("max_two_l", &self.max_two_l)
            .field("nodes", &self.nodes.len())
            .finish()
    }
}

impl FftGrid {
    /// Builds the grid with `k` β nodes (so `2k` in `α` and `4k` in `γ`),
    /// supporting doubled frequencies up to `max_two_l`.
    ///
    /// # Errors
    ///
    /// [`Error::Resolution`] unless `max_two_l ≤ k − 1`.
    pub fn new(k: usize, max_two_l: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::resolution("grid needs at least one β node"));
        }
        if max_two_l as usize > k - 1 {
            return Err(Error::resolution(format!(
                "band 2ℓ = {max_two_l} needs at least {} β nodes, got {k}",
                max_two_l + 1
            )));
        }
        let (a_n, c_n) = (2 * k, 4 * k);
        let (gl_x, gl_w) = gauss_legendre(k)?;
        let freqs: Vec<u32> = (0..=max_two_l).collect();
        let table = WignerTable::new(&freqs, &gl_x)?;
        let mut nodes = Vec::with_capacity(a_n * k * c_n);
        let mut weights = Vec::with_capacity(a_n * k * c_n);
        let w_norm = 1.0 / (2.0 * a_n as f64 * c_n as f64);
        for a in 0..a_n {
            let alpha = PI * a as f64 / k as f64;
            for b in 0..k {
                let beta = gl_x[b].clamp(-1.0, 1.0).acos();
                for c in 0..c_n {
                    let gamma = PI * c as f64 / k as f64;
                    nodes.push(GroupElement::from_euler(alpha, beta, gamma)?);
                    weights.push(gl_w[b] * w_norm);
                }
            }
        }
        let mut planner = FftPlanner::new();
        let fft_a = planner.plan_fft_inverse(a_n);
        let fft_c = planner.plan_fft_inverse(c_n);
        let twiddle_a = (0..a_n)
            .map(|a| Complex64::from_polar(1.0, PI * a as f64 / a_n as f64))
            .collect();
        Ok(FftGrid {
            k,
            max_two_l,
            gl_x,
            gl_w,
            nodes,
            weights,
            table,
            fft_a,
            fft_c,
            twiddle_a,
        })
    }

    /// Smallest grid supporting the given doubled band limit.
    ///
    /// # Errors
    ///
    /// Propagates [`FftGrid::new`] errors.
    pub fn for_band(max_two_l: u32) -> Result<Self> {
        Self::new(max_two_l as usize + 1, max_two_l)
    }

    /// Number of β nodes `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Largest supported doubled frequency.
    pub fn max_two_l(&self) -> u32 {
        self.max_two_l
    }

    /// Total node count `8K³`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the grid has no nodes (never, for a constructed grid).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Grid nodes, `(a, b, c)` row-major with `c` fastest.
    pub fn nodes(&self) -> &[GroupElement] {
        &self.nodes
    }

    /// Haar weights aligned with [`Self::nodes`]; they sum to one.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Flat index of node `(a, b, c)`.
    pub fn node_index(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.k + b) * 4 * self.k + c
    }

    /// Gauss–Legendre nodes in `x = cos β` (ascending).
    pub fn gl_nodes(&self) -> &[f64] {
        &self.gl_x
    }

    /// Gauss–Legendre weights.
    pub fn gl_weights(&self) -> &[f64] {
        &self.gl_w
    }

    /// The tabulated kernels `P^ℓ_{mn}(x_b)` for all supported frequencies.
    pub fn wigner_table(&self) -> &WignerTable {
        &self.table
    }

    /// Evaluates `f` at every node, in node order.
    pub fn sample<F: FnMut(&GroupElement) -> Complex64>(&self, mut f: F) -> Vec<Complex64> {
        self.nodes.iter().map(|g| f(g)).collect()
    }

    /// Forward transform of samples in node order: exact coefficients for
    /// every doubled frequency up to the band limit.
    ///
    /// # Errors
    ///
    /// [`Error::Dimension`] if `samples.len()` is not the node count.
    pub fn forward(&self, samples: &[Complex64]) -> Result<FourierCoeffs> {
        if samples.len() != self.nodes.len() {
            return Err(Error::dimension(format!(
                "expected {} samples, got {}",
                self.nodes.len(),
                samples.len()
            )));
        }
        let k = self.k;
        let (a_n, c_n) = (2 * k, 4 * k);
        let l = self.max_two_l as i64;
        let span = (2 * l + 1) as usize;

        // γ stage: an unscaled positive-exponent DFT along each (a, b) row.
        let mut t1 = samples.to_vec();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft_c.get_inplace_scratch_len()];
        for row in t1.chunks_exact_mut(c_n) {
            self.fft_c.process_with_scratch(row, &mut scratch);
        }

        // α stage: per (b, n₂), a plain DFT for even n₂-parity columns and a
        // twisted one (input times e^{iπa/A}) for odd, giving
        // T[m₂][n₂][b] = Σ_{a,c} f e^{i m α_a} e^{i n γ_c}.
        let mut t2 = vec![Complex64::new(0.0, 0.0); span * span * k];
        let mut va = vec![Complex64::new(0.0, 0.0); a_n];
        let mut scratch_a = vec![Complex64::new(0.0, 0.0); self.fft_a.get_inplace_scratch_len()];
        for b in 0..k {
            for n2 in -l..=l {
                let bin_n = n2.rem_euclid(c_n as i64) as usize;
                for (a, slot) in va.iter_mut().enumerate() {
                    *slot = t1[(a * k + b) * c_n + bin_n];
                }
                let odd = n2.rem_euclid(2) == 1;
                if odd {
                    for (a, slot) in va.iter_mut().enumerate() {
                        *slot *= self.twiddle_a[a];
                    }
                }
                self.fft_a.process_with_scratch(&mut va, &mut scratch_a);
                // Walk every m₂ in [−l, l] with the parity of n₂.
                let mut m2 = -l;
                if (m2 - n2).rem_euclid(2) != 0 {
                    m2 += 1;
                }
                while m2 <= l {
                    let q = if odd { (m2 - 1) / 2 } else { m2 / 2 };
                    let bin_m = q.rem_euclid(a_n as i64) as usize;
                    t2[((m2 + l) as usize * span + (n2 + l) as usize) * k + b] = va[bin_m];
                    m2 += 2;
                }
            }
        }

        // β stage: Gauss–Legendre contraction against the tabulated kernels,
        // with the prefactor conj(i^{m−n}) / (2AC) of the analysis formula.
        let scale = 1.0 / (2.0 * a_n as f64 * c_n as f64);
        let mut blocks = BTreeMap::new();
        for two_l in 0..=self.max_two_l {
            let d = two_l as usize + 1;
            let mut blk = DMatrix::zeros(d, d);
            for i_n in 0..d {
                let n2 = 2 * i_n as i64 - two_l as i64;
                for i_m in 0..d {
                    let m2 = 2 * i_m as i64 - two_l as i64;
                    let p = self
                        .table
                        .entry_nodes(two_l, i_m, i_n)
                        .expect("frequency tabulated at construction");
                    let row = &t2[((m2 + l) as usize * span + (n2 + l) as usize) * k..][..k];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..k {
                        acc += self.gl_w[b] * p[b] * row[b];
                    }
                    blk[(i_n, i_m)] = i_pow(-((m2 - n2) / 2)) * scale * acc;
                }
            }
            blocks.insert(two_l, blk);
        }
        Ok(FourierCoeffs { blocks })
    }
}
