//! Irreducible unitary representations of SU(2).
//!
//! The representation of frequency `ℓ ∈ {0, 1/2, 1, 3/2, ...}` acts on
//! `C^{2ℓ+1}`; its matrix in the Euler chart of [`crate::su2`] is
//!
//! ```text
//! U^ℓ_{mn}(α, β, γ) = i^{m−n} e^{−imα} P^ℓ_{mn}(cos β) e^{−inγ} ,
//! ```
//!
//! with row index `m` and column index `n` both running over
//! `−ℓ, −ℓ+1, ..., ℓ` in ascending order (matrix row `i` holds `m = −ℓ + i`).
//! The real kernel is expressed through a Jacobi polynomial:
//!
//! ```text
//! P^ℓ_{mn}(cos β) = √[ (ℓ−m)!(ℓ+m)! / ((ℓ−n)!(ℓ+n)!) ]
//!                   · sin^{m−n}(β/2) cos^{m+n}(β/2) · P^{(m−n, m+n)}_{ℓ−m}(cos β) ,
//! ```
//!
//! valid for `m ≥ |n|` and extended everywhere by the symmetries
//! `P^ℓ_{mn} = (−1)^{m−n} P^ℓ_{nm}` and `P^ℓ_{mn} = P^ℓ_{−n,−m}`.
//! At `ℓ = 1/2` the matrix coincides exactly with the fundamental 2×2 matrix
//! of the group element, which pins every sign and ordering convention in
//! this crate.
//!
//! All frequencies are passed *doubled* (`two_l = 2ℓ`, `two_m = 2m`, ...) so
//! half-integers stay exact integers; `two_m` must have the parity of
//! `two_l`.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::su2::GroupElement;

/// Largest supported doubled frequency (bounds the factorial table).
pub const MAX_TWO_L: u32 = 1000;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(MAX_TWO_L as usize + 2);
        t.push(0.0);
        for n in 1..=(MAX_TWO_L as usize + 1) {
            t.push(t[n - 1] + (n as f64).ln());
        }
        t
    })
}

fn ln_factorial(n: u32) -> f64 {
    ln_factorials()[n as usize]
}

/// `i^k` for signed integer `k`.
pub(crate) fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Falling factorial `z (z−1) ⋯ (z−k+1)`.
fn falling(z: i64, k: u32) -> f64 {
    (0..k as i64).map(|i| (z - i) as f64).product()
}

/// Generalized binomial `C(z, j)` for integer `z` (possibly negative).
fn binom_general(z: i64, j: u32) -> f64 {
    let mut num = 1.0;
    let mut den = 1.0;
    for i in 0..j as i64 {
        num *= (z - i) as f64;
        den *= (i + 1) as f64;
    }
    num / den
}

/// Evaluates the Jacobi polynomial `P^{(a,b)}_n(x)` for integer parameters,
/// including negative ones.
///
/// For `a, b ≥ 0` the stable three-term recurrence is used. Negative
/// parameters are removed with the exact identities
///
/// ```text
/// P^{(−k,b)}_n(x) = [(n+b)(n+b−1)⋯(n+b−k+1)] / [n(n−1)⋯(n−k+1)]
///                   · ((x−1)/2)^k · P^{(k,b)}_{n−k}(x)        (k ≤ n),
/// P^{(a,b)}_n(x)  = (−1)^n P^{(b,a)}_n(−x),
/// ```
///
/// falling back to the finite binomial series when neither applies.
pub fn jacobi(n: u32, a: i32, b: i32, x: f64) -> f64 {
    if a >= 0 && b >= 0 {
        return jacobi_recurrence(n, a as f64, b as f64, x);
    }
    if a < 0 {
        let k = (-a) as u32;
        if k <= n {
            let num = falling(n as i64 + b as i64, k);
            let den = falling(n as i64, k);
            let factor = ((x - 1.0) / 2.0).powi(k as i32);
            return num / den * factor * jacobi(n - k, k as i32, b, x);
        }
    }
    if b < 0 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let k = (-b) as u32;
        if k <= n || a >= 0 {
            return sign * jacobi(n, b, a, -x);
        }
    }
    // Remaining degenerate cases (|parameter| exceeding the degree on both
    // sides): the finite series in powers of (x∓1)/2 is exact.
    (0..=n)
        .map(|s| {
            binom_general(n as i64 + a as i64, n - s)
                * binom_general(n as i64 + b as i64, s)
                * ((x - 1.0) / 2.0).powi(s as i32)
                * ((x + 1.0) / 2.0).powi((n - s) as i32)
        })
        .sum()
}

fn jacobi_recurrence(n: u32, a: f64, b: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for m in 2..=n as u64 {
        let m = m as f64;
        let c1 = 2.0 * m * (m + a + b) * (2.0 * m + a + b - 2.0);
        let c2 = (2.0 * m + a + b - 1.0) * (a * a - b * b);
        let c3 = (2.0 * m + a + b - 1.0) * (2.0 * m + a + b) * (2.0 * m + a + b - 2.0);
        let c4 = 2.0 * (m + a - 1.0) * (m + b - 1.0) * (2.0 * m + a + b);
        let next = ((c2 + c3 * x) * cur - c4 * prev) / c1;
        prev = cur;
        cur = next;
    }
    cur
}

fn check_indices(two_l: u32, two_m: i32, two_n: i32) -> Result<()> {
    if two_l > MAX_TWO_L {
        return Err(Error::invalid(format!(
            "doubled frequency {two_l} exceeds the supported maximum {MAX_TWO_L}"
        )));
    }
    let l = two_l as i32;
    if two_m.abs() > l || two_n.abs() > l {
        return Err(Error::invalid(format!(
            "indices (2m, 2n) = ({two_m}, {two_n}) out of range for 2ℓ = {two_l}"
        )));
    }
    if (two_m - l) % 2 != 0 || (two_n - l) % 2 != 0 {
        return Err(Error::invalid(format!(
            "indices (2m, 2n) = ({two_m}, {two_n}) must have the parity of 2ℓ = {two_l}"
        )));
    }
    Ok(())
}

/// Core evaluation of `P^ℓ_{mn}` given `cos β`, `sin(β/2)` and `cos(β/2)`.
///
/// Indices are doubled and must be pre-validated.
fn little_d_core(two_l: u32, two_m: i32, two_n: i32, x: f64, half_sin: f64, half_cos: f64) -> f64 {
    // Reduce with P_{mn} = (−1)^{m−n} P_{nm} and P_{mn} = P_{−n,−m} to a
    // representative with m ≥ |n| so the Jacobi parameters are non-negative.
    let (tm, tn, sign) = if two_m >= two_n.abs() {
        (two_m, two_n, 1.0)
    } else if two_n >= two_m.abs() {
        (two_n, two_m, neg_one_pow((two_m - two_n) / 2))
    } else if -two_m >= two_n.abs() {
        (-two_m, -two_n, neg_one_pow((two_m - two_n) / 2))
    } else {
        (-two_n, -two_m, 1.0)
    };
    debug_assert!(tm >= tn.abs());
    let a = (tm - tn) / 2; // m − n ≥ 0
    let b = (tm + tn) / 2; // m + n ≥ 0
    let l_minus_m = (two_l as i32 - tm) as u32 / 2;
    let l_plus_m = (two_l as i32 + tm) as u32 / 2;
    let l_minus_n = (two_l as i32 - tn) as u32 / 2;
    let l_plus_n = (two_l as i32 + tn) as u32 / 2;
    let ln_pref = 0.5
        * (ln_factorial(l_minus_m) + ln_factorial(l_plus_m)
            - ln_factorial(l_minus_n)
            - ln_factorial(l_plus_n));
    sign * ln_pref.exp()
        * half_sin.powi(a)
        * half_cos.powi(b)
        * jacobi(l_minus_m, a, b, x)
}

fn neg_one_pow(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The real Wigner kernel `P^ℓ_{mn}(cos β)`, with doubled indices.
///
/// # Errors
///
/// [`Error::InvalidArgument`] if the indices are out of range or have the
/// wrong parity, or `β` is not finite.
pub fn little_d(two_l: u32, two_m: i32, two_n: i32, beta: f64) -> Result<f64> {
    check_indices(two_l, two_m, two_n)?;
    if !beta.is_finite() {
        return Err(Error::invalid(format!("beta must be finite, got {beta}")));
    }
    let half = beta / 2.0;
    Ok(little_d_core(two_l, two_m, two_n, beta.cos(), half.sin(), half.cos()))
}

/// Same as [`little_d`] but parametrized by `x = cos β ∈ [−1, 1]`.
///
/// # Errors
///
/// [`Error::InvalidArgument`] on bad indices, [`Error::Domain`] for `x`
/// outside `[−1, 1]`.
pub fn little_d_from_cos(two_l: u32, two_m: i32, two_n: i32, x: f64) -> Result<f64> {
    check_indices(two_l, two_m, two_n)?;
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("cos β must lie in [−1, 1], got {x}")));
    }
    let half_sin = ((1.0 - x) / 2.0).sqrt();
    let half_cos = ((1.0 + x) / 2.0).sqrt();
    Ok(little_d_core(two_l, two_m, two_n, x, half_sin, half_cos))
}

/// The full matrix `U^ℓ(g)` of the irreducible representation of doubled
/// frequency `two_l`, as a dense `(2ℓ+1) × (2ℓ+1)` complex matrix with rows
/// and columns ordered by ascending `m, n`.
///
/// # Errors
///
/// [`Error::InvalidArgument`] if `two_l` exceeds [`MAX_TWO_L`].
pub fn wigner_d(two_l: u32, g: &GroupElement) -> Result<DMatrix<Complex64>> {
    if two_l > MAX_TWO_L {
        return Err(Error::invalid(format!(
            "doubled frequency {two_l} exceeds the supported maximum {MAX_TWO_L}"
        )));
    }
    let d = two_l as usize + 1;
    let (alpha, beta, gamma) = (g.alpha(), g.beta(), g.gamma());
    let half = beta / 2.0;
    let (x, hs, hc) = (beta.cos(), half.sin(), half.cos());
    let mut out = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for i in 0..d {
        let two_m = 2 * i as i32 - two_l as i32;
        let m = two_m as f64 / 2.0;
        let ea = Complex64::from_polar(1.0, -m * alpha);
        for j in 0..d {
            let two_n = 2 * j as i32 - two_l as i32;
            let n = two_n as f64 / 2.0;
            let eg = Complex64::from_polar(1.0, -n * gamma);
            let p = little_d_core(two_l, two_m, two_n, x, hs, hc);
            out[(i, j)] = i_pow(((two_m - two_n) / 2) as i64) * ea * eg * p;
        }
    }
    Ok(out)
}

/// Precomputed table of `P^ℓ_{mn}(x_b)` over a fixed list of `cos β` nodes,
/// for a set of doubled frequencies.
///
/// For each frequency the values are stored flat as `[im][in][b]` with the
/// node index fastest, so per-entry node sums read contiguous memory.
#[derive(Debug, Clone)]
pub struct WignerTable {
    n_beta: usize,
    tables: BTreeMap<u32, Vec<f64>>,
}

impl WignerTable {
    /// Builds the table for the given doubled frequencies and `cos β` nodes.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidArgument`] if a frequency exceeds [`MAX_TWO_L`] or a
    /// node lies outside `[−1, 1]`.
    pub fn new(two_ls: &[u32], cos_betas: &[f64]) -> Result<Self> {
        for &x in cos_betas {
            if !(-1.0..=1.0).contains(&x) {
                return Err(Error::invalid(format!("cos β node {x} outside [−1, 1]")));
            }
        }
        let n_beta = cos_betas.len();
        let halves: Vec<(f64, f64)> = cos_betas
            .iter()
            .map(|&x| (((1.0 - x) / 2.0).sqrt(), ((1.0 + x) / 2.0).sqrt()))
            .collect();
        let mut tables = BTreeMap::new();
        for &two_l in two_ls {
            if two_l > MAX_TWO_L {
                return Err(Error::invalid(format!(
                    "doubled frequency {two_l} exceeds the supported maximum {MAX_TWO_L}"
                )));
            }
            let d = two_l as usize + 1;
            let mut vals = vec![0.0; d * d * n_beta];
            for im in 0..d {
                let two_m = 2 * im as i32 - two_l as i32;
                for i_n in 0..d {
                    let two_n = 2 * i_n as i32 - two_l as i32;
                    let base = (im * d + i_n) * n_beta;
                    for (b, (&x, &(hs, hc))) in cos_betas.iter().zip(&halves).enumerate() {
                        vals[base + b] = little_d_core(two_l, two_m, two_n, x, hs, hc);
                    }
                }
            }
            tables.insert(two_l, vals);
        }
        Ok(WignerTable { n_beta, tables })
    }

    /// Number of β nodes.
    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    /// Doubled frequencies available in the table.
    pub fn frequencies(&self) -> impl Iterator<Item = u32> + '_ {
        self.tables.keys().copied()
    }

    /// The contiguous node slice for entry `(im, in)` of frequency `two_l`,
    /// or `None` when the frequency was not tabulated.
    pub fn entry_nodes(&self, two_l: u32, im: usize, i_n: usize) -> Option<&[f64]> {
        let d = two_l as usize + 1;
        let t = self.tables.get(&two_l)?;
        let base = (im * d + i_n) * self.n_beta;
        t.get(base..base + self.n_beta)
    }

    /// Single tabulated value `P^ℓ_{mn}(x_b)`.
    pub fn value(&self, two_l: u32, im: usize, i_n: usize, b: usize) -> Option<f64> {
        self.entry_nodes(two_l, im, i_n).map(|s| s[b])
    }
}
