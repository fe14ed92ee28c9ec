//! Exponentially scaled modified Bessel functions of integer order.
//!
//! The group-averaged Gaussian affinity factors, per β-node, into a product
//! of two modified Bessel functions `I_p` whose arguments grow like `1/ε`.
//! To keep everything in range the crate works exclusively with the scaled
//! values `e^{−x} I_p(x) ∈ (0, 1]`, and the matching exponential is folded
//! into a (non-positive) log-prefactor elsewhere.
//!
//! Values are produced a whole row `p = 0, ..., p_max` at a time by Miller's
//! downward recurrence, normalized through `I₀(x) + 2 Σ_{k≥1} I_k(x) = eˣ`.

/// Returns `[e^{−x} I_0(x), ..., e^{−x} I_{p_max}(x)]` for `x ≥ 0`.
///
/// Relative accuracy is close to machine precision for all orders; the
/// recurrence start carries a safety margin that makes the truncated
/// normalization sum exact to well below `1e-15`.
#[cfg(test)]
pub(crate) fn scaled_ive_row(x: f64, p_max: usize) -> Vec<f64> {
    let mut out = vec![0.0; p_max + 1];
    scaled_ive_into(x, &mut out);
    out
}

/// Fills `out[p] = e^{−x} I_p(x)` for `p = 0, ..., out.len() − 1`;
/// allocation-free so tight pair loops can reuse one buffer.
pub(crate) fn scaled_ive_into(x: f64, out: &mut [f64]) {
    debug_assert!(x.is_finite() && x >= 0.0, "bessel argument must be ≥ 0, got {x}");
    debug_assert!(!out.is_empty());
    let p_max = out.len() - 1;
    out.fill(0.0);
    if x < 1e-6 {
        // Two-term series: the first neglected factor is 1 + O(x⁴).
        let ex = (-x).exp();
        let mut pow = 1.0; // (x/2)^p / p!
        for (p, slot) in out.iter_mut().enumerate() {
            let correction = 1.0 + (x * x / 4.0) / (p as f64 + 1.0);
            *slot = ex * pow * correction;
            pow *= x / 2.0 / (p as f64 + 1.0);
            if pow == 0.0 && p + 1 <= p_max {
                break; // remaining orders underflow to zero
            }
        }
        return;
    }
    // Start the downward recurrence well above both the order and the
    // turning point k ≈ x; beyond there the minimal solution decays at
    // least geometrically, so a fixed margin reaches full precision.
    let start = p_max.max(x.ceil() as usize) + 64;
    let mut above = 0.0_f64; // trial I_{k+1}
    let mut here = 1e-250_f64; // trial I_k
    let mut sum = 0.0_f64; // trial I_0 + 2 Σ_{k≥1} I_k
    let mut k = start;
    loop {
        if k <= p_max {
            out[k] = here;
        }
        sum += if k == 0 { here } else { 2.0 * here };
        if k == 0 {
            break;
        }
        let below = above + (2.0 * k as f64 / x) * here;
        above = here;
        here = below;
        if here > 1e250 {
            let s = 1e-250;
            here *= s;
            above *= s;
            sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
        k -= 1;
    }
    let scale = 1.0 / sum;
    for v in out.iter_mut() {
        *v *= scale;
    }
}
