//! Sampling and embedding of the 4-sphere test manifold.
//!
//! All three reference experiments run on `S⁴ ⊂ R⁵`, embedded into `C³` as
//! `z(x) = (x₁+ix₂, x₃+ix₄, x₅)` so that SU(2) acts by `diag(A, 1)`: the
//! pair `(z₁, z₂)` transforms as the spin-half representation and `z₃` is
//! untouched. The embedding is an isometry of `R⁵` onto its image, so
//! ambient distances — and therefore kernels — agree in both pictures.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::su2::{Dataset, IrrepLayout};

/// Layout of the `C³` embedding: one spin-half block and one scalar.
pub fn sphere_layout() -> IrrepLayout {
    IrrepLayout::new(vec![1, 0]).expect("the static layout is valid")
}

fn unit_vector(rng: &mut ChaCha12Rng) -> [f64; 5] {
    loop {
        let mut x = [0.0; 5];
        for c in x.iter_mut() {
            *c = StandardNormal.sample(rng);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for c in x.iter_mut() {
                *c /= norm;
            }
            return x;
        }
    }
}

/// `n` i.i.d. uniform samples on the unit sphere `S⁴ ⊂ R⁵`, drawn as
/// normalized isotropic Gaussians. Deterministic for a fixed seed.
pub fn sample_s4(n: usize, seed: u64) -> Vec<[f64; 5]> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n).map(|_| unit_vector(&mut rng)).collect()
}

/// `n` i.i.d. samples uniform in the spherical shell
/// `S⁴_σ = {x : 1−σ ≤ ‖x‖ ≤ 1+σ}`: direction uniform on `S⁴`, radius with
/// density `∝ r⁴` (uniform in five-dimensional volume), via inverse-CDF
/// sampling of the `r⁵` law. Deterministic for a fixed seed.
///
/// # Errors
///
/// [`Error::InvalidArgument`] unless `0 ≤ sigma < 1`.
pub fn sample_s4_tube(n: usize, sigma: f64, seed: u64) -> Result<Vec<[f64; 5]>> {
    if !(sigma.is_finite() && (0.0..1.0).contains(&sigma)) {
        return Err(Error::invalid(format!(
            "tube half-width must satisfy 0 ≤ σ < 1, got {sigma}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let lo5 = (1.0 - sigma).powi(5);
    let hi5 = (1.0 + sigma).powi(5);
    Ok((0..n)
        .map(|_| {
            let mut x = unit_vector(&mut rng);
            let u: f64 = rand::distr::Uniform::new(0.0, 1.0)
                .expect("unit interval is a valid range")
                .sample(&mut rng);
            let r = (lo5 + u * (hi5 - lo5)).powf(0.2);
            for c in x.iter_mut() {
                *c *= r;
            }
            x
        })
        .collect())
}

/// The complex embedding `z(x) = (x₁+ix₂, x₃+ix₄, x₅)` of one `R⁵` point.
pub fn embed_c3(x: &[f64; 5]) -> Vec<Complex64> {
    vec![
        Complex64::new(x[0], x[1]),
        Complex64::new(x[2], x[3]),
        Complex64::new(x[4], 0.0),
    ]
}

/// Embeds a batch of `R⁵` points as a dataset under [`sphere_layout`].
pub fn embed_dataset(points: &[[f64; 5]]) -> Result<Dataset> {
    Dataset::new(sphere_layout(), points.iter().map(embed_c3).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::su2::{act, GroupElement};
    use approx::assert_abs_diff_eq;

    #[test]
    fn sphere_samples_are_unit_and_centered() {
        let pts = sample_s4(10_000, 11);
        for p in &pts {
            let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
        let mut mean = [0.0; 5];
        for p in &pts {
            for (m, v) in mean.iter_mut().zip(p) {
                *m += v / pts.len() as f64;
            }
        }
        let drift = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(drift <= 4.0 / (pts.len() as f64).sqrt(), "mean drift {drift}");
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_s4(50, 3), sample_s4(50, 3));
        assert_ne!(sample_s4(50, 3), sample_s4(50, 4));
        assert_eq!(
            sample_s4_tube(50, 0.2, 5).unwrap(),
            sample_s4_tube(50, 0.2, 5).unwrap()
        );
    }

    #[test]
    fn tube_radii_follow_the_volume_law() {
        let sigma = 0.3;
        let pts = sample_s4_tube(100_000, sigma, 13).unwrap();
        let mut radii: Vec<f64> = pts
            .iter()
            .map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect();
        radii.sort_by(f64::total_cmp);
        let (lo, hi) = (1.0 - sigma, 1.0 + sigma);
        assert!(*radii.first().unwrap() >= lo && *radii.last().unwrap() <= hi);
        // Kolmogorov–Smirnov distance against the r⁵ law.
        let (lo5, hi5) = (lo.powi(5), hi.powi(5));
        let n = radii.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, r) in radii.iter().enumerate() {
            let f = (r.powi(5) - lo5) / (hi5 - lo5);
            ks = ks.max((f - i as f64 / n).abs()).max((f - (i + 1) as f64 / n).abs());
        }
        assert!(ks < 0.02, "KS distance {ks}");
    }

    #[test]
    fn zero_width_tube_is_the_sphere() {
        for p in sample_s4_tube(100, 0.0, 17).unwrap() {
            let n = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_abs_diff_eq!(n, 1.0, epsilon = 1e-12);
        }
        assert!(sample_s4_tube(5, 1.0, 0).is_err());
        assert!(sample_s4_tube(5, -0.1, 0).is_err());
        assert!(sample_s4_tube(5, f64::NAN, 0).is_err());
    }

    #[test]
    fn embedding_preserves_structure() {
        assert_eq!(
            embed_c3(&[1.0, 0.0, 0.0, 0.0, 0.0]),
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0)
            ]
        );
        let x = [0.1, -0.2, 0.3, 0.4, -0.5];
        let z = embed_c3(&x);
        let nz: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let nx: f64 = x.iter().map(|v| v * v).sum();
        assert_abs_diff_eq!(nz, nx, epsilon = 1e-15);
        // The action never touches the third coordinate.
        let layout = sphere_layout();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(19);
        for _ in 0..5 {
            let a = GroupElement::random(&mut rng);
            let rot = act(&a, &z, &layout).unwrap();
            assert_abs_diff_eq!(rot[2].re, x[4], epsilon = 1e-14);
            assert_abs_diff_eq!(rot[2].im, 0.0, epsilon = 1e-14);
        }
        let data = embed_dataset(&[x]).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.layout().ambient_dim(), 3);
    }
}
