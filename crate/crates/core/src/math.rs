//! Scalar special functions, the generalized Gaussian density and the
//! Gaussian kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{KafError, Result};

/// Largest argument accepted by [`gamma_fn`] before `f64` overflow.
pub const GAMMA_MAX_ARG: f64 = 171.0;

/// Γ(x) for x in (0, 171].
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(KafError::Domain(format!("gamma undefined for x = {x}")));
    }
    if x > GAMMA_MAX_ARG {
        return Err(KafError::Domain(format!("gamma overflows for x = {x}")));
    }
    Ok(libm::tgamma(x))
}

/// `|e|^p` with the zero case short-circuited.
#[inline]
pub fn abs_pow(e: f64, p: f64) -> f64 {
    let a = e.abs();
    if a == 0.0 {
        0.0
    } else {
        (p * a.ln()).exp()
    }
}

/// Shape and scale of the generalized Gaussian density.
///
/// The normalization `α / (2βΓ(1/α))` and `β^α` are computed once at
/// construction since the density sits in every inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGgd", into = "RawGgd")]
pub struct GGDParams {
    alpha: f64,
    beta: f64,
    norm: f64,
    beta_pow_alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawGgd {
    alpha: f64,
    beta: f64,
}

impl TryFrom<RawGgd> for GGDParams {
    type Error = KafError;
    fn try_from(raw: RawGgd) -> Result<Self> {
        GGDParams::new(raw.alpha, raw.beta)
    }
}

impl From<GGDParams> for RawGgd {
    fn from(p: GGDParams) -> Self {
        RawGgd { alpha: p.alpha, beta: p.beta }
    }
}

impl GGDParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(KafError::InvalidParameter {
                name: "alpha",
                reason: format!("must be > 0, got {alpha}"),
            });
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(KafError::InvalidParameter {
                name: "beta",
                reason: format!("must be > 0, got {beta}"),
            });
        }
        let norm = alpha / (2.0 * beta * gamma_fn(1.0 / alpha)?);
        Ok(Self {
            alpha,
            beta,
            norm,
            beta_pow_alpha: beta.powf(alpha),
        })
    }

    /// Parameters matching the Gaussian `G_σ`: α = 2, β = √2·σ.
    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(2.0, std::f64::consts::SQRT_2 * sigma)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Peak value `α / (2βΓ(1/α))`, attained at e = 0.
    pub fn peak(&self) -> f64 {
        self.norm
    }

    pub fn beta_pow_alpha(&self) -> f64 {
        self.beta_pow_alpha
    }

    #[inline]
    pub fn density(&self, e: f64) -> f64 {
        self.norm * (-abs_pow(e, self.alpha) / self.beta_pow_alpha).exp()
    }
}

/// Generalized Gaussian density `G_{α,β}(e)`.
pub fn ggd_density(e: f64, p: &GGDParams) -> f64 {
    p.density(e)
}

/// Normalized Gaussian `G_σ(e) = exp(−e²/2σ²) / (√(2π)σ)`.
#[inline]
pub fn gaussian_density(e: f64, sigma: f64) -> f64 {
    (-(e * e) / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma)
}

/// Gaussian kernel bandwidth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernel", into = "RawKernel")]
pub struct KernelParams {
    sigma: f64,
}

#[derive(Serialize, Deserialize)]
struct RawKernel {
    sigma: f64,
}

impl TryFrom<RawKernel> for KernelParams {
    type Error = KafError;
    fn try_from(raw: RawKernel) -> Result<Self> {
        KernelParams::new(raw.sigma)
    }
}

impl From<KernelParams> for RawKernel {
    fn from(k: KernelParams) -> Self {
        RawKernel { sigma: k.sigma }
    }
}

impl KernelParams {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(KafError::InvalidParameter {
                name: "sigma",
                reason: format!("must be > 0, got {sigma}"),
            });
        }
        Ok(Self { sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// κ(u, u); the kernel keeps its density normalization so this is not 1.
    pub fn self_similarity(&self) -> f64 {
        1.0 / ((2.0 * PI).sqrt() * self.sigma)
    }

    /// Kernel value without the length check, for inner loops.
    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        (-d2 / (2.0 * self.sigma * self.sigma)).exp() * self.self_similarity()
    }
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { sigma: 1.0 }
    }
}

/// Gaussian kernel `(1/(√(2π)σ)) exp(−‖x−y‖²/(2σ²))`.
pub fn gaussian_kernel(x: &[f64], y: &[f64], k: &KernelParams) -> Result<f64> {
    if x.len() != y.len() {
        return Err(KafError::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    Ok(k.eval(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn gamma_known_values() {
        assert_relative_eq!(gamma_fn(1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(gamma_fn(0.5).unwrap(), PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(gamma_fn(5.0).unwrap(), 24.0, max_relative = 1e-13);
    }

    #[test]
    fn gamma_factorials_up_to_fifty() {
        let mut fact = 1.0f64;
        for n in 1..=50u32 {
            // Γ(n) = (n-1)!
            assert_relative_eq!(gamma_fn(n as f64).unwrap(), fact, max_relative = 1e-12);
            fact *= n as f64;
        }
    }

    #[test]
    fn gamma_half_integers() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        let mut g = PI.sqrt();
        for n in 0..40u32 {
            let x = n as f64 + 0.5;
            assert_relative_eq!(gamma_fn(x).unwrap(), g, max_relative = 1e-12);
            g *= x;
        }
    }

    #[test]
    fn gamma_rejects_bad_domain() {
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.5).is_err());
        assert!(gamma_fn(171.5).is_err());
        assert!(gamma_fn(f64::NAN).is_err());
    }

    #[test]
    fn ggd_examples() {
        let p = GGDParams::new(2.0, 1.0).unwrap();
        assert_relative_eq!(ggd_density(0.0, &p), 1.0 / PI.sqrt(), max_relative = 1e-13);
        assert_relative_eq!(ggd_density(1.0, &p), (-1.0f64).exp() / PI.sqrt(), max_relative = 1e-13);
        assert!((ggd_density(1.0, &p) - 0.2075537).abs() < 1e-7);
        let q = GGDParams::new(0.7, 2.5).unwrap();
        let expected = 0.7 / (2.0 * 2.5 * gamma_fn(1.0 / 0.7).unwrap());
        assert_eq!(ggd_density(0.0, &q), expected);
    }

    #[test]
    fn ggd_rejects_non_positive() {
        assert!(GGDParams::new(0.0, 1.0).is_err());
        assert!(GGDParams::new(1.0, -1.0).is_err());
        assert!(KernelParams::new(0.0).is_err());
    }

    #[test]
    fn kernel_examples() {
        let k = KernelParams::new(1.0).unwrap();
        let x = [0.3, -1.2];
        assert_relative_eq!(
            gaussian_kernel(&x, &x, &k).unwrap(),
            1.0 / (2.0 * PI).sqrt(),
            max_relative = 1e-14
        );
        let y = [1.3, -0.2];
        assert_relative_eq!(
            gaussian_kernel(&x, &y, &k).unwrap(),
            (-1.0f64).exp() / (2.0 * PI).sqrt(),
            max_relative = 1e-13
        );
        assert!(gaussian_kernel(&x, &[1.0], &k).is_err());
    }

    #[test]
    fn ggd_matches_gaussian_at_alpha_two() {
        for &sigma in &[0.3, 1.0, 2.7] {
            let p = GGDParams::gaussian(sigma).unwrap();
            for i in -20..=20 {
                let e = i as f64 * 0.17;
                let g = gaussian_density(e, sigma);
                assert!((p.density(e) - g).abs() <= 1e-12 * g.max(1e-300) + 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn ggd_even_and_peaked(e in -50.0f64..50.0, alpha in 0.1f64..8.0, beta in 0.1f64..10.0) {
            let p = GGDParams::new(alpha, beta).unwrap();
            prop_assert_eq!(p.density(e), p.density(-e));
            prop_assert!(p.density(e) <= p.density(0.0));
            if e != 0.0 && p.density(e) > 0.0 {
                prop_assert!(p.density(e) < p.density(0.0) || abs_pow(e, alpha) / p.beta_pow_alpha() < 1e-15);
            }
        }

        #[test]
        fn kernel_symmetric(x in prop::collection::vec(-5.0f64..5.0, 4), y in prop::collection::vec(-5.0f64..5.0, 4), s in 0.1f64..5.0) {
            let k = KernelParams::new(s).unwrap();
            prop_assert_eq!(gaussian_kernel(&x, &y, &k).unwrap(), gaussian_kernel(&y, &x, &k).unwrap());
            prop_assert_eq!(gaussian_kernel(&x, &x, &k).unwrap(), k.self_similarity());
        }
    }
}
