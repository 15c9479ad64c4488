//! Closed-form theory of the cavity-feedback spin squeezing close to the
//! polarization threshold, parameterised by `α = δ_s/δ`.

use num_traits::Float;

use crate::error::{ensure_finite, Error, Result};

fn require_alpha<T: Float>(alpha: T) -> Result<()> {
    ensure_finite("alpha", alpha)?;
    if alpha <= T::one() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: "must exceed 1 (stable side of the threshold)".into(),
        });
    }
    Ok(())
}

fn require_positive_phi<T: Float>(phi: T) -> Result<()> {
    ensure_finite("phi", phi)?;
    if phi <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "phi",
            reason: "must be > 0".into(),
        });
    }
    Ok(())
}

/// Width of the Lorentzian `J_z` noise spectrum,
/// `γ_z = δ√(1+φ²)(α − 1/α)`, in the units of `delta`.
pub fn gamma_z<T: Float>(delta: T, phi: T, alpha: T) -> Result<T> {
    require_alpha(alpha)?;
    ensure_finite("delta", delta)?;
    ensure_finite("phi", phi)?;
    Ok(delta.abs() * (T::one() + phi * phi).sqrt() * (alpha - alpha.recip()))
}

/// Normalised population-difference variance
/// `[(α√(1+φ²) − φ)² + 1] / [(1+φ²)(α² − 1)]`.
pub fn jz_variance_analytic<T: Float>(alpha: T, phi: T) -> Result<T> {
    require_alpha(alpha)?;
    ensure_finite("phi", phi)?;
    let one = T::one();
    let r = (one + phi * phi).sqrt();
    let lever = alpha * r - phi;
    Ok((lever * lever + one) / ((one + phi * phi) * (alpha * alpha - one)))
}

/// Minimiser of [`jz_variance_analytic`]: `α* = (1+√(1+φ²))/φ` with
/// variance `1/√(1+φ²)`.
pub fn optimal_alpha<T: Float>(phi: T) -> Result<(T, T)> {
    require_positive_phi(phi)?;
    let r = (T::one() + phi * phi).sqrt();
    Ok(((T::one() + r) / phi, r.recip()))
}

/// Constants of the two dominant `J_z` noise channels, kept in ratio form
/// since `g` and `T` only enter through `C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackConstants<T> {
    pub alpha: T,
    /// `a/(gN) = δ/(2√2·Ω)`
    pub a_over_gn: T,
    /// `b·T/g = 2√2/φ`
    pub b_times_t: T,
    /// `c·√T = 2/φ`
    pub c_times_sqrt_t: T,
}

impl<T: Float> FeedbackConstants<T> {
    /// `delta` and `omega_rabi` in units of γ.
    pub fn new(delta: T, omega_rabi: T, phi: T, cooperativity: T) -> Result<Self> {
        require_positive_phi(phi)?;
        ensure_finite("delta", delta)?;
        ensure_finite("omega_rabi", omega_rabi)?;
        if omega_rabi <= T::zero() || cooperativity <= T::zero() || delta == T::zero() {
            return Err(Error::InvalidParameter {
                name: "feedback constants",
                reason: "need Ω > 0, C > 0 and δ ≠ 0".into(),
            });
        }
        let two = T::one() + T::one();
        let two_sqrt2 = two * two.sqrt();
        let delta_s = (T::one() + phi * phi).sqrt() * omega_rabi * omega_rabi / cooperativity;
        Ok(Self {
            alpha: delta_s / delta.abs(),
            a_over_gn: delta / (two_sqrt2 * omega_rabi),
            b_times_t: two_sqrt2 / phi,
            c_times_sqrt_t: two / phi,
        })
    }
}

/// Detuning at which the feedback cancellation `Ω = ab` holds, relative to
/// the threshold `δ_s`. With `C = g²N/(Tγ)`, `Ω = ab` gives
/// `δ = Ω²φ/(γC)`, so the ratio is `φ/√(1+φ²)`.
pub fn threshold_consistency<T: Float>(phi: T) -> Result<T> {
    require_positive_phi(phi)?;
    // per unit Ω²/(γC)
    let delta_feedback = phi;
    let delta_s = (T::one() + phi * phi).sqrt();
    Ok(delta_feedback / delta_s)
}

#[cfg(test)]
#[allow(clippy::approx_constant)] // expected values quoted to the printed digits
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_z_examples() {
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert_relative_eq!(gamma_z(0.005, 2.0, golden).unwrap(), 0.011180, max_relative = 1e-4);
        assert!(gamma_z(0.005, 2.0, 1.0 + 1e-12).unwrap() < 1e-13);
        let g1 = gamma_z(0.01, 1.0, 1.5).unwrap();
        let g2 = gamma_z(0.02, 1.0, 1.5).unwrap();
        assert_relative_eq!(g2, 2.0 * g1);
        assert!(gamma_z(0.01, 1.0, 1.0).is_err());
        assert!(gamma_z(0.01, 1.0, 0.5).is_err());
    }

    #[test]
    fn variance_examples() {
        assert_relative_eq!(jz_variance_analytic(1.0 + 2f64.sqrt(), 1.0).unwrap(), 0.707_106_8, max_relative = 1e-7);
        assert_relative_eq!(jz_variance_analytic((1.0 + 5f64.sqrt()) / 2.0, 2.0).unwrap(), 0.447_213_6, max_relative = 1e-7);
        assert!((jz_variance_analytic(1e8, 2.0).unwrap() - 1.0).abs() < 1e-7);
        assert!(jz_variance_analytic(0.9, 2.0).is_err());
    }

    #[test]
    fn optimum_examples() {
        let (a, v) = optimal_alpha(1.0).unwrap();
        assert_relative_eq!(a, 2.414_213_6, max_relative = 1e-7);
        assert_relative_eq!(v, 0.707_106_8, max_relative = 1e-7);
        let (a, v) = optimal_alpha(2.0).unwrap();
        assert_relative_eq!(a, 1.618_034, max_relative = 1e-6);
        assert_relative_eq!(v, 0.447_213_6, max_relative = 1e-7);
        assert!(optimal_alpha(1e9).unwrap().1 < 1e-8);
        assert!(optimal_alpha(0.0).is_err());
        for phi in [0.5, 1.0, 3.0, 10.0] {
            let (a, v) = optimal_alpha(phi).unwrap();
            assert_relative_eq!(jz_variance_analytic(a, phi).unwrap(), v, max_relative = 1e-12);
        }
    }

    #[test]
    fn consistency_examples() {
        assert_relative_eq!(threshold_consistency(10.0).unwrap(), 0.99504, max_relative = 1e-5);
        assert_relative_eq!(threshold_consistency(1.0).unwrap(), 0.70711, max_relative = 1e-5);
        let mut prev = 0.0;
        for k in 1..100 {
            let r = threshold_consistency(k as f64 * 0.2).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn feedback_constants() {
        // Ω² = 144, C = 100, φ = 1: δ_s = √2·1.44
        let k = FeedbackConstants::new(1.0, 12.0, 1.0, 100.0).unwrap();
        assert_relative_eq!(k.alpha, 2f64.sqrt() * 1.44, max_relative = 1e-14);
        assert_relative_eq!(k.a_over_gn, 1.0 / (2.0 * 2f64.sqrt() * 12.0));
        assert_relative_eq!(k.b_times_t, 2.0 * 2f64.sqrt());
        assert_relative_eq!(k.c_times_sqrt_t, 2.0);
        assert!(FeedbackConstants::new(1.0, 12.0, 0.0, 100.0).is_err());
    }

    #[test]
    fn works_in_f32() {
        let (a, v) = optimal_alpha(2.0f32).unwrap();
        assert!((a - 1.618_034).abs() < 1e-5 && (v - 0.447_213_6).abs() < 1e-6);
    }
}
