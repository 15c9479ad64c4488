use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::langevin::{Combination, Covariance, FluctuationModel};
use crate::optimize::golden_section;
use crate::params::SystemParams;

/// Collective spin statistics, variances normalised to the coherent-state
/// value `N/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinResult {
    /// Mean spin per atom.
    pub mean_spin: [f64; 3],
    /// `ΔJ_z²/(N/4)`
    pub var_jz_normalized: f64,
    /// `ΔJ_y²/(N/4)`
    pub var_jy_normalized: f64,
    /// Smallest normalised variance over directions orthogonal to the mean
    /// spin.
    pub min_transverse_var: f64,
    /// Angle of that direction from the projection of `J_z`, towards
    /// `m̂ × ê_z`.
    pub angle_min: f64,
    /// Half-width at half-maximum of the `J_z` noise spectrum, when computed.
    pub gamma_z_fit: Option<f64>,
}

impl SpinResult {
    /// `ΔJ_y·ΔJ_z / (|⟨J_x⟩|/2)`, at least 1 for any physical state.
    pub fn uncertainty_ratio(&self) -> f64 {
        // per-atom variances are normalised by 1/4
        let vy = self.var_jy_normalized / 4.0;
        let vz = self.var_jz_normalized / 4.0;
        (vy * vz).sqrt() / (self.mean_spin[0].abs() / 2.0)
    }
}

fn spin_covariance(cov: &Covariance) -> Result<Matrix3<f64>> {
    let ops = [Combination::jx(), Combination::jy(), Combination::jz()];
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            m[(i, j)] = cov.covariance(&ops[i], &ops[j])?;
        }
    }
    Ok(m)
}

/// Spin-squeezing measures from the equal-time covariance and the per-atom
/// mean spin.
pub fn spin_measures(cov: &Covariance, mean_spin: [f64; 3]) -> Result<SpinResult> {
    let m = Vector3::from(mean_spin);
    let norm = m.norm();
    if norm.is_nan() || norm <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "mean_spin",
            reason: "mean spin must be nonzero".into(),
        });
    }
    let s = spin_covariance(cov)?;
    let mhat = m / norm;
    let reference = if mhat.z.abs() < 0.9 { Vector3::z() } else { Vector3::x() };
    let e1 = (reference - mhat * mhat.dot(&reference)).normalize();
    let e2 = mhat.cross(&e1);
    let plane = Matrix2::new(
        e1.dot(&(s * e1)),
        e1.dot(&(s * e2)),
        e2.dot(&(s * e1)),
        e2.dot(&(s * e2)),
    );
    let (min_var, angle) = super::min_quadrature_spectrum(&plane);
    Ok(SpinResult {
        mean_spin,
        var_jz_normalized: 4.0 * s[(2, 2)],
        var_jy_normalized: 4.0 * s[(1, 1)],
        min_transverse_var: 4.0 * min_var,
        angle_min: angle,
        gamma_z_fit: None,
    })
}

/// Half-width at half-maximum of the symmetrised spectrum of `combination`,
/// assuming it peaks at zero frequency.
pub fn lorentzian_half_width(model: &FluctuationModel, combination: &Combination) -> Result<f64> {
    let s0 = model.atomic_spectrum(combination, 0.0)?;
    let half = 0.5 * s0;
    let f = |w: f64| model.atomic_spectrum(combination, w).map(|s| s - half);
    let mut lo = 0.0;
    let mut hi = 1e-6;
    while f(hi)? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoConvergence { iterations: 0, spread: hi });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Spin statistics at threshold ratio `alpha`, including the `J_z` width.
pub fn spin_point(params: &SystemParams<f64>, alpha: f64) -> Result<SpinResult> {
    let model = FluctuationModel::at_threshold_ratio(params, alpha)?;
    let cov = model.covariance()?;
    let mut result = spin_measures(&cov, model.bloch.mean_spin(1.0))?;
    result.gamma_z_fit = Some(lorentzian_half_width(&model, &Combination::jz())?);
    Ok(result)
}

fn jz_variance(params: &SystemParams<f64>, alpha: f64) -> f64 {
    let value = || -> Result<f64> {
        let model = FluctuationModel::at_threshold_ratio(params, alpha)?;
        let cov = model.covariance()?;
        Ok(4.0 * cov.variance(&Combination::jz())?)
    };
    value().unwrap_or(f64::INFINITY)
}

/// Threshold ratio `α ∈ [lo, hi]` minimising the numeric `ΔJ_z²/(N/4)`.
/// Unstable points count as infinitely noisy. Returns `(α, variance)`.
pub fn optimize_alpha(params: &SystemParams<f64>, lo: f64, hi: f64) -> Result<(f64, f64)> {
    if lo.is_nan() || hi.is_nan() || lo >= hi || lo <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "alpha range",
            reason: format!("need 0 < lo < hi, got [{lo}, {hi}]"),
        });
    }
    let (alpha, var) = golden_section(|a| jz_variance(params, a), lo, hi, 1e-7);
    if !var.is_finite() {
        return Err(Error::Unstable { max_real: f64::NAN });
    }
    Ok((alpha, var))
}
