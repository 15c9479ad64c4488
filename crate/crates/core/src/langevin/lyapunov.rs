use nalgebra::{DMatrix, DVector};

use super::{Combination, FluctuationModel, RMat, DIM};
use crate::error::{Error, Result};

/// Results whose Lyapunov condition estimate exceeds this are flagged.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Equal-time symmetrised covariance in the quadrature basis, solving
/// `MV + VMᵀ + D = 0`.
#[derive(Debug, Clone)]
pub struct Covariance {
    pub matrix: RMat,
    /// `‖MV + VMᵀ + D‖ / ‖D‖`
    pub residual: f64,
    /// 1-norm condition estimate of the Kronecker system.
    pub condition: f64,
}

impl Covariance {
    pub fn reliable(&self) -> bool {
        self.condition <= CONDITION_LIMIT
    }

    /// Variance of a Hermitian combination (per-atom units for atomic
    /// operators).
    pub fn variance(&self, combination: &Combination) -> Result<f64> {
        let c = combination.quadrature_coefficients()?;
        Ok((c.transpose() * self.matrix * c)[(0, 0)])
    }

    /// Covariance of two Hermitian combinations.
    pub fn covariance(&self, a: &Combination, b: &Combination) -> Result<f64> {
        let ca = a.quadrature_coefficients()?;
        let cb = b.quadrature_coefficients()?;
        Ok((ca.transpose() * self.matrix * cb)[(0, 0)])
    }
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve `MV + VMᵀ + D = 0` through the Kronecker form
/// `(I⊗M + M⊗I) vec V = −vec D`.
pub fn solve_lyapunov(m: &RMat, d: &RMat) -> Result<Covariance> {
    let n = DIM;
    let mut k = DMatrix::<f64>::zeros(n * n, n * n);
    for j in 0..n {
        for i in 0..n {
            let row = i + n * j;
            for p in 0..n {
                // (I⊗M): V[p, j] contributes M[i, p]
                k[(row, p + n * j)] += m[(i, p)];
                // (M⊗I): V[i, p] contributes M[j, p]
                k[(row, i + n * p)] += m[(j, p)];
            }
        }
    }
    let rhs = DVector::from_iterator(n * n, d.iter().map(|x| -x));
    let lu = k.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        context: "Lyapunov equation",
        condition: f64::INFINITY,
    })?;
    let condition = one_norm(&k) * one_norm(&inv);
    let sol = &inv * rhs;
    let v = RMat::from_column_slice(sol.as_slice());
    let v = (v + v.transpose()) * 0.5;
    let res = m * v + v * m.transpose() + d;
    let scale = d.norm().max(f64::MIN_POSITIVE);
    Ok(Covariance {
        matrix: v,
        residual: res.norm() / scale,
        condition,
    })
}

impl FluctuationModel {
    /// Steady-state equal-time covariance of all fluctuations.
    pub fn covariance(&self) -> Result<Covariance> {
        self.require_stable()?;
        let q = self.quadrature();
        let cov = solve_lyapunov(&q.drift, &q.total_diffusion)?;
        if !cov.condition.is_finite() {
            return Err(Error::Singular {
                context: "Lyapunov equation",
                condition: cov.condition,
            });
        }
        Ok(cov)
    }
}
