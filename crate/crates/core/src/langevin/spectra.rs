use nalgebra::{Matrix2, Matrix4, SMatrix, SVector};
use num_complex::Complex64;

use super::{quadrature_transform_inverse, FluctuationModel, CMat, DIM, INPUTS};
use crate::error::{Error, Result};

/// Symmetrised output quadrature spectra at one analysis frequency.
///
/// `output` is the 4×4 real symmetric matrix over `(X₁, Y₁, X₂, Y₂)` of the
/// fields leaving the cavity; vacuum gives the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralResult {
    pub omega: f64,
    pub output: Matrix4<f64>,
}

impl SpectralResult {
    /// 2×2 `(X, Y)` block of mode 0 (`A₁`) or 1 (`A₂`).
    pub fn mode_block(&self, mode: usize) -> Matrix2<f64> {
        self.output.fixed_view::<2, 2>(2 * mode, 2 * mode).into_owned()
    }

    pub fn cross_block(&self) -> Matrix2<f64> {
        self.output.fixed_view::<2, 2>(0, 2).into_owned()
    }

    /// `S_θ` of quadrature `X_θ = Ae^{−iθ} + A†e^{iθ}` of `mode`.
    pub fn quadrature(&self, mode: usize, theta: f64) -> f64 {
        let b = self.mode_block(mode);
        let (s, c) = theta.sin_cos();
        c * c * b[(0, 0)] + s * s * b[(1, 1)] + 2.0 * s * c * b[(0, 1)]
    }

    /// Product of the two eigenvalues of each mode block.
    pub fn heisenberg_products(&self) -> [f64; 2] {
        [self.mode_block(0).determinant(), self.mode_block(1).determinant()]
    }
}

/// Linear functional on the fluctuation vector, given by its ladder-basis
/// coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Combination {
    pub coeffs: [Complex64; DIM],
}

impl Combination {
    pub fn new(coeffs: [Complex64; DIM]) -> Self {
        Self { coeffs }
    }

    fn sparse(entries: &[(usize, Complex64)]) -> Self {
        let mut coeffs = [Complex64::from(0.0); DIM];
        for &(k, c) in entries {
            coeffs[k] = c;
        }
        Self { coeffs }
    }

    /// Per-atom `J_x = (J + J†)/2`.
    pub fn jx() -> Self {
        Self::sparse(&[(8, 0.5.into()), (9, 0.5.into())])
    }

    /// Per-atom `J_y = (J − J†)/(2i)`.
    pub fn jy() -> Self {
        let h = Complex64::new(0.0, 0.5);
        Self::sparse(&[(8, -h), (9, h)])
    }

    /// Per-atom `J_z = (Π₂ − Π₁)/2`.
    pub fn jz() -> Self {
        Self::sparse(&[(10, (-0.5).into()), (11, 0.5.into())])
    }

    /// Coefficients on the quadrature basis. Fails unless the combination is
    /// Hermitian.
    pub fn quadrature_coefficients(&self) -> Result<SVector<f64, DIM>> {
        let q = SVector::<Complex64, DIM>::from_column_slice(&self.coeffs);
        let c = quadrature_transform_inverse().transpose() * q;
        let imag = c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        if imag > 1e-12 * c.camax().max(1.0) {
            return Err(Error::InvalidParameter {
                name: "combination",
                reason: "operator combination is not Hermitian".into(),
            });
        }
        Ok(c.map(|z| z.re))
    }
}

/// Log-spaced inclusive grid.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let (a, b) = (start.ln(), stop.ln());
    (0..count)
        .map(|k| match k {
            0 => start,
            k if k == count - 1 => stop,
            k => (a + (b - a) * k as f64 / (count - 1) as f64).exp(),
        })
        .collect()
}

/// 400 analysis frequencies over `[10⁻³, 10²]γ`: log-spaced below γ, linear
/// above.
pub fn default_frequency_grid() -> Vec<f64> {
    let mut grid = log_grid(1e-3, 1.0, 251);
    grid.pop();
    grid.extend((0..150).map(|k| 1.0 + 99.0 * k as f64 / 149.0));
    grid
}

type CTransfer = SMatrix<Complex64, DIM, DIM>;

impl FluctuationModel {
    /// `T(ω) = (−iω − M)⁻¹` in the quadrature basis.
    pub fn transfer(&self, omega: f64) -> Result<CTransfer> {
        self.require_stable()?;
        let m = self.quad.drift.map(Complex64::from);
        let a = CMat::identity() * Complex64::new(0.0, -omega) - m;
        a.try_inverse().ok_or(Error::Singular {
            context: "resolvent",
            condition: f64::INFINITY,
        })
    }

    /// Intracavity symmetrised spectral matrix `T(D + BBᵀ)T†` in the
    /// quadrature basis.
    pub fn spectral_matrix(&self, omega: f64) -> Result<CTransfer> {
        let t = self.transfer(omega)?;
        let d = self.quad.total_diffusion.map(Complex64::from);
        Ok(t * d * t.adjoint())
    }

    /// Output quadrature spectra of both modes, including the reflected
    /// input noise and its correlation with the intracavity field.
    pub fn output_spectra(&self, omega: f64) -> Result<SpectralResult> {
        let t = self.transfer(omega)?;
        let s = (2.0 * self.params.kappa).sqrt();
        let rows = t.fixed_rows::<INPUTS>(0) * Complex64::from(s);
        let b = self.quad.input_coupling.map(Complex64::from);
        let u = rows * b - SMatrix::<Complex64, INPUTS, INPUTS>::identity();
        let d = self.quad.diffusion.map(Complex64::from);
        let full = u * u.adjoint() + rows * d * rows.adjoint();
        let re = full.map(|z| z.re);
        Ok(SpectralResult {
            omega,
            output: (re + re.transpose()) * 0.5,
        })
    }

    /// `S_{X_θ}(ω)` of output mode 0 (`A₁`) or 1 (`A₂`).
    pub fn output_spectrum(&self, mode: usize, theta: f64, omega: f64) -> Result<f64> {
        if mode > 1 {
            return Err(Error::InvalidParameter {
                name: "mode",
                reason: format!("expected 0 or 1, got {mode}"),
            });
        }
        Ok(self.output_spectra(omega)?.quadrature(mode, theta))
    }

    /// Symmetrised spectral density of a Hermitian combination of
    /// fluctuations (atomic operators per `√N`).
    pub fn atomic_spectrum(&self, combination: &Combination, omega: f64) -> Result<f64> {
        let c = combination.quadrature_coefficients()?.map(Complex64::from);
        let t = self.transfer(omega)?;
        let row = c.transpose() * t;
        let d = self.quad.total_diffusion.map(Complex64::from);
        Ok((row * d * row.adjoint())[(0, 0)].re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;

    #[test]
    fn grid_shape() {
        let g = default_frequency_grid();
        assert_eq!(g.len(), 400);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[399] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn spin_combinations_are_hermitian() {
        for c in [Combination::jx(), Combination::jy(), Combination::jz()] {
            c.quadrature_coefficients().unwrap();
        }
        let bad = Combination::sparse(&[(8, 1.0.into())]);
        assert!(bad.quadrature_coefficients().is_err());
    }

    #[test]
    fn empty_cavity_output_is_vacuum() {
        let p = SystemParams::new(0.0, 2.0, 0.7, 0.4).unwrap();
        let model = FluctuationModel::new(&p, 9.0).unwrap();
        for &w in &[0.0, 0.3, 5.0] {
            let s = model.output_spectra(w).unwrap();
            assert!((s.output - Matrix4::identity()).amax() < 1e-12);
        }
    }

    #[test]
    fn empty_cavity_intracavity_lorentzian() {
        let (kappa, phi) = (2.0, 0.7);
        let p = SystemParams::new(0.0, kappa, phi, 0.4).unwrap();
        let model = FluctuationModel::new(&p, 9.0).unwrap();
        for &w in &[0.0, 0.5, 3.0] {
            let s = model.spectral_matrix(w).unwrap();
            // |a|² response of a detuned cavity, symmetrised over ±ω
            let l = |x: f64| 2.0 * kappa / (kappa * kappa + (x + kappa * phi).powi(2));
            let expected = 0.5 * (l(w) + l(-w));
            assert!((s[(0, 0)].re - expected).abs() < 1e-12, "{w}");
        }
        let far = model.spectral_matrix(1e7).unwrap();
        assert!(far.norm() < 1e-12);
    }

    #[test]
    fn unstable_point_is_rejected() {
        let p = SystemParams::new(100.0, 2.0, 1.0, 3.5).unwrap();
        let model = FluctuationModel::new(&p, 144.0).unwrap();
        assert!(matches!(model.output_spectra(0.1), Err(Error::Unstable { .. })));
    }
}
