//! Squeezing, polarization-basis changes and EPR-type entanglement of the
//! output fields, plus spin-squeezing measures.

mod spin;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use spin::{lorentzian_half_width, optimize_alpha, spin_measures, spin_point, SpinResult};

use crate::error::{Error, Result};
use crate::langevin::SpectralResult;
use crate::optimize::NelderMead;

/// Squeezing in dB below vacuum, `−10·log₁₀(S)`.
pub fn squeezing_db(s: f64) -> f64 {
    -10.0 * s.log10()
}

/// EPR correlations in dB below the separability bound 2.
pub fn epr_db(e: f64) -> f64 {
    -10.0 * (e / 2.0).log10()
}

/// Minimal noise `S* = min_θ S_{X_θ}` of a symmetric quadrature block and
/// the angle `θ* ∈ [0, π)` reaching it (`0` when the block is isotropic).
pub fn min_quadrature_spectrum(block: &Matrix2<f64>) -> (f64, f64) {
    let (a, b) = (block[(0, 0)], block[(1, 1)]);
    let c = 0.5 * (block[(0, 1)] + block[(1, 0)]);
    let half_diff = 0.5 * (a - b);
    let radius = half_diff.hypot(c);
    let s_star = 0.5 * (a + b) - radius;
    if radius <= 1e-14 * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
        return (s_star, 0.0);
    }
    let theta = (0.5 * c.atan2(half_diff) + FRAC_PI_2).rem_euclid(PI);
    (s_star, theta)
}

/// Output pair `(a, b) = diag(e^{−iθ_a}, e^{−iθ_b})·U·(A₁, A₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeBasis {
    unitary: Matrix2<Complex64>,
    theta_a: f64,
    theta_b: f64,
}

const UNITARY_TOL: f64 = 1e-12;

impl ModeBasis {
    pub fn new(unitary: Matrix2<Complex64>, theta_a: f64, theta_b: f64) -> Result<Self> {
        let deviation = (unitary.adjoint() * unitary - Matrix2::identity()).camax();
        if deviation.is_nan() || deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { unitary, theta_a, theta_b })
    }

    pub fn identity() -> Self {
        Self {
            unitary: Matrix2::identity(),
            theta_a: 0.0,
            theta_b: 0.0,
        }
    }

    /// Dark and bright linear polarizations
    /// `A_x = (A₂ − A₁)/√2`, `A_y = −i(A₁ + A₂)/√2`.
    pub fn dark_bright() -> Self {
        let s = Complex64::from(FRAC_1_SQRT_2);
        let mi = Complex64::new(0.0, -FRAC_1_SQRT_2);
        Self {
            unitary: Matrix2::new(-s, s, mi, mi),
            theta_a: 0.0,
            theta_b: 0.0,
        }
    }

    /// SU(2) angles `(χ, ψ, ζ)` followed by the two quadrature phases.
    pub fn from_angles(p: &[f64; 5]) -> Self {
        let [chi, psi, zeta, theta_a, theta_b] = *p;
        let (s, c) = chi.sin_cos();
        let e = |x: f64| Complex64::from_polar(1.0, x);
        Self {
            unitary: Matrix2::new(e(psi) * c, e(zeta) * s, -e(-zeta) * s, e(-psi) * c),
            theta_a,
            theta_b,
        }
    }

    pub fn unitary(&self) -> &Matrix2<Complex64> {
        &self.unitary
    }

    pub fn thetas(&self) -> (f64, f64) {
        (self.theta_a, self.theta_b)
    }

    /// Full complex map including the quadrature phases.
    pub fn complex_map(&self) -> Matrix2<Complex64> {
        let phases = Matrix2::from_diagonal(&nalgebra::Vector2::new(
            Complex64::from_polar(1.0, -self.theta_a),
            Complex64::from_polar(1.0, -self.theta_b),
        ));
        phases * self.unitary
    }

    pub fn inverse(&self) -> Self {
        Self {
            unitary: self.complex_map().adjoint(),
            theta_a: 0.0,
            theta_b: 0.0,
        }
    }

    /// Real orthogonal map on `(X₁, Y₁, X₂, Y₂)`.
    pub fn quadrature_map(&self) -> Matrix4<f64> {
        let k = self.complex_map();
        let mut r = Matrix4::zeros();
        for a in 0..2 {
            for j in 0..2 {
                let u = k[(a, j)];
                r[(2 * a, 2 * j)] = u.re;
                r[(2 * a, 2 * j + 1)] = -u.im;
                r[(2 * a + 1, 2 * j)] = u.im;
                r[(2 * a + 1, 2 * j + 1)] = u.re;
            }
        }
        r
    }
}

/// Two-mode quadrature spectral matrix in the rotated basis.
pub fn transform_basis(output: &Matrix4<f64>, basis: &ModeBasis) -> Matrix4<f64> {
    let r = basis.quadrature_map();
    r * output * r.transpose()
}

/// `E = [Δ(X_a − X_b)² + Δ(Y_a + Y_b)²]/2`; two vacua give exactly 2.
pub fn epr_measure(output: &Matrix4<f64>, basis: &ModeBasis) -> f64 {
    epr_from_map(output, &basis.quadrature_map())
}

fn epr_from_map(output: &Matrix4<f64>, r: &Matrix4<f64>) -> f64 {
    let x: Vector4<f64> = (r.row(0) - r.row(2)).transpose();
    let y: Vector4<f64> = (r.row(1) + r.row(3)).transpose();
    0.5 * ((x.transpose() * output * x)[(0, 0)] + (y.transpose() * output * y)[(0, 0)])
}

/// Most entangled output pair found by the basis search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EprResult {
    pub e_star: f64,
    pub basis: ModeBasis,
    /// `(χ, ψ, ζ, θ_a, θ_b)` of [`ModeBasis::from_angles`].
    pub angles: [f64; 5],
    pub omega: f64,
}

impl EprResult {
    /// Below the separability bound by more than rounding.
    pub fn entangled(&self) -> bool {
        self.e_star < 2.0 * (1.0 - 1e-12)
    }
}

/// Angles of [`ModeBasis::dark_bright`].
pub const DARK_BRIGHT_ANGLES: [f64; 5] = [PI / 4.0, PI, 0.0, 0.0, -FRAC_PI_2];

/// Minimise `E_{a,b}` over all SU(2) mode mixings and quadrature phases.
///
/// Deterministic multi-start Nelder–Mead: a 3×3×3 grid over the SU(2)
/// angles, jittered by `seed`, plus the identity and dark/bright bases.
pub fn optimize_entanglement(spectra: &SpectralResult, seed: u64) -> Result<EprResult> {
    let output = spectra.output;
    let objective = |p: &[f64; 5]| epr_from_map(&output, &ModeBasis::from_angles(p).quadrature_map());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![[0.0; 5], DARK_BRIGHT_ANGLES];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let mut jitter = || rng.random_range(-0.05..0.05);
                starts.push([
                    PI / 12.0 + i as f64 * PI / 6.0 + jitter(),
                    j as f64 * 2.0 * PI / 3.0 + jitter(),
                    k as f64 * 2.0 * PI / 3.0 + jitter(),
                    jitter(),
                    jitter(),
                ]);
            }
        }
    }

    let nm = NelderMead::default();
    let mut best: Option<crate::optimize::Minimum<5>> = None;
    for start in starts {
        let m = nm.minimize(objective, start);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    if !best.converged {
        return Err(Error::NoConvergence {
            iterations: best.iterations,
            spread: best.spread,
        });
    }
    Ok(EprResult {
        e_star: best.value,
        basis: ModeBasis::from_angles(&best.x),
        angles: best.x,
        omega: spectra.omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn min_quadrature_examples() {
        assert_eq!(min_quadrature_spectrum(&Matrix2::identity()), (1.0, 0.0));
        let (s, t) = min_quadrature_spectrum(&Matrix2::new(2.0, 0.0, 0.0, 0.5));
        assert_relative_eq!(s, 0.5);
        assert_relative_eq!(t, FRAC_PI_2);
    }

    #[test]
    fn min_quadrature_is_reached() {
        let block = Matrix2::new(1.7, -0.6, -0.6, 0.9);
        let (s, t) = min_quadrature_spectrum(&block);
        let (sn, cs) = t.sin_cos();
        let direct = cs * cs * block[(0, 0)] + sn * sn * block[(1, 1)] + 2.0 * sn * cs * block[(0, 1)];
        assert_relative_eq!(direct, s, max_relative = 1e-14);
        assert_relative_eq!(s, block.symmetric_eigenvalues().min(), max_relative = 1e-14);
    }

    #[test]
    fn bases_are_unitary() {
        for b in [ModeBasis::identity(), ModeBasis::dark_bright(), ModeBasis::from_angles(&[0.3, 1.0, -2.0, 0.5, 0.1])] {
            ModeBasis::new(b.complex_map(), 0.0, 0.0).unwrap();
            let r = b.quadrature_map();
            assert!((r * r.transpose() - Matrix4::identity()).amax() < 1e-14);
        }
        let bad = Matrix2::new(Complex64::from(1.0), Complex64::from(0.1), Complex64::from(0.0), Complex64::from(1.0));
        assert!(matches!(ModeBasis::new(bad, 0.0, 0.0), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn dark_bright_angles_match() {
        let a = ModeBasis::from_angles(&DARK_BRIGHT_ANGLES).complex_map();
        let b = ModeBasis::dark_bright().complex_map();
        assert!((a - b).camax() < 1e-15);
    }

    #[test]
    fn round_trip_and_identity() {
        let s = Matrix4::new(
            1.3, 0.2, 0.1, -0.3, 0.2, 2.0, 0.4, 0.0, 0.1, 0.4, 0.8, 0.05, -0.3, 0.0, 0.05, 1.1,
        );
        assert_eq!(transform_basis(&s, &ModeBasis::identity()), s);
        let db = ModeBasis::dark_bright();
        let back = transform_basis(&transform_basis(&s, &db), &db.inverse());
        assert!((back - s).amax() < 1e-12);
        let rotated = transform_basis(&s, &ModeBasis::from_angles(&[0.4, 0.3, 1.1, 0.0, 0.0]));
        assert_relative_eq!(rotated.trace(), s.trace(), max_relative = 1e-13);
    }

    #[test]
    fn vacuum_epr_is_two() {
        for b in [ModeBasis::identity(), ModeBasis::dark_bright(), ModeBasis::from_angles(&[1.0, 2.0, 3.0, 4.0, 5.0])] {
            assert_relative_eq!(epr_measure(&Matrix4::identity(), &b), 2.0, max_relative = 1e-14);
        }
        let r = optimize_entanglement(
            &SpectralResult { omega: 0.0, output: Matrix4::identity() },
            7,
        )
        .unwrap();
        assert_relative_eq!(r.e_star, 2.0, max_relative = 1e-12);
        assert!(!r.entangled());
    }

    #[test]
    fn squeezed_pair_on_beamsplitter() {
        // two vacua squeezed to (ΔX², ΔY²) = (0.5, 2), the second delayed by
        // π/2, mixed as a = (c₁ + c₂')/√2, b = (c₂' − c₁)/√2
        let source = Matrix4::from_diagonal(&Vector4::new(0.5, 2.0, 0.5, 2.0));
        let shift = ModeBasis::new(
            Matrix2::new(Complex64::from(1.0), Complex64::from(0.0), Complex64::from(0.0), Complex64::i()),
            0.0,
            0.0,
        )
        .unwrap();
        let s = Complex64::from(FRAC_1_SQRT_2);
        let mix = ModeBasis::new(Matrix2::new(s, s, -s, s), 0.0, 0.0).unwrap();
        let pair = transform_basis(&transform_basis(&source, &shift), &mix);
        // brute force: X_a − X_b = √2·X_c₁, Y_a + Y_b = √2·X_c₂
        let direct = 0.5 * (2.0 * source[(0, 0)] + 2.0 * source[(2, 2)]);
        assert_relative_eq!(direct, 1.0);
        assert_relative_eq!(epr_measure(&pair, &ModeBasis::identity()), 1.0, max_relative = 1e-14);

        let uncorrelated = Matrix4::from_diagonal(&Vector4::new(0.5, 2.0, 0.5, 2.0));
        assert_relative_eq!(epr_measure(&uncorrelated, &ModeBasis::identity()), 2.5, max_relative = 1e-14);
    }
}
