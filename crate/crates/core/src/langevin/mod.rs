//! Linearised Heisenberg–Langevin dynamics around a semiclassical working
//! point.
//!
//! Fluctuations are collected in the ladder basis
//! `[δA₁, δA₁†, δA₂, δA₂†, δP₁, δP₁†, δP₂, δP₂†, δJ, δJ†, δΠ₁, δΠ₂]` with
//! `P_i = Σ|i⟩⟨e|`, `J = Σ|1⟩⟨2|`, `Π_i = Σ|i⟩⟨i|`; the excited population
//! is removed through `Π_e = N − Π₁ − Π₂`. Atomic operators are scaled by
//! `1/√N`, so the collective coupling enters only through `G = √(2κγC)`.
//!
//! Cavity equations: `dA₁/dt = −κ(1−iφ)A₁ − iGP₁ + √(2κ)A₁ⁱⁿ` (and the
//! mirror image for mode 2), with outputs `A^out = √(2κ)A − Aⁱⁿ`.
//! Diffusion coefficients follow from the generalised Einstein relation
//! `D_ab = Σ_c ⟨[a, c†][c, b]⟩` evaluated on the single-atom steady state.

mod lyapunov;
mod spectra;

use nalgebra::{SMatrix, SymmetricEigen};
use num_complex::Complex64;

pub use lyapunov::Covariance;
pub use spectra::{default_frequency_grid, log_grid, Combination, SpectralResult};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::semiclassical::atom::{self, Op, EXC, G1, G2};
use crate::semiclassical::{bloch_steady_state, BlochState, Branch, OperatingPoint};

pub const DIM: usize = 12;
pub const INPUTS: usize = 4;

pub type CMat = SMatrix<Complex64, DIM, DIM>;
pub type RMat = SMatrix<f64, DIM, DIM>;
pub type CInput = SMatrix<Complex64, DIM, INPUTS>;
pub type RInput = SMatrix<f64, DIM, INPUTS>;

/// Strict stability margin on the largest real part of the drift spectrum.
pub const STABILITY_MARGIN: f64 = 1e-12;

/// Labels of the ladder basis, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fluctuation {
    A1,
    A1Dag,
    A2,
    A2Dag,
    P1,
    P1Dag,
    P2,
    P2Dag,
    J,
    JDag,
    Pi1,
    Pi2,
}

impl Fluctuation {
    pub const ALL: [Fluctuation; DIM] = [
        Self::A1,
        Self::A1Dag,
        Self::A2,
        Self::A2Dag,
        Self::P1,
        Self::P1Dag,
        Self::P2,
        Self::P2Dag,
        Self::J,
        Self::JDag,
        Self::Pi1,
        Self::Pi2,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::A1 => "dA1",
            Self::A1Dag => "dA1+",
            Self::A2 => "dA2",
            Self::A2Dag => "dA2+",
            Self::P1 => "dP1",
            Self::P1Dag => "dP1+",
            Self::P2 => "dP2",
            Self::P2Dag => "dP2+",
            Self::J => "dJ",
            Self::JDag => "dJ+",
            Self::Pi1 => "dPi1",
            Self::Pi2 => "dPi2",
        }
    }

    /// Label of the real quadrature at the same index.
    pub fn quadrature_label(self) -> &'static str {
        match self {
            Self::A1 => "X_A1",
            Self::A1Dag => "Y_A1",
            Self::A2 => "X_A2",
            Self::A2Dag => "Y_A2",
            Self::P1 => "X_P1",
            Self::P1Dag => "Y_P1",
            Self::P2 => "X_P2",
            Self::P2Dag => "Y_P2",
            Self::J => "X_J",
            Self::JDag => "Y_J",
            Self::Pi1 => "Pi1",
            Self::Pi2 => "Pi2",
        }
    }
}

const ATOMIC_OFFSET: usize = 4;
/// Number of (operator, adjoint) pairs at the start of the basis.
const PAIRS: usize = 5;

fn atomic_operators() -> [Op; 8] {
    [
        atom::sigma(G1, EXC),
        atom::sigma(EXC, G1),
        atom::sigma(G2, EXC),
        atom::sigma(EXC, G2),
        atom::sigma(G1, G2),
        atom::sigma(G2, G1),
        atom::sigma(G1, G1),
        atom::sigma(G2, G2),
    ]
}

/// Coordinates of a single-atom operator on the atomic part of the basis,
/// dropping the identity component.
fn decompose(y: &Op) -> [Complex64; 8] {
    let ee = y[(EXC, EXC)];
    [
        y[(G1, EXC)],
        y[(EXC, G1)],
        y[(G2, EXC)],
        y[(EXC, G2)],
        y[(G1, G2)],
        y[(G2, G1)],
        y[(G1, G1)] - ee,
        y[(G2, G2)] - ee,
    ]
}

/// Linear fluctuation dynamics `dx/dt = Mx + Bxⁱⁿ + F`.
#[derive(Debug, Clone)]
pub struct FluctuationModel {
    pub params: SystemParams<f64>,
    pub point: OperatingPoint<f64>,
    pub bloch: BlochState,
    /// Drift matrix `M` in the ladder basis.
    pub drift: CMat,
    /// Atomic noise correlations, `⟨F_a(t)F_b(t')⟩ = D_ab δ(t−t')`.
    pub diffusion: CMat,
    /// Coupling of `[δA₁ⁱⁿ, δA₁ⁱⁿ†, δA₂ⁱⁿ, δA₂ⁱⁿ†]`.
    pub input_coupling: CInput,
    quad: QuadratureForm,
}

/// Real representation in the quadrature basis
/// `[X_A1, Y_A1, X_A2, Y_A2, X_P1, Y_P1, X_P2, Y_P2, X_J, Y_J, Π₁, Π₂]` with
/// `X = a + a†`, `Y = −i(a − a†)`.
#[derive(Debug, Clone)]
pub struct QuadratureForm {
    pub drift: RMat,
    /// Symmetrised atomic diffusion.
    pub diffusion: RMat,
    pub input_coupling: RInput,
    /// Symmetrised diffusion including vacuum input noise.
    pub total_diffusion: RMat,
    pub max_real_eigenvalue: f64,
}

/// Drift and input-coupling matrices at the given Bloch state.
pub fn build_drift(params: &SystemParams<f64>, bloch: &BlochState) -> (CMat, CInput) {
    let kappa = params.kappa;
    let phi = params.phi;
    let i = Complex64::i();
    let g = (2.0 * kappa * params.cooperativity).sqrt();
    let omega = Complex64::from(bloch.omega_rabi);
    let h = atom::hamiltonian(omega, omega, bloch.delta_bar);
    let jumps = atom::jump_operators(bloch.gamma0);
    let rho = bloch.density_matrix();

    let mut m = CMat::zeros();
    m[(0, 0)] = Complex64::new(-kappa, kappa * phi);
    m[(1, 1)] = m[(0, 0)].conj();
    m[(2, 2)] = Complex64::new(-kappa, -kappa * phi);
    m[(3, 3)] = m[(2, 2)].conj();
    m[(0, 4)] = -i * g;
    m[(1, 5)] = i * g;
    m[(2, 6)] = -i * g;
    m[(3, 7)] = i * g;

    // derivatives of i[H, X] with respect to A₁, A₁†, A₂, A₂†
    let field_ops = [
        atom::sigma(EXC, G1),
        atom::sigma(G1, EXC),
        atom::sigma(EXC, G2),
        atom::sigma(G2, EXC),
    ];
    for (a, x) in atomic_operators().iter().enumerate() {
        let row = ATOMIC_OFFSET + a;
        for (k, c) in decompose(&atom::heisenberg(&h, &jumps, x)).into_iter().enumerate() {
            m[(row, ATOMIC_OFFSET + k)] = c;
        }
        for (f, op) in field_ops.iter().enumerate() {
            m[(row, f)] = i * g * atom::expect(&rho, &(op * x - x * op));
        }
    }

    let mut b = CInput::zeros();
    let s = Complex64::from((2.0 * kappa).sqrt());
    for k in 0..INPUTS {
        b[(k, k)] = s;
    }
    (m, b)
}

/// Atomic diffusion from the Einstein relation on the single-atom state.
pub fn build_diffusion(bloch: &BlochState) -> CMat {
    let jumps = atom::jump_operators(bloch.gamma0);
    let rho = bloch.density_matrix();
    let ops = atomic_operators();
    let mut d = CMat::zeros();
    for (a, x) in ops.iter().enumerate() {
        for (b, y) in ops.iter().enumerate() {
            let v: Complex64 = jumps
                .iter()
                .map(|c| {
                    let cd = c.adjoint();
                    atom::expect(&rho, &((x * cd - cd * x) * (c * y - y * c)))
                })
                .sum();
            d[(ATOMIC_OFFSET + a, ATOMIC_OFFSET + b)] = v;
        }
    }
    d
}

/// `W` with `x_quad = W x_ladder`.
fn quadrature_transform() -> CMat {
    let mut w = CMat::zeros();
    let one = Complex64::from(1.0);
    let i = Complex64::i();
    for p in 0..PAIRS {
        let (a, ad) = (2 * p, 2 * p + 1);
        w[(a, a)] = one;
        w[(a, ad)] = one;
        w[(ad, a)] = -i;
        w[(ad, ad)] = i;
    }
    for k in 2 * PAIRS..DIM {
        w[(k, k)] = one;
    }
    w
}

fn quadrature_transform_inverse() -> CMat {
    let mut w = CMat::zeros();
    let half = Complex64::from(0.5);
    let i = Complex64::i();
    for p in 0..PAIRS {
        let (a, ad) = (2 * p, 2 * p + 1);
        w[(a, a)] = half;
        w[(a, ad)] = half * i;
        w[(ad, a)] = half;
        w[(ad, ad)] = -half * i;
    }
    for k in 2 * PAIRS..DIM {
        w[(k, k)] = Complex64::from(1.0);
    }
    w
}

fn real_part<const R: usize, const C: usize>(m: &SMatrix<Complex64, R, C>) -> SMatrix<f64, R, C> {
    m.map(|z| z.re)
}

fn max_real_eigenvalue(m: &RMat) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

impl FluctuationModel {
    /// Linearise around the symmetric working point with intracavity
    /// intensity `intensity`.
    pub fn new(params: &SystemParams<f64>, intensity: f64) -> Result<Self> {
        let params = params.validated()?;
        let point = OperatingPoint::new(&params, intensity)?;
        let bloch = bloch_steady_state(intensity.sqrt(), params.delta_bar, params.gamma0)?;
        if bloch.residual > 1e-10 {
            return Err(Error::SteadyStateResidual { residual: bloch.residual });
        }
        Ok(Self::from_parts(params, point, bloch))
    }

    /// Working point at `α = δ_s/|δ̄|` on the threshold curve.
    pub fn at_threshold_ratio(params: &SystemParams<f64>, alpha: f64) -> Result<Self> {
        let point = OperatingPoint::at_threshold_ratio(params, alpha)?;
        Self::new(params, point.intensity)
    }

    fn from_parts(params: SystemParams<f64>, point: OperatingPoint<f64>, bloch: BlochState) -> Self {
        let (drift, input_coupling) = build_drift(&params, &bloch);
        let diffusion = build_diffusion(&bloch);
        let quad = Self::quadrature_form(&drift, &diffusion, &input_coupling);
        Self {
            params,
            point,
            bloch,
            drift,
            diffusion,
            input_coupling,
            quad,
        }
    }

    fn quadrature_form(drift: &CMat, diffusion: &CMat, input: &CInput) -> QuadratureForm {
        let w = quadrature_transform();
        let w_inv = quadrature_transform_inverse();
        let m = real_part(&(w * drift * w_inv));
        let dq = w * diffusion * w.transpose();
        let d = real_part(&((dq + dq.transpose()) * Complex64::from(0.5)));
        // inputs transform with the field block of W
        let w_in_inv = w_inv.fixed_view::<INPUTS, INPUTS>(0, 0).into_owned();
        let b = real_part(&(w * input * w_in_inv));
        let total = d + b * b.transpose();
        QuadratureForm {
            max_real_eigenvalue: max_real_eigenvalue(&m),
            drift: m,
            diffusion: d,
            input_coupling: b,
            total_diffusion: total,
        }
    }

    pub fn quadrature(&self) -> &QuadratureForm {
        &self.quad
    }

    pub fn max_real_eigenvalue(&self) -> f64 {
        self.quad.max_real_eigenvalue
    }

    /// Eigenvalues of the drift matrix.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.quad.drift.complex_eigenvalues().iter().copied().collect()
    }

    pub fn is_stable(&self) -> bool {
        self.max_real_eigenvalue() < -STABILITY_MARGIN
    }

    pub(crate) fn require_stable(&self) -> Result<()> {
        if self.is_stable() {
            Ok(())
        } else {
            Err(Error::Unstable {
                max_real: self.max_real_eigenvalue(),
            })
        }
    }

    /// Smallest eigenvalue of the symmetrised atomic diffusion matrix.
    pub fn min_diffusion_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.quad.diffusion).eigenvalues.min()
    }

    /// Loss and nonlinear phase implied by the mean-field cavity equation
    /// with the coupling used in the drift matrix:
    /// `A + iφ_nl = iG²⟨σ₁ₑ⟩/(κΩ)`.
    pub fn mean_field_susceptibility(&self) -> (f64, f64) {
        let kappa = self.params.kappa;
        let g = (2.0 * kappa * self.params.cooperativity).sqrt();
        let z = Complex64::i() * self.bloch.p1 * (g * g / (kappa * self.bloch.omega_rabi));
        (z.re, z.im)
    }
}

/// Stability of every branch from the drift spectrum instead of the
/// closed-form threshold.
pub fn classify_branches(params: &SystemParams<f64>, branches: &mut [Branch<f64>]) -> Result<()> {
    for b in branches.iter_mut() {
        b.stable = FluctuationModel::new(params, b.intensity)?.is_stable();
    }
    Ok(())
}

/// Stability flag from drift eigenvalues at intensity `intensity`.
pub fn stability(params: &SystemParams<f64>, intensity: f64) -> Result<bool> {
    Ok(FluctuationModel::new(params, intensity)?.is_stable())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn squeezing_point() -> SystemParams<f64> {
        SystemParams::new(100.0, 2.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn transform_inverse() {
        let prod = quadrature_transform() * quadrature_transform_inverse();
        assert!((prod - CMat::identity()).norm() < 1e-15);
    }

    #[test]
    fn quadrature_drift_is_real() {
        let model = FluctuationModel::new(&squeezing_point(), 144.0).unwrap();
        let w = quadrature_transform();
        let mq = w * model.drift * quadrature_transform_inverse();
        assert!(mq.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn empty_cavity_is_decoupled() {
        let p = SystemParams::new(0.0, 2.0, 1.5, 0.3).unwrap();
        let model = FluctuationModel::new(&p, 4.0).unwrap();
        for r in 0..4 {
            for c in 4..DIM {
                assert_eq!(model.drift[(r, c)], Complex64::from(0.0));
                assert_eq!(model.drift[(c, r)], Complex64::from(0.0));
            }
        }
        assert_eq!(model.drift[(0, 0)], Complex64::new(-2.0, 3.0));
        assert_eq!(model.drift[(2, 2)], Complex64::new(-2.0, -3.0));
        assert!(model.is_stable());
    }

    #[test]
    fn conjugation_pairing() {
        let model = FluctuationModel::new(&squeezing_point(), 144.0).unwrap();
        // swapping O ↔ O† maps M to its complex conjugate
        let swap = |k: usize| if k < 2 * PAIRS { k ^ 1 } else { k };
        for r in 0..DIM {
            for c in 0..DIM {
                let a = model.drift[(r, c)];
                let b = model.drift[(swap(r), swap(c))].conj();
                assert!((a - b).norm() < 1e-12, "({r},{c})");
            }
        }
    }

    #[test]
    fn squeezing_point_is_stable() {
        let model = FluctuationModel::new(&squeezing_point(), 144.0).unwrap();
        assert!(model.is_stable());
        let p = squeezing_point().with_delta_bar(1.5 * 2.0365).unwrap();
        assert!(!FluctuationModel::new(&p, 144.0).unwrap().is_stable());
    }

    #[test]
    fn mean_field_reproduces_closed_forms() {
        let model = FluctuationModel::new(&squeezing_point(), 144.0).unwrap();
        let (a, phi) = model.mean_field_susceptibility();
        assert_relative_eq!(a, model.point.absorption, max_relative = 1e-8);
        assert_relative_eq!(phi, model.point.phase_nl, max_relative = 1e-8);
    }

    #[test]
    fn dark_state_output_is_vacuum() {
        let p = squeezing_point().with_delta_bar(0.0).unwrap();
        let model = FluctuationModel::new(&p, 144.0).unwrap();
        for omega in [1e-3, 0.5, 7.0] {
            let s = model.output_spectra(omega).unwrap();
            assert!((s.output - nalgebra::Matrix4::identity()).amax() < 1e-9, "{}", s.output);
        }
    }

    #[test]
    fn diffusion_is_positive() {
        let p = squeezing_point().with_gamma0(0.01).unwrap();
        let model = FluctuationModel::new(&p, 20.0).unwrap();
        assert!(model.min_diffusion_eigenvalue() > -1e-10);
    }
}
