use nalgebra::{DMatrix, Matrix3, SVector};
use num_complex::Complex64;

use super::atom::{self, Op, EXC, G1, G2};
use crate::error::{ensure_finite, Error, Result};

/// Steady state of a single Λ atom driven by equal, real Rabi frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub pop1: f64,
    pub pop2: f64,
    pub pope: f64,
    /// `⟨|1⟩⟨e|⟩`
    pub p1: Complex64,
    /// `⟨|2⟩⟨e|⟩`
    pub p2: Complex64,
    /// `⟨|1⟩⟨2|⟩`
    pub j12: Complex64,
    pub omega_rabi: f64,
    pub delta_bar: f64,
    pub gamma0: f64,
    /// Max-norm of the generator applied to the state.
    pub residual: f64,
}

const RESIDUAL_TOL: f64 = 1e-12;

/// Numeric fixed point of the single-atom master equation.
///
/// `omega_rabi` is `Ω/γ` for each transition. Fails when the generator has
/// more than one stationary state, which happens whenever the drive is off.
pub fn bloch_steady_state(omega_rabi: f64, delta_bar: f64, gamma0: f64) -> Result<BlochState> {
    ensure_finite("omega_rabi", omega_rabi)?;
    ensure_finite("delta_bar", delta_bar)?;
    ensure_finite("gamma0", gamma0)?;
    if gamma0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "gamma0",
            reason: "must be >= 0".into(),
        });
    }
    let omega = Complex64::from(omega_rabi);
    let h = atom::hamiltonian(omega, omega, delta_bar);
    let jumps = atom::jump_operators(gamma0);
    let l = atom::liouvillian(&h, &jumps);

    let svd = DMatrix::from_iterator(9, 9, l.iter().copied()).svd(false, false);
    let scale = svd.singular_values.max().max(1.0);
    let kernel = svd
        .singular_values
        .iter()
        .filter(|s| **s < 1e-10 * scale)
        .count();
    if kernel > 1 {
        return Err(Error::DegenerateSteadyState { dim: kernel });
    }

    // The ρ_ee row is redundant under trace preservation; swap it for Tr ρ = 1.
    let ee = EXC + 3 * EXC;
    let mut system = l;
    let mut rhs = SVector::<Complex64, 9>::zeros();
    for k in 0..9 {
        system[(ee, k)] = Complex64::from(if k % 4 == 0 { 1.0 } else { 0.0 });
    }
    rhs[ee] = Complex64::from(1.0);
    let sol = system.lu().solve(&rhs).ok_or(Error::Singular {
        context: "Bloch steady state",
        condition: f64::INFINITY,
    })?;
    let mut rho = atom::unvec_op(&sol);
    // enforce exact hermiticity
    rho = (rho + rho.adjoint()) * Complex64::from(0.5);

    let residual = atom::lindblad(&h, &jumps, &rho).camax();
    if residual > RESIDUAL_TOL * scale {
        return Err(Error::SteadyStateResidual { residual });
    }

    Ok(BlochState {
        pop1: rho[(G1, G1)].re,
        pop2: rho[(G2, G2)].re,
        pope: rho[(EXC, EXC)].re,
        p1: rho[(EXC, G1)],
        p2: rho[(EXC, G2)],
        j12: rho[(G2, G1)],
        omega_rabi,
        delta_bar,
        gamma0,
        residual,
    })
}

impl BlochState {
    /// Single-atom density matrix in the basis `(|1⟩, |2⟩, |e⟩)`.
    pub fn density_matrix(&self) -> Matrix3<Complex64> {
        let mut rho = Op::zeros();
        rho[(G1, G1)] = self.pop1.into();
        rho[(G2, G2)] = self.pop2.into();
        rho[(EXC, EXC)] = self.pope.into();
        rho[(EXC, G1)] = self.p1;
        rho[(G1, EXC)] = self.p1.conj();
        rho[(EXC, G2)] = self.p2;
        rho[(G2, EXC)] = self.p2.conj();
        rho[(G2, G1)] = self.j12;
        rho[(G1, G2)] = self.j12.conj();
        rho
    }

    /// Loss and nonlinear phase `(A, φ_nl)` seen by mode 1, from the atomic
    /// polarisation `⟨P₁⟩` through `A + iφ_nl = 2C·i⟨σ₁ₑ⟩/Ω`.
    pub fn susceptibility(&self, cooperativity: f64) -> (f64, f64) {
        Self::loss_phase(self.p1, self.omega_rabi, cooperativity)
    }

    /// Same as [`Self::susceptibility`] for mode 2; returns `(A, −φ_nl)` in the
    /// symmetric configuration.
    pub fn susceptibility_mode2(&self, cooperativity: f64) -> (f64, f64) {
        Self::loss_phase(self.p2, self.omega_rabi, cooperativity)
    }

    fn loss_phase(p: Complex64, omega: f64, cooperativity: f64) -> (f64, f64) {
        if omega == 0.0 {
            return (0.0, 0.0);
        }
        let z = Complex64::i() * p * (2.0 * cooperativity / omega);
        (z.re, z.im)
    }

    /// Collective mean spin `(⟨J_x⟩, ⟨J_y⟩, ⟨J_z⟩)` for `n` atoms, with
    /// `J_x + iJ_y = Σ|1⟩⟨2|` and `J_z = (Π₂ − Π₁)/2`.
    pub fn mean_spin(&self, n: f64) -> [f64; 3] {
        [
            n * self.j12.re,
            n * self.j12.im,
            n * 0.5 * (self.pop2 - self.pop1),
        ]
    }

    /// Largest violation of the density-matrix invariants.
    pub fn invariant_violation(&self) -> f64 {
        let trace = (self.pop1 + self.pop2 + self.pope - 1.0).abs();
        let coherence = (self.j12.norm() - (self.pop1.max(0.0) * self.pop2.max(0.0)).sqrt()).max(0.0);
        let negative = (-self.pop1).max(-self.pop2).max(-self.pope).max(0.0);
        trace.max(coherence).max(negative)
    }
}
