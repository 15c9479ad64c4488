//! Single Λ-atom operator algebra.
//!
//! Levels are indexed `|1⟩ = 0`, `|2⟩ = 1`, `|e⟩ = 2`. The excited state
//! decays at total rate 2γ, split evenly into the two ground states; the
//! ground coherence dephases at γ₀. Rates are in units of γ.

use nalgebra::{Matrix3, SMatrix, SVector};
use num_complex::Complex64;

pub(crate) type Op = Matrix3<Complex64>;
pub(crate) type Superop = SMatrix<Complex64, 9, 9>;

pub(crate) const G1: usize = 0;
pub(crate) const G2: usize = 1;
pub(crate) const EXC: usize = 2;

/// `|i⟩⟨j|`
pub(crate) fn sigma(i: usize, j: usize) -> Op {
    let mut m = Op::zeros();
    m[(i, j)] = Complex64::new(1.0, 0.0);
    m
}

/// Rotating-frame Hamiltonian for Rabi frequencies `Ω₁ = g⟨A₁⟩`,
/// `Ω₂ = g⟨A₂⟩` and detunings `Δ₁ = −δ`, `Δ₂ = +δ`.
pub(crate) fn hamiltonian(omega1: Complex64, omega2: Complex64, delta_bar: f64) -> Op {
    sigma(G1, G1) * Complex64::from(-delta_bar)
        + sigma(G2, G2) * Complex64::from(delta_bar)
        + sigma(EXC, G1) * omega1
        + sigma(G1, EXC) * omega1.conj()
        + sigma(EXC, G2) * omega2
        + sigma(G2, EXC) * omega2.conj()
}

pub(crate) fn jump_operators(gamma0: f64) -> Vec<Op> {
    let mut jumps = vec![sigma(G1, EXC), sigma(G2, EXC)];
    if gamma0 > 0.0 {
        let dephasing = (sigma(G1, G1) - sigma(G2, G2)) * Complex64::from((gamma0 / 2.0).sqrt());
        jumps.push(dephasing);
    }
    jumps
}

fn commutator(a: &Op, b: &Op) -> Op {
    a * b - b * a
}

/// Schrödinger-picture Lindblad generator applied to `rho`.
pub(crate) fn lindblad(h: &Op, jumps: &[Op], rho: &Op) -> Op {
    let i = Complex64::i();
    let mut out = commutator(h, rho) * (-i);
    for c in jumps {
        let cd = c.adjoint();
        let cdc = cd * c;
        out += c * rho * cd - (cdc * rho + rho * cdc) * Complex64::from(0.5);
    }
    out
}

/// Heisenberg-picture (adjoint) generator applied to the operator `x`.
pub(crate) fn heisenberg(h: &Op, jumps: &[Op], x: &Op) -> Op {
    let i = Complex64::i();
    let mut out = commutator(h, x) * i;
    for c in jumps {
        let cd = c.adjoint();
        let cdc = cd * c;
        out += cd * x * c - (cdc * x + x * cdc) * Complex64::from(0.5);
    }
    out
}

/// Column-stacked matrix of the Lindblad generator.
pub(crate) fn liouvillian(h: &Op, jumps: &[Op]) -> Superop {
    let mut l = Superop::zeros();
    for k in 0..9 {
        let basis = sigma(k % 3, k / 3);
        let image = lindblad(h, jumps, &basis);
        l.set_column(k, &vec_op(&image));
    }
    l
}

pub(crate) fn vec_op(op: &Op) -> SVector<Complex64, 9> {
    SVector::<Complex64, 9>::from_column_slice(op.as_slice())
}

pub(crate) fn unvec_op(v: &SVector<Complex64, 9>) -> Op {
    Op::from_column_slice(v.as_slice())
}

pub(crate) fn expect(rho: &Op, x: &Op) -> Complex64 {
    (rho * x).trace()
}
