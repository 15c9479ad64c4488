//! Semiclassical steady state of the symmetric configuration.
//!
//! Both intracavity fields carry the same normalised intensity
//! `I = Ω²/γ²`. The medium acts on mode 1 with loss `A` and nonlinear
//! phase `φ_nl` (mode 2 sees `A` and `−φ_nl`), and the input intensity
//! follows `I_in = I[(1+A)² + (φ−φ_nl)²]`.

pub(crate) mod atom;
mod bloch;

use num_complex::Complex;
use num_traits::Float;

pub use bloch::{bloch_steady_state, BlochState};

use crate::error::{ensure_finite, Error, Result};
use crate::params::SystemParams;

fn check_inputs<T: Float>(intensity: T, delta_bar: T, cooperativity: T) -> Result<()> {
    ensure_finite("intensity", intensity)?;
    ensure_finite("delta_bar", delta_bar)?;
    ensure_finite("cooperativity", cooperativity)?;
    if intensity < T::zero() {
        return Err(Error::InvalidParameter {
            name: "intensity",
            reason: "must be >= 0".into(),
        });
    }
    if cooperativity < T::zero() {
        return Err(Error::InvalidParameter {
            name: "cooperativity",
            reason: "must be >= 0".into(),
        });
    }
    Ok(())
}

/// `I² + δ̄² + Iδ̄² + δ̄⁴`
fn response_denominator<T: Float>(intensity: T, delta_bar: T) -> T {
    let d2 = delta_bar * delta_bar;
    intensity * intensity + d2 + intensity * d2 + d2 * d2
}

/// Absorption `A = Cδ̄²/(I² + δ̄² + Iδ̄² + δ̄⁴)`. Exactly zero on two-photon
/// resonance.
pub fn absorption<T: Float>(intensity: T, delta_bar: T, cooperativity: T) -> Result<T> {
    check_inputs(intensity, delta_bar, cooperativity)?;
    if delta_bar == T::zero() {
        return Ok(T::zero());
    }
    Ok(cooperativity * delta_bar * delta_bar / response_denominator(intensity, delta_bar))
}

/// Nonlinear phase `φ_nl = Cδ̄(I − δ̄²)/(I² + δ̄² + Iδ̄² + δ̄⁴)` for mode 1.
pub fn nonlinear_phase<T: Float>(intensity: T, delta_bar: T, cooperativity: T) -> Result<T> {
    check_inputs(intensity, delta_bar, cooperativity)?;
    if delta_bar == T::zero() {
        return Ok(T::zero());
    }
    let d2 = delta_bar * delta_bar;
    Ok(cooperativity * delta_bar * (intensity - d2) / response_denominator(intensity, delta_bar))
}

pub fn input_intensity<T: Float>(intensity: T, delta_bar: T, cooperativity: T, phi: T) -> Result<T> {
    ensure_finite("phi", phi)?;
    let a = absorption(intensity, delta_bar, cooperativity)?;
    let p = nonlinear_phase(intensity, delta_bar, cooperativity)?;
    let one = T::one();
    Ok(intensity * ((one + a) * (one + a) + (phi - p) * (phi - p)))
}

/// Two-photon detuning `δ_s/γ = √(1+φ²)·I/C` above which the symmetric
/// solution loses stability (large-C, `I ≫ δ̄` approximation). Infinite for
/// an empty cavity.
pub fn threshold_delta<T: Float>(intensity: T, cooperativity: T, phi: T) -> Result<T> {
    check_inputs(intensity, T::zero(), cooperativity)?;
    ensure_finite("phi", phi)?;
    if cooperativity == T::zero() {
        return Ok(T::infinity());
    }
    Ok((T::one() + phi * phi).sqrt() * intensity / cooperativity)
}

/// Leading-order loss and phase for `Ω ≫ γ, δ`: `(Cδ̄²/I², Cδ̄/I)`.
pub fn asymptotic_cpt<T: Float>(intensity: T, delta_bar: T, cooperativity: T) -> Result<(T, T)> {
    check_inputs(intensity, delta_bar, cooperativity)?;
    if delta_bar == T::zero() {
        return Ok((T::zero(), T::zero()));
    }
    if intensity == T::zero() {
        return Err(Error::DivisionByZero("asymptotic_cpt at I = 0"));
    }
    Ok((
        cooperativity * delta_bar * delta_bar / (intensity * intensity),
        cooperativity * delta_bar / intensity,
    ))
}

/// Far-detuned two-level (Kerr) medium: `(C/(2Δ̄²), C·I/Δ̄³)`.
pub fn kerr_two_level<T: Float>(cooperativity: T, intensity: T, detuning_bar: T) -> Result<(T, T)> {
    check_inputs(intensity, detuning_bar, cooperativity)?;
    if detuning_bar == T::zero() {
        return Err(Error::DivisionByZero("Kerr detuning"));
    }
    let two = T::one() + T::one();
    let d = detuning_bar;
    Ok((cooperativity / (two * d * d), cooperativity * intensity / (d * d * d)))
}

/// Medium whose nonlinearity-to-absorption ratio is compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium<T> {
    /// Λ atoms near the dark resonance.
    Cpt { intensity: T, delta_bar: T },
    /// Far-detuned two-level atoms.
    Kerr { intensity: T, detuning_bar: T },
}

/// Ratio `φ_nl/A`: `(I − δ̄²)/δ̄` for the dark resonance, `2I/Δ̄` for Kerr.
pub fn figure_of_merit<T: Float>(medium: Medium<T>) -> Result<T> {
    match medium {
        Medium::Cpt { intensity, delta_bar } => {
            check_inputs(intensity, delta_bar, T::one())?;
            if delta_bar == T::zero() {
                return Err(Error::DivisionByZero("CPT figure of merit at zero detuning"));
            }
            Ok((intensity - delta_bar * delta_bar) / delta_bar)
        }
        Medium::Kerr { intensity, detuning_bar } => {
            check_inputs(intensity, detuning_bar, T::one())?;
            if detuning_bar == T::zero() {
                return Err(Error::DivisionByZero("Kerr figure of merit at zero detuning"));
            }
            Ok((T::one() + T::one()) * intensity / detuning_bar)
        }
    }
}

/// Cavity reflection coefficients `(r₁, r₂)` with
/// `r₁ = [(1−A) + iΦ]/[(1+A) − iΦ]`, `Φ = φ − φ_nl`, and `r₂ = r₁*`.
///
/// An empty resonant cavity reflects with `r = +1`.
pub fn reflectivity<T: Float>(
    intensity: T,
    delta_bar: T,
    cooperativity: T,
    phi: T,
) -> Result<(Complex<T>, Complex<T>)> {
    ensure_finite("phi", phi)?;
    let a = absorption(intensity, delta_bar, cooperativity)?;
    let detuning = phi - nonlinear_phase(intensity, delta_bar, cooperativity)?;
    Ok(reflectivity_from(a, detuning))
}

pub fn reflectivity_from<T: Float>(absorption: T, detuning: T) -> (Complex<T>, Complex<T>) {
    let one = T::one();
    let r1 = Complex::new(one - absorption, detuning) / Complex::new(one + absorption, -detuning);
    (r1, r1.conj())
}

/// First-order mean collective spin `(−N/2, (N/2)·δ̄/I, 0)` close to the dark
/// resonance.
pub fn mean_spin<T: Float>(intensity: T, delta_bar: T, atom_number: T) -> Result<[T; 3]> {
    check_inputs(intensity, delta_bar, T::one())?;
    ensure_finite("atom_number", atom_number)?;
    let half = atom_number / (T::one() + T::one());
    if delta_bar == T::zero() {
        return Ok([-half, T::zero(), T::zero()]);
    }
    if intensity == T::zero() {
        return Err(Error::DivisionByZero("mean spin at I = 0"));
    }
    Ok([-half, half * delta_bar / intensity, T::zero()])
}

/// Semiclassical working point at a given intracavity intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint<T> {
    pub intensity: T,
    pub omega_rabi: T,
    pub absorption: T,
    pub phase_nl: T,
    pub input_intensity: T,
    pub delta_s: T,
    /// Threshold test `|δ̄| ≤ δ_s`.
    pub stable: bool,
}

impl<T: Float> OperatingPoint<T> {
    pub fn new(params: &SystemParams<T>, intensity: T) -> Result<Self> {
        let c = params.cooperativity;
        let d = params.delta_bar;
        let delta_s = threshold_delta(intensity, c, params.phi)?;
        Ok(Self {
            intensity,
            omega_rabi: params.gamma * intensity.sqrt(),
            absorption: absorption(intensity, d, c)?,
            phase_nl: nonlinear_phase(intensity, d, c)?,
            input_intensity: input_intensity(intensity, d, c, params.phi)?,
            delta_s,
            stable: d.abs() <= delta_s,
        })
    }

    /// Point whose threshold sits at `alpha·|δ̄|`, i.e. `I = α|δ̄|C/√(1+φ²)`.
    pub fn at_threshold_ratio(params: &SystemParams<T>, alpha: T) -> Result<Self> {
        let intensity = alpha * params.delta_bar.abs() * params.cooperativity
            / (T::one() + params.phi * params.phi).sqrt();
        Self::new(params, intensity)
    }

    /// `α = δ_s/|δ̄|`
    pub fn alpha(&self, params: &SystemParams<T>) -> T {
        self.delta_s / params.delta_bar.abs()
    }
}

/// One solution of the input–output intensity equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<T> {
    pub intensity: T,
    pub stable: bool,
}

const BRACKET_POINTS: usize = 400;

/// All intracavity intensities compatible with `input_intensity`, sorted
/// ascending and flagged with the threshold test.
///
/// Roots are bracketed on a log-spaced grid over `[1e-6, 1e6]·I_in` and
/// refined by bisection down to adjacent floating-point numbers.
pub fn solve_branches<T: Float>(params: &SystemParams<T>, input: T) -> Result<Vec<Branch<T>>> {
    ensure_finite("input_intensity", input)?;
    if input < T::zero() {
        return Err(Error::InvalidParameter {
            name: "input_intensity",
            reason: "must be >= 0".into(),
        });
    }
    let to_t = |x: f64| T::from(x).expect("float conversion");
    if input == T::zero() {
        let p = OperatingPoint::new(params, T::zero())?;
        return Ok(vec![Branch { intensity: T::zero(), stable: p.stable }]);
    }
    let f = |i: T| -> Result<T> {
        Ok(input_intensity(i, params.delta_bar, params.cooperativity, params.phi)? - input)
    };

    let lo = (input * to_t(1e-6)).ln();
    let hi = (input * to_t(1e6)).ln();
    let step = (hi - lo) / to_t((BRACKET_POINTS - 1) as f64);
    let grid: Vec<T> = (0..BRACKET_POINTS)
        .map(|k| (lo + step * to_t(k as f64)).exp())
        .collect();

    let mut roots = Vec::new();
    let mut prev = (grid[0], f(grid[0])?);
    if prev.1 == T::zero() {
        roots.push(prev.0);
    }
    for &x in &grid[1..] {
        let fx = f(x)?;
        if fx == T::zero() {
            roots.push(x);
        } else if prev.1 != T::zero() && (prev.1 < T::zero()) != (fx < T::zero()) {
            roots.push(bisect(&f, prev.0, prev.1, x)?);
        }
        prev = (x, fx);
    }
    if roots.is_empty() {
        return Err(Error::NoBracket {
            input_intensity: input.to_f64().unwrap_or(f64::NAN),
        });
    }
    roots
        .into_iter()
        .map(|intensity| {
            let p = OperatingPoint::new(params, intensity)?;
            Ok(Branch { intensity, stable: p.stable })
        })
        .collect()
}

fn bisect<T: Float>(f: &impl Fn(T) -> Result<T>, mut a: T, mut fa: T, mut b: T) -> Result<T> {
    let two = T::one() + T::one();
    for _ in 0..2000 {
        let m = (a + b) / two;
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m)?;
        if fm == T::zero() {
            return Ok(m);
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let fb = f(b)?;
    Ok(if fa.abs() <= fb.abs() { a } else { b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn absorption_examples() {
        assert_eq!(absorption(5.0, 0.0, 100.0).unwrap(), 0.0);
        assert_relative_eq!(absorption(1.0, 1.0, 100.0).unwrap(), 25.0, max_relative = 1e-15);
        assert_relative_eq!(absorption(144.0, 1.0, 100.0).unwrap(), 0.0047888, max_relative = 1e-4);
        assert!(absorption(f64::NAN, 1.0, 1.0).is_err());
        assert!(absorption(1.0, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn phase_examples() {
        assert_eq!(nonlinear_phase(3.0, 0.0, 100.0).unwrap(), 0.0);
        assert_eq!(nonlinear_phase(0.25, 0.5, 100.0).unwrap(), 0.0);
        assert_relative_eq!(nonlinear_phase(144.0, 1.0, 100.0).unwrap(), 0.68480, max_relative = 1e-4);
        assert!(nonlinear_phase(4.0, -1.0, 10.0).unwrap() < 0.0);
        assert!(nonlinear_phase(0.5, 1.0, 10.0).unwrap() < 0.0);
    }

    #[test]
    fn input_intensity_examples() {
        assert_eq!(input_intensity(7.0, 0.0, 100.0, 0.0).unwrap(), 7.0);
        assert_eq!(input_intensity(7.0, 0.0, 100.0, 1.0).unwrap(), 14.0);
        assert_relative_eq!(input_intensity(144.0, 1.0, 100.0, 1.0).unwrap(), 159.689, max_relative = 1e-5);
    }

    #[test]
    fn threshold_examples() {
        assert_relative_eq!(threshold_delta(144.0, 100.0, 1.0).unwrap(), 2.0365, max_relative = 1e-4);
        assert_relative_eq!(threshold_delta(100.0, 100.0, 0.0).unwrap(), 1.0);
        assert!(threshold_delta(100.0, 1e12, 0.0).unwrap() < 1e-9);
        assert!(threshold_delta(1.0, 0.0, 0.0).unwrap().is_infinite());
    }

    #[test]
    fn asymptotics_and_kerr() {
        let (a, p) = asymptotic_cpt(144.0, 1.0, 100.0).unwrap();
        assert_relative_eq!(a, 0.0048225, max_relative = 1e-4);
        assert_relative_eq!(p, 0.69444, max_relative = 1e-4);
        let exact_a = absorption(144.0, 1.0, 100.0).unwrap();
        let exact_p = nonlinear_phase(144.0, 1.0, 100.0).unwrap();
        assert!(((a - exact_a) / exact_a).abs() < 0.015);
        assert!(((p - exact_p) / exact_p).abs() < 0.015);
        assert_eq!(asymptotic_cpt(3.0, 0.0, 10.0).unwrap(), (0.0, 0.0));

        let (ak, pk) = kerr_two_level(100.0, 1.0, 10.0).unwrap();
        assert_relative_eq!(ak, 0.5);
        assert_relative_eq!(pk, 0.1);
        assert_relative_eq!(pk / ak, 0.2, max_relative = 1e-14);
        let (af, pf) = kerr_two_level(100.0, 1.0, 1e12).unwrap();
        assert!(af < 1e-20 && pf < 1e-30);
        assert!(kerr_two_level(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn figure_of_merit_examples() {
        let cpt = |i, d| figure_of_merit(Medium::Cpt { intensity: i, delta_bar: d });
        assert_relative_eq!(cpt(144.0, 1.0).unwrap(), 143.0);
        assert_eq!(cpt(0.25, 0.5).unwrap(), 0.0);
        assert!(cpt(1.0, 0.0).is_err());
        let kerr = figure_of_merit(Medium::Kerr { intensity: 1.0, detuning_bar: 10.0 }).unwrap();
        assert_relative_eq!(kerr, 0.2);
    }

    #[test]
    fn reflectivity_examples() {
        let (r, _) = reflectivity_from(0.0, 0.0);
        assert_eq!(r, Complex::new(1.0, 0.0));
        let (r, _) = reflectivity_from(1.0, 0.0);
        assert_eq!(r.norm(), 0.0);
        let (r1, r2) = reflectivity(1.0, 1.0, 100.0, 0.0).unwrap();
        assert_relative_eq!(r1.re, -0.92308, max_relative = 1e-5);
        assert_eq!(r2, r1.conj());
        let (r, _) = reflectivity(2.0, 0.0, 100.0, 0.0).unwrap();
        assert_eq!(r, Complex::new(1.0, 0.0));
    }

    #[test]
    fn mean_spin_first_order() {
        assert_eq!(mean_spin(5.0, 0.0, 1.0).unwrap(), [-0.5, 0.0, 0.0]);
        assert_relative_eq!(mean_spin(144.0, 1.0, 1.0).unwrap()[1], 0.003472, max_relative = 1e-3);
    }

    #[test]
    fn exact_spin_matches_first_order() {
        for &d in &[1e-3, 1e-2, 1e-1] {
            let approx = mean_spin(144.0, d, 1.0).unwrap();
            let exact = bloch_steady_state(12.0, d, 0.0).unwrap().mean_spin(1.0);
            let rel = (exact[1] - approx[1]).abs() / approx[1];
            assert!(rel <= d * d, "δ̄ = {d}: relative error {rel}");
            assert!((exact[0] - approx[0]).abs() <= d * d);
            assert!(exact[2].abs() < 1e-12);
        }
    }

    #[test]
    fn branches_round_trip() {
        let p = SystemParams::new(100.0, 2.0, 1.0, 1.0).unwrap();
        let roots = solve_branches(&p, 159.689).unwrap();
        let i_in = input_intensity(144.0, 1.0, 100.0, 1.0).unwrap();
        let roots_exact = solve_branches(&p, i_in).unwrap();
        assert!(roots_exact.iter().any(|b| (b.intensity - 144.0).abs() < 1e-8));
        assert!(roots.iter().any(|b| (b.intensity - 144.0).abs() < 1e-3));
        for b in &roots_exact {
            let res = input_intensity(b.intensity, 1.0, 100.0, 1.0).unwrap() - i_in;
            assert!(res.abs() < 1e-10 * i_in.max(1.0));
        }
        assert!(roots_exact.windows(2).all(|w| w[0].intensity < w[1].intensity));
    }

    #[test]
    fn single_root_at_resonance() {
        let p = SystemParams::new(100.0, 2.0, 0.0, 0.0).unwrap();
        let roots = solve_branches(&p, 3.5).unwrap();
        assert_eq!(roots.len(), 1);
        assert_relative_eq!(roots[0].intensity, 3.5, max_relative = 1e-14);
        assert!(roots[0].stable);
    }

    #[test]
    fn zero_input_and_errors() {
        let p = SystemParams::new(100.0, 2.0, 0.0, 0.5).unwrap();
        assert_eq!(solve_branches(&p, 0.0).unwrap()[0].intensity, 0.0);
        assert!(solve_branches(&p, -1.0).is_err());
        assert!(solve_branches(&p, f64::NAN).is_err());
    }

    #[test]
    fn generic_over_f32() {
        let a: f32 = absorption(1.0f32, 1.0, 100.0).unwrap();
        assert!((a - 25.0).abs() < 1e-5);
        let p = SystemParams::<f32>::new(100.0, 2.0, 1.0, 1.0).unwrap();
        let op = OperatingPoint::new(&p, 144.0).unwrap();
        assert!(op.stable);
        assert!((op.delta_s - 2.0365).abs() < 1e-3);
    }
}
