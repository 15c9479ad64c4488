use num_traits::Float;

use crate::error::{ensure_finite, Error, Result};

/// Physical constants of the model, normalised to the optical dipole decay
/// rate γ.
///
/// Mode 1 sees cavity detuning `+κφ` and atomic detuning `Δ₁ = −δ`; mode 2
/// sees `−κφ` and `Δ₂ = +δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams<T> {
    /// Cooperativity `C = g²N/(2κγ)`. Zero describes an empty cavity.
    pub cooperativity: T,
    /// Optical dipole decay rate. Everything else is expressed in this unit.
    pub gamma: T,
    /// Cavity amplitude decay rate (half-width), in units of γ.
    pub kappa: T,
    /// Normalised cavity detuning φ.
    pub phi: T,
    /// Two-photon half-detuning δ/γ.
    pub delta_bar: T,
    /// Ground-state coherence decay rate, in units of γ.
    pub gamma0: T,
    /// Atom number, used only to denormalise spin variances.
    pub atom_number: Option<T>,
}

impl<T: Float> SystemParams<T> {
    pub fn new(cooperativity: T, kappa: T, phi: T, delta_bar: T) -> Result<Self> {
        Self {
            cooperativity,
            gamma: T::one(),
            kappa,
            phi,
            delta_bar,
            gamma0: T::zero(),
            atom_number: None,
        }
        .validated()
    }

    pub fn with_gamma0(mut self, gamma0: T) -> Result<Self> {
        self.gamma0 = gamma0;
        self.validated()
    }

    pub fn with_atom_number(mut self, n: T) -> Result<Self> {
        self.atom_number = Some(n);
        self.validated()
    }

    pub fn with_delta_bar(mut self, delta_bar: T) -> Result<Self> {
        self.delta_bar = delta_bar;
        self.validated()
    }

    pub fn with_phi(mut self, phi: T) -> Result<Self> {
        self.phi = phi;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        ensure_finite("cooperativity", self.cooperativity)?;
        ensure_finite("gamma", self.gamma)?;
        ensure_finite("kappa", self.kappa)?;
        ensure_finite("phi", self.phi)?;
        ensure_finite("delta_bar", self.delta_bar)?;
        ensure_finite("gamma0", self.gamma0)?;
        let invalid = |name, reason: &str| Error::InvalidParameter {
            name,
            reason: reason.to_string(),
        };
        if self.cooperativity < T::zero() {
            return Err(invalid("cooperativity", "must be >= 0"));
        }
        if self.gamma <= T::zero() {
            return Err(invalid("gamma", "must be > 0"));
        }
        if self.kappa <= T::zero() {
            return Err(invalid("kappa", "must be > 0"));
        }
        if self.gamma0 < T::zero() {
            return Err(invalid("gamma0", "must be >= 0"));
        }
        if let Some(n) = self.atom_number {
            ensure_finite("atom_number", n)?;
            if n <= T::zero() {
                return Err(invalid("atom_number", "must be > 0"));
            }
        }
        Ok(self)
    }
}

impl Default for SystemParams<f64> {
    fn default() -> Self {
        Self {
            cooperativity: 100.0,
            gamma: 1.0,
            kappa: 2.0,
            phi: 1.0,
            delta_bar: 1.0,
            gamma0: 0.0,
            atom_number: None,
        }
    }
}
