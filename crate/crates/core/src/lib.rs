//! Two cavity modes coupled to an ensemble of three-level Λ atoms driven
//! close to a coherent-population-trapping (dark) resonance.
//!
//! The crate is organised bottom-up:
//!
//! * [`semiclassical`] closed-form steady states, branch finding, stability
//!   thresholds, reflectivity and the single-atom Bloch fixed point.
//! * [`langevin`] linearised fluctuation dynamics (drift, diffusion, input
//!   coupling) together with spectra and equal-time covariances.
//! * [`analysis`] squeezing, polarization-basis changes, EPR entanglement and
//!   spin-squeezing measures built on top of the spectra.
//! * [`analytic_spin`] the closed-form spin-squeezing theory used as the
//!   reference curve for the numerics.
//!
//! The closed-form layers are generic over any [`num_traits::Float`]; the
//! matrix pipeline runs in `f64`. All rates are in units of the optical
//! dipole decay rate γ.

pub mod analysis;
pub mod analytic_spin;
mod error;
pub mod langevin;
pub mod optimize;
mod params;
pub mod semiclassical;

pub use error::{Error, Result};
pub use params::SystemParams;

/// Double-precision system parameters.
pub type SystemParams64 = SystemParams<f64>;
/// Single-precision system parameters.
pub type SystemParams32 = SystemParams<f32>;
/// Double-precision operating point.
pub type OperatingPoint64 = semiclassical::OperatingPoint<f64>;
/// Single-precision operating point.
pub type OperatingPoint32 = semiclassical::OperatingPoint<f32>;
/// Double-precision intensity branch.
pub type Branch64 = semiclassical::Branch<f64>;
/// Double-precision feedback constants.
pub type FeedbackConstants64 = analytic_spin::FeedbackConstants<f64>;
