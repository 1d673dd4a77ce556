//! Near-resonance three-wave kinetic equation for oceanic internal waves.
//!
//! The crate evolves an isotropic wave-action spectrum `f(t, |k|)` under
//!
//! ```text
//! ∂t f = Q_gain[f] − f·ϑ[f] − 2ν|k|² f
//! ```
//!
//! where the collision operator uses a Lorentzian-broadened frequency
//! resonance whose width scales with the total wave action. Alongside the
//! solver it ships a verifier that checks the a priori estimates satisfied by
//! the equation (positivity, attenuation bound, lower envelope, moment growth,
//! Hölder continuity, invariant-set membership) on arbitrary spectra and on
//! completed runs.
//!
//! Module map:
//!
//! * [`physics`]: dispersion, damping, kernel, broadening, Lorentzian.
//! * [`spectrum`]: radial grids, spectra, moments and weighted norms.
//! * [`collision`]: triad tables and the reduced collision operator.
//! * [`evolution`]: explicit Euler stepper, envelopes and the moment ledger.
//! * [`verify`]: derived constants and the property suite.
//! * [`cli`]: configuration, presets, file formats and subcommands.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod collision;
mod error;
pub mod evolution;
pub mod exec;
pub mod physics;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use physics::PhysicalParams;
pub use spectrum::{RadialGrid, Spacing, Spectrum};
