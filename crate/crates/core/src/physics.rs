//! Scalar primitives of the model.
//!
//! All wavenumbers are magnitudes `r = |k|` in three dimensions. The
//! dispersion law is `ω(r) = sqrt(λ₁ + λ₂ r²)`, the interaction kernel is
//! `|V|² = ℭ² r r₁ r₂` and the resonance width of a triad is
//! `Γ = 𝔠 (r² + r₁² + r₂²) M₀` with `M₀` the total wave action.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Dispersion, damping and kernel constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Squared inertial frequency (≥ 0).
    pub lambda1: f64,
    /// Slope of the squared dispersion law (> 0).
    pub lambda2: f64,
    /// Viscosity (≥ 0).
    pub nu: f64,
    /// Kernel constant ℭ (> 0).
    #[serde(default = "one")]
    pub c_v: f64,
    /// Broadening constant 𝔠 (> 0).
    #[serde(default = "one")]
    pub c_gamma: f64,
}

fn one() -> f64 {
    1.0
}

impl PhysicalParams {
    /// Builds a parameter set with ℭ = 𝔠 = 1.
    pub fn new(lambda1: f64, lambda2: f64, nu: f64) -> Result<Self> {
        let p = PhysicalParams {
            lambda1,
            lambda2,
            nu,
            c_v: 1.0,
            c_gamma: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_constants(mut self, c_v: f64, c_gamma: f64) -> Result<Self> {
        self.c_v = c_v;
        self.c_gamma = c_gamma;
        self.validate()?;
        Ok(self)
    }

    /// Checks the sign constraints; the error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let finite_ge = |v: f64, name: &str| -> Result<()> {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
            Ok(())
        };
        let finite_gt = |v: f64, name: &str| -> Result<()> {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
            Ok(())
        };
        finite_ge(self.lambda1, "lambda1")?;
        finite_gt(self.lambda2, "lambda2")?;
        finite_ge(self.nu, "nu")?;
        finite_gt(self.c_v, "c_v")?;
        finite_gt(self.c_gamma, "c_gamma")?;
        Ok(())
    }
}

/// Dispersion relation `ω(r) = sqrt(λ₁ + λ₂ r²)`.
#[inline]
pub fn omega(r: f64, p: &PhysicalParams) -> f64 {
    (p.lambda1 + p.lambda2 * r * r).sqrt()
}

/// Viscous damping rate `μ = 2ν r²`.
#[inline]
pub fn damping_rate(r: f64, p: &PhysicalParams) -> f64 {
    2.0 * p.nu * r * r
}

/// Squared interaction coefficient `ℭ² r r₁ r₂`.
#[inline]
pub fn kernel_v2(r: f64, r1: f64, r2: f64, p: &PhysicalParams) -> f64 {
    p.c_v * p.c_v * r * r1 * r2
}

/// Single-wave broadening `γ = 𝔠 r² M₀`.
#[inline]
pub fn gamma_k(r: f64, mass: f64, p: &PhysicalParams) -> f64 {
    p.c_gamma * r * r * mass
}

/// Triad broadening `Γ = γ(r) + γ(r₁) + γ(r₂)`.
#[inline]
pub fn gamma_broadening(r: f64, r1: f64, r2: f64, mass: f64, p: &PhysicalParams) -> f64 {
    // Summing in sorted order keeps the result bit-symmetric in its arguments.
    let mut sq = [r * r, r1 * r1, r2 * r2];
    sq.sort_by(f64::total_cmp);
    p.c_gamma * (sq[0] + sq[1] + sq[2]) * mass
}

/// Lorentzian `Γ / (ζ² + Γ²)`, defined as zero for a vanishing width.
#[inline]
pub fn lorentzian(zeta: f64, gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    gamma / (zeta * zeta + gamma * gamma)
}
