//! Explicit constants for the a priori estimates.
//!
//! Each factor of the inequality chains is a named function so that a failed
//! check can be traced to the step that produced the bound.

use serde::Serialize;

use crate::collision::TriadTable;
use crate::physics::{omega, PhysicalParams};
use crate::spectrum::{l1n_norm, mass, RadialGrid, Spectrum};

/// Splitting factor for `ω_k^N` across the two other members of a triad.
///
/// Subadditivity gives `ω_k ≤ ω₁ + ω₂`, hence
/// `ω_k^N ≤ max(1, 2^{N−1})(ω₁^N + ω₂^N)`; the extra `2^N` covers the
/// mirrored placement where `k` is a summand. Equals `2^{2N−1}` for `N ≥ 1`.
pub fn omega_split(order: f64) -> f64 {
    2f64.powf(order) * 2f64.powf(order - 1.0).max(1.0)
}

/// `ℭ² / (s 𝔠)`: the ratio between `|V|²` and the Lorentzian width scale.
pub fn coupling_ratio(p: &PhysicalParams, gamma_scale: f64) -> f64 {
    p.c_v * p.c_v / (gamma_scale * p.c_gamma)
}

/// Bound on the kernel fraction: `(r₁ + r₂)/2 ≤ (ω₁ + ω₂) · kernel_fraction / 2`.
pub fn kernel_fraction(p: &PhysicalParams) -> f64 {
    1.0 / p.lambda2.sqrt()
}

/// `C` in `Σ wv ω^N Q_gain[f] ≤ C 𝔐_{N+1}[f]`.
///
/// Direct placement contributes `2·split`, the two mirrored placements
/// `4(1 + split)`, each times the kernel fraction.
pub fn gain_moment_constant(order: f64, p: &PhysicalParams, gamma_scale: f64, measure_excess: f64) -> f64 {
    let split = omega_split(order);
    coupling_ratio(p, gamma_scale)
        * measure_excess
        * kernel_fraction(p)
        * (2.0 * split + 4.0 * (1.0 + split))
}

/// Rate `A` with `𝔐_N(t) ≤ 𝔐_N(0) e^{A t}`.
///
/// Uses `r² = (ω² − λ₁)/λ₂` in the damping term, so the moment derivative is
/// bounded node by node by `ω^N f (C ω − (2ν/λ₂) ω² + 2νλ₁/λ₂)`.
pub fn moment_growth_rate(
    order: f64,
    p: &PhysicalParams,
    grid: &RadialGrid,
    gamma_scale: f64,
    measure_excess: f64,
) -> f64 {
    let c = gain_moment_constant(order, p, gamma_scale, measure_excess);
    let damp = 2.0 * p.nu / p.lambda2;
    grid.nodes()
        .iter()
        .map(|&r| {
            let w = omega(r, p);
            c * w - damp * w * w + damp * p.lambda1
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest frequency on a node with positive radius.
pub fn omega_floor(grid: &RadialGrid, p: &PhysicalParams) -> f64 {
    grid.nodes()
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| omega(r, p))
        .fold(f64::INFINITY, f64::min)
}

struct LipschitzFactors {
    prefactor: f64,
    phi: f64,
    floor: f64,
}

fn lipschitz_factors(order: f64, p: &PhysicalParams, grid: &RadialGrid, measure_excess: f64) -> LipschitzFactors {
    let kappa = coupling_ratio(p, 1.0) / 2.0;
    let rho = 2.0 * (1.0 + omega_split(order)) * kernel_fraction(p);
    let floor = omega_floor(grid, p);
    LipschitzFactors {
        prefactor: kappa * std::f64::consts::E * rho * measure_excess,
        phi: 1.0 + floor.powf(-(order + 1.0)),
        floor,
    }
}

/// Lipschitz constant on `V_M = {mass ≥ M′, ‖·‖_{L¹_{N+2}} ≤ M}` for
/// `‖Q[g] − Q[h]‖_{L¹_N} ≤ C ‖g − h‖_{L¹_{N+1}}`.
pub fn lipschitz_constant(
    order: f64,
    p: &PhysicalParams,
    grid: &RadialGrid,
    measure_excess: f64,
    ceiling: f64,
    mass_floor: f64,
) -> f64 {
    let k = lipschitz_factors(order, p, grid, measure_excess);
    k.prefactor / mass_floor
        * (6.0 * k.phi * ceiling / k.floor + 6.0 * ceiling * k.floor.powf(-(order + 2.0)))
}

/// The same bound specialised to one pair, before the `V_M` ceilings are
/// substituted.
pub fn lipschitz_pair_bound(
    order: f64,
    p: &PhysicalParams,
    measure_excess: f64,
    g: &Spectrum,
    h: &Spectrum,
) -> f64 {
    let k = lipschitz_factors(order, p, g.grid(), measure_excess);
    let ng = l1n_norm(g, order + 1.0, p);
    let nh = l1n_norm(h, order + 1.0, p);
    k.prefactor / mass(g).min(mass(h))
        * (3.0 * k.phi * (ng + nh) + 6.0 * ng.max(nh) * k.floor.powf(-(order + 1.0)))
}

/// Hölder-½ constant from the interpolation
/// `‖d‖_{L¹_{N+1}} ≤ ‖d‖_{L¹_N}^{1/2} ‖d‖_{L¹_{N+2}}^{1/2}` with
/// `‖g − h‖_{L¹_{N+2}} ≤ 2M`.
pub fn holder_constant(lipschitz: f64, ceiling: f64) -> f64 {
    lipschitz * (2.0 * ceiling).sqrt()
}

/// All derived constants for one configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub order: f64,
    pub omega_split: f64,
    pub measure_excess: f64,
    pub omega_floor: f64,
    pub gain_moment: f64,
    pub growth_rate: f64,
    pub lipschitz: f64,
    pub holder: f64,
}

impl DerivedConstants {
    pub fn compute(table: &TriadTable, p: &PhysicalParams, order: f64, ceiling: f64, mass_floor: f64) -> Self {
        let grid = table.grid();
        let excess = table.measure_excess().max(1.0);
        let lipschitz = lipschitz_constant(order, p, grid, excess, ceiling, mass_floor);
        DerivedConstants {
            order,
            omega_split: omega_split(order),
            measure_excess: excess,
            omega_floor: omega_floor(grid, p),
            gain_moment: gain_moment_constant(order, p, 1.0, excess),
            growth_rate: moment_growth_rate(order, p, grid, 1.0, excess),
            lipschitz,
            holder: holder_constant(lipschitz, ceiling),
        }
    }
}
