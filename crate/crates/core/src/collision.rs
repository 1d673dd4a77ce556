//! Reduced collision operator for isotropic spectra.
//!
//! For isotropic integrands the momentum constraint `k = k₁ + k₂` in three
//! dimensions reduces through the angular substitution
//! `r₂² = r² + r₁² − 2 r r₁ cos θ` to
//!
//! ```text
//! ∬ δ(k − k₁ − k₂) W dk₁ dk₂ = (2π / r) ∬_{|r₁−r₂| ≤ r ≤ r₁+r₂} W r₁ r₂ dr₁ dr₂
//! ```
//!
//! On the grid every ordered triple `(i, j, l)` whose radii form a
//! (possibly degenerate) triangle carries the prefactor
//! `(2π / r_i) r_j r_l w_j w_l`, halved when the triangle is degenerate
//! because such triples sit on the boundary of the integration domain.
//! Multiplied by `wv_i` this becomes `8π² r_i r_j r_l w_i w_j w_l`, which is
//! symmetric in all three indices; that symmetry is what makes the
//! per-node (strong) and per-triad (weak) summations agree.
//!
//! The same row `(i, j, l)` serves both placements of node `i`: as the sum
//! wave (`k = k₁ + k₂`, mismatch `ω_i − ω_j − ω_l`) and as a summand of the
//! larger wave `j` (`k_j = k + k_l`, mismatch `ω_j − ω_i − ω_l`).

use std::f64::consts::PI;
use std::sync::Arc;

use crate::exec::Execution;
use crate::physics::{gamma_broadening, kernel_v2, lorentzian, PhysicalParams};
use crate::spectrum::{mass, RadialGrid, Spacing, Spectrum};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
struct TriadEntry {
    j: u32,
    l: u32,
    prefactor: f64,
}

/// Precomputed triangle-inequality triads of a grid, stored row-wise by the
/// first index in lexicographic `(i, j, l)` order.
#[derive(Clone, Debug)]
pub struct TriadTable {
    grid: Arc<RadialGrid>,
    row_start: Vec<usize>,
    entries: Vec<TriadEntry>,
}

/// One stored triad.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triad {
    pub i: usize,
    pub j: usize,
    pub l: usize,
    pub prefactor: f64,
}

impl TriadTable {
    pub fn build(grid: Arc<RadialGrid>) -> Self {
        Self::build_with(grid, Execution::default())
    }

    pub fn build_with(grid: Arc<RadialGrid>, exec: Execution) -> Self {
        let n = grid.len();
        let r = grid.nodes();
        let w = grid.line_weights();
        let tol = grid.radius_tolerance();
        let rows: Vec<Vec<TriadEntry>> = exec.map(n, |i| {
            let mut row = Vec::new();
            let ri = r[i];
            if ri <= 0.0 {
                return row;
            }
            for j in 0..n {
                let rj = r[j];
                if rj <= 0.0 {
                    continue;
                }
                for l in 0..n {
                    let rl = r[l];
                    if rl <= 0.0 {
                        continue;
                    }
                    let Some(degenerate) = triangle(ri, rj, rl, tol) else {
                        continue;
                    };
                    let half = if degenerate { 0.5 } else { 1.0 };
                    row.push(TriadEntry {
                        j: j as u32,
                        l: l as u32,
                        prefactor: half * 2.0 * PI / ri * rj * rl * w[j] * w[l],
                    });
                }
            }
            row
        });
        let mut row_start = Vec::with_capacity(n + 1);
        row_start.push(0);
        let mut entries = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for row in rows {
            entries.extend(row);
            row_start.push(entries.len());
        }
        TriadTable {
            grid,
            row_start,
            entries,
        }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Triads whose first index is `i`, in ascending `(j, l)` order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = Triad> + '_ {
        self.entries[self.row_start[i]..self.row_start[i + 1]]
            .iter()
            .map(move |e| Triad {
                i,
                j: e.j as usize,
                l: e.l as usize,
                prefactor: e.prefactor,
            })
    }

    pub fn iter(&self) -> impl Iterator<Item = Triad> + '_ {
        (0..self.grid.len()).flat_map(move |i| self.row(i))
    }

    pub fn contains(&self, i: usize, j: usize, l: usize) -> bool {
        self.row(i).any(|t| t.j == j && t.l == l)
    }

    /// Largest ratio of the discrete triangle measure to its exact value,
    /// `max_{a,b} Σ_c wv_c·P_{c,a,b} / (wv_a wv_b)`.
    ///
    /// Pointwise bounds on triad summands turn into bounds on moments only
    /// after summing out one index; this factor is what that sum costs on the
    /// grid (exactly 1 in the continuum, at most 1 on a uniform grid from 0).
    pub fn measure_excess(&self) -> f64 {
        let n = self.grid.len();
        let wv = self.grid.volume_weights();
        let mut acc = vec![0.0; n * n];
        for t in self.iter() {
            acc[t.j * n + t.l] += wv[t.i] * t.prefactor;
        }
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                let denom = wv[a] * wv[b];
                if denom > 0.0 && acc[a * n + b] > 0.0 {
                    worst = worst.max(acc[a * n + b] / denom);
                }
            }
        }
        worst
    }
}

/// Returns `Some(degenerate)` when the radii form a triangle.
fn triangle(a: f64, b: f64, c: f64, tol: f64) -> Option<bool> {
    if (b - c).abs() > a + tol || a > b + c + tol {
        return None;
    }
    let degenerate = (a - (b + c)).abs() <= tol || ((b - c).abs() - a).abs() <= tol;
    Some(degenerate)
}

/// Gain, attenuation and net collision rate on every node.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionResult {
    pub gain: Vec<f64>,
    pub theta: Vec<f64>,
    pub q: Vec<f64>,
}

impl CollisionResult {
    fn zeros(n: usize) -> Self {
        CollisionResult {
            gain: vec![0.0; n],
            theta: vec![0.0; n],
            q: vec![0.0; n],
        }
    }

    fn from_parts(parts: Vec<(f64, f64)>, f: &[f64]) -> Self {
        let (gain, theta): (Vec<f64>, Vec<f64>) = parts.into_iter().unzip();
        let q = gain
            .iter()
            .zip(&theta)
            .zip(f)
            .map(|((g, t), v)| g - v * t)
            .collect();
        CollisionResult { gain, theta, q }
    }

    /// `Σ_i wv_i φ_i q_i`.
    pub fn integrate(&self, grid: &RadialGrid, phi: &[f64]) -> f64 {
        grid.volume_weights()
            .iter()
            .zip(phi)
            .zip(&self.q)
            .map(|((w, p), q)| w * p * q)
            .sum()
    }

    /// `Σ_i wv_i |q_i|`.
    pub fn l1(&self, grid: &RadialGrid) -> f64 {
        grid.volume_weights()
            .iter()
            .zip(&self.q)
            .map(|(w, q)| w * q.abs())
            .sum()
    }
}

fn check_input(f: &Spectrum, table: &TriadTable, gamma_scale: f64) -> Result<()> {
    if !(Arc::ptr_eq(f.grid(), table.grid()) || **f.grid() == **table.grid()) {
        return Err(Error::GridMismatch);
    }
    if let Some((index, &value)) = f.values().iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::InvalidSpectrum { index, value });
    }
    if !(gamma_scale.is_finite() && gamma_scale > 0.0) {
        return Err(Error::param("gamma_scale", format!("must be > 0, got {gamma_scale}")));
    }
    Ok(())
}

/// Evaluates `Q = Q_gain − f ϑ` with the Lorentzian width multiplied by
/// `gamma_scale`.
pub fn evaluate(
    f: &Spectrum,
    p: &PhysicalParams,
    table: &TriadTable,
    gamma_scale: f64,
) -> Result<CollisionResult> {
    evaluate_with(f, p, table, gamma_scale, Execution::default())
}

pub fn evaluate_with(
    f: &Spectrum,
    p: &PhysicalParams,
    table: &TriadTable,
    gamma_scale: f64,
    exec: Execution,
) -> Result<CollisionResult> {
    check_input(f, table, gamma_scale)?;
    let grid = table.grid();
    let n = grid.len();
    let m0 = mass(f);
    if m0 == 0.0 {
        return Ok(CollisionResult::zeros(n));
    }
    let r = grid.nodes();
    let om = grid.omegas(p);
    let fv = f.values();
    let width = gamma_scale * m0;

    let parts = exec.map(n, |i| {
        let (ri, oi, fi) = (r[i], om[i], fv[i]);
        let mut gain = 0.0;
        let mut theta = 0.0;
        for t in table.row(i) {
            let (rj, rl) = (r[t.j], r[t.l]);
            let (fj, fl) = (fv[t.j], fv[t.l]);
            let big_gamma = gamma_broadening(ri, rj, rl, width, p);
            let as_sum = lorentzian(oi - om[t.j] - om[t.l], big_gamma);
            let as_part = lorentzian(om[t.j] - oi - om[t.l], big_gamma);
            debug_assert!(as_sum <= (1.0 + 1e-12) / big_gamma && as_part <= (1.0 + 1e-12) / big_gamma);
            let weight = t.prefactor * kernel_v2(ri, rj, rl, p);
            gain += weight * (as_sum * fj * fl + 2.0 * as_part * (fi * fj + fj * fl));
            theta += weight * (as_sum * (fj + fl) + 2.0 * as_part * fl);
        }
        (gain, theta)
    });
    Ok(CollisionResult::from_parts(parts, fv))
}

/// Attenuation coefficient `ϑ[f]` on every node.
pub fn attenuation(f: &Spectrum, p: &PhysicalParams, table: &TriadTable) -> Result<Vec<f64>> {
    Ok(evaluate(f, p, table, 1.0)?.theta)
}

/// Triad-by-triad weak form `Σ R_{ijl} (φ_i − φ_j − φ_l)` with `R` the
/// symmetric triad summand. Equals `Σ_i wv_i φ_i q_i` up to rounding.
pub fn weak_form(
    f: &Spectrum,
    phi: &[f64],
    p: &PhysicalParams,
    table: &TriadTable,
    gamma_scale: f64,
) -> Result<f64> {
    check_input(f, table, gamma_scale)?;
    let grid = table.grid();
    if phi.len() != grid.len() {
        return Err(Error::param("phi", "length differs from the grid"));
    }
    let m0 = mass(f);
    if m0 == 0.0 {
        return Ok(0.0);
    }
    let r = grid.nodes();
    let wv = grid.volume_weights();
    let om = grid.omegas(p);
    let fv = f.values();
    let width = gamma_scale * m0;
    let mut total = 0.0;
    for t in table.iter() {
        let (ri, rj, rl) = (r[t.i], r[t.j], r[t.l]);
        let big_gamma = gamma_broadening(ri, rj, rl, width, p);
        let lor = lorentzian(om[t.i] - om[t.j] - om[t.l], big_gamma);
        let rate = fv[t.j] * fv[t.l] - fv[t.i] * fv[t.j] - fv[t.i] * fv[t.l];
        let summand = wv[t.i] * t.prefactor * kernel_v2(ri, rj, rl, p) * lor * rate;
        total += summand * (phi[t.i] - phi[t.j] - phi[t.l]);
    }
    Ok(total)
}

fn exact_preconditions(grid: &RadialGrid, p: &PhysicalParams) -> Result<f64> {
    if p.lambda1 > 0.0 {
        return Err(Error::EmptyResonantManifold { lambda1: p.lambda1 });
    }
    match grid.step() {
        Some(h) if grid.spacing() == Spacing::Uniform && grid.r_min() == 0.0 => Ok(h),
        _ => Err(Error::NonUniformGrid),
    }
}

/// Weight of the colinear triad `r_s = r_a + r_b` in the exact-resonance
/// weak form: the Lorentzian collapses to `π δ(√λ₂ (r_s − r_a − r_b))`,
/// which sits on the edge of the triangle domain and so picks up `1/2`.
/// Symmetric in `(s, a, b)`.
fn exact_measure(grid: &RadialGrid, p: &PhysicalParams, h: f64, s: usize, a: usize, b: usize) -> f64 {
    let r = grid.nodes();
    let w = grid.line_weights();
    4.0 * PI.powi(3) / p.lambda2.sqrt() * r[s] * r[a] * r[b] * w[s] * w[a] * w[b] / h
}

/// Checks that exact-resonance evaluation is available for `p` on `grid`.
pub fn check_exact_mode(grid: &RadialGrid, p: &PhysicalParams) -> Result<()> {
    exact_preconditions(grid, p).map(|_| ())
}

/// Exact-resonance operator (`Γ → 0`). Only defined for `λ₁ = 0` on a
/// uniform grid starting at zero, where colinear triads land on nodes.
pub fn evaluate_exact(f: &Spectrum, p: &PhysicalParams) -> Result<CollisionResult> {
    evaluate_exact_with(f, p, Execution::default())
}

pub fn evaluate_exact_with(f: &Spectrum, p: &PhysicalParams, exec: Execution) -> Result<CollisionResult> {
    let grid = f.grid().clone();
    let h = exact_preconditions(&grid, p)?;
    if !f.is_nonnegative() {
        let (index, &value) = f.values().iter().enumerate().find(|(_, v)| **v < 0.0).unwrap();
        return Err(Error::InvalidSpectrum { index, value });
    }
    let n = grid.len();
    let r = grid.nodes();
    let wv = grid.volume_weights();
    let fv = f.values();
    let parts = exec.map(n, |i| {
        if wv[i] == 0.0 {
            return (0.0, 0.0);
        }
        let mut gain = 0.0;
        let mut theta = 0.0;
        // i as the sum wave: r_i = r_a + r_b.
        for a in 1..i {
            let b = i - a;
            let weight = exact_measure(&grid, p, h, i, a, b) * kernel_v2(r[i], r[a], r[b], p);
            gain += weight * fv[a] * fv[b];
            theta += weight * (fv[a] + fv[b]);
        }
        // i as a summand of s = i + b.
        for b in 1..n - i {
            let s = i + b;
            let weight = exact_measure(&grid, p, h, s, i, b) * kernel_v2(r[s], r[i], r[b], p);
            gain += 2.0 * weight * (fv[s] * fv[i] + fv[s] * fv[b]);
            theta += 2.0 * weight * fv[b];
        }
        (gain / wv[i], theta / wv[i])
    });
    Ok(CollisionResult::from_parts(parts, fv))
}

/// Weak form of the exact-resonance operator, summed over colinear triads.
pub fn weak_form_exact(f: &Spectrum, phi: &[f64], p: &PhysicalParams) -> Result<f64> {
    let grid = f.grid().clone();
    let h = exact_preconditions(&grid, p)?;
    if phi.len() != grid.len() {
        return Err(Error::param("phi", "length differs from the grid"));
    }
    let r = grid.nodes();
    let fv = f.values();
    let mut total = 0.0;
    for s in 1..grid.len() {
        for a in 1..s {
            let b = s - a;
            let rate = fv[a] * fv[b] - fv[s] * fv[a] - fv[s] * fv[b];
            let weight = exact_measure(&grid, p, h, s, a, b) * kernel_v2(r[s], r[a], r[b], p);
            total += weight * rate * (phi[s] - phi[a] - phi[b]);
        }
    }
    Ok(total)
}
