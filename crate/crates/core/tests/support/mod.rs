//! Independent oracles for integration tests.
//!
//! Nothing here uses the triad reduction: the collision integrals are
//! evaluated directly in three dimensions.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub fn composite_rule(a: f64, b: f64, panels: usize, order: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            out.push((lo + 0.5 * h * (xi + 1.0), 0.5 * h * wi));
        }
    }
    out
}

/// Physical constants used by the oracle, mirroring the crate's model.
#[derive(Clone, Copy, Debug)]
pub struct Model {
    pub lambda1: f64,
    pub lambda2: f64,
    pub c_v: f64,
    pub c_gamma: f64,
}

impl Model {
    fn omega(&self, r: f64) -> f64 {
        (self.lambda1 + self.lambda2 * r * r).sqrt()
    }

    fn kernel(&self, a: f64, b: f64, c: f64) -> f64 {
        self.c_v * self.c_v * a * b * c
    }

    fn lorentzian(&self, zeta: f64, a: f64, b: f64, c: f64, mass: f64) -> f64 {
        let g = self.c_gamma * (a * a + b * b + c * c) * mass;
        g / (zeta * zeta + g * g)
    }
}

/// Unreduced collision operator of an isotropic spectrum `f`, supported on
/// the ball `|k| ≤ r_max`, evaluated at `k = r ẑ`.
///
/// Direct part: `∫ |V|² L(ω − ω₁ − ω₂)(f₁f₂ − f f₁ − f f₂) dk₁` with
/// `k₂ = k − k₁`. Mirrored part: `2 ∫ |V|² L(ω₁ − ω − ω₂)(f₁f + f₁f₂ − f f₂) dk₂`
/// with `k₁ = k + k₂`. Both use spherical coordinates `(ρ, μ, φ)` with a
/// tensor-product Gauss–Legendre rule; wavevectors outside the ball carry no
/// waves and are excluded.
pub struct Oracle<'a> {
    pub model: Model,
    pub f: &'a dyn Fn(f64) -> f64,
    pub mass: f64,
    pub r_max: f64,
    radial: Vec<(f64, f64)>,
    polar: Vec<(f64, f64)>,
    azimuth: Vec<(f64, f64)>,
}

impl<'a> Oracle<'a> {
    pub fn new(model: Model, f: &'a dyn Fn(f64) -> f64, mass: f64, r_max: f64) -> Self {
        Oracle {
            model,
            f,
            mass,
            r_max,
            radial: composite_rule(0.0, r_max, 32, 8),
            polar: composite_rule(-1.0, 1.0, 8, 8),
            azimuth: composite_rule(0.0, 2.0 * PI, 1, 4),
        }
    }

    pub fn q(&self, r: f64) -> f64 {
        let m = &self.model;
        let f = |x: f64| if x <= self.r_max { (self.f)(x) } else { 0.0 };
        let fk = f(r);
        let wk = m.omega(r);
        let mut total = 0.0;
        for &(rho, wr) in &self.radial {
            let f_rho = f(rho);
            let w_rho = m.omega(rho);
            for &(mu, wm) in &self.polar {
                for &(_phi, wp) in &self.azimuth {
                    // The integrands depend on φ only through k·k₁, which is
                    // φ-independent for k on the axis; φ is kept for a true
                    // three-dimensional tensor rule.
                    let weight = rho * rho * wr * wm * wp;
                    let cross = 2.0 * r * rho * mu;
                    let r2 = (r * r + rho * rho - cross).max(0.0).sqrt();
                    if r2 <= self.r_max {
                        let lor = m.lorentzian(wk - w_rho - m.omega(r2), r, rho, r2, self.mass);
                        let f2 = f(r2);
                        total += weight
                            * m.kernel(r, rho, r2)
                            * lor
                            * (f_rho * f2 - fk * f_rho - fk * f2);
                    }
                    let r1 = (r * r + rho * rho + cross).sqrt();
                    if r1 <= self.r_max {
                        let lor = m.lorentzian(m.omega(r1) - wk - w_rho, r1, r, rho, self.mass);
                        let f1 = f(r1);
                        total += 2.0
                            * weight
                            * m.kernel(r1, r, rho)
                            * lor
                            * (f1 * fk + f1 * f_rho - fk * f_rho);
                    }
                }
            }
        }
        total
    }
}

/// `∫_{|k| ≤ r_max} f dk` by composite Gauss–Legendre.
pub fn ball_mass(f: &dyn Fn(f64) -> f64, r_max: f64) -> f64 {
    composite_rule(0.0, r_max, 64, 8)
        .iter()
        .map(|&(r, w)| 4.0 * PI * r * r * f(r) * w)
        .sum()
}
