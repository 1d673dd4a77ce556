//! Radial discretization of three-dimensional wavenumber space.
//!
//! Integrals `∫_{ℝ³} φ(|k|) dk` are approximated by `Σ_i wv_i φ(r_i)` with
//! `wv_i = 4π r_i² w_i` and trapezoidal line weights `w_i`. All weights are
//! nonnegative, so pointwise inequalities between integrands carry over to
//! the discrete sums unchanged. Every reduction below walks the nodes in
//! ascending order.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::physics::{omega, PhysicalParams};
use crate::{Error, Result};

pub const MIN_NODES: usize = 8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Uniform,
    Logarithmic,
}

/// Node layout plus line and volume quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    line_weights: Vec<f64>,
    volume_weights: Vec<f64>,
    spacing: Spacing,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, n: usize, spacing: Spacing) -> Result<Self> {
        if !(r_min.is_finite() && r_max.is_finite()) || r_min < 0.0 || r_min >= r_max {
            return Err(Error::InvalidGrid(format!(
                "need 0 <= r_min < r_max, got r_min = {r_min}, r_max = {r_max}"
            )));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidGrid(format!("need at least {MIN_NODES} nodes, got {n}")));
        }
        let last = (n - 1) as f64;
        let mut nodes: Vec<f64> = match spacing {
            Spacing::Uniform => {
                let h = (r_max - r_min) / last;
                (0..n).map(|i| r_min + i as f64 * h).collect()
            }
            Spacing::Logarithmic => {
                if r_min <= 0.0 {
                    return Err(Error::InvalidGrid(
                        "logarithmic spacing needs r_min > 0".to_string(),
                    ));
                }
                let ratio = (r_max / r_min).powf(1.0 / last);
                (0..n).map(|i| r_min * ratio.powi(i as i32)).collect()
            }
        };
        nodes[n - 1] = r_max;

        let mut line_weights = vec![0.0; n];
        for i in 0..n - 1 {
            let half = 0.5 * (nodes[i + 1] - nodes[i]);
            line_weights[i] += half;
            line_weights[i + 1] += half;
        }
        let volume_weights = nodes
            .iter()
            .zip(&line_weights)
            .map(|(r, w)| 4.0 * PI * r * r * w)
            .collect();
        Ok(RadialGrid {
            nodes,
            line_weights,
            volume_weights,
            spacing,
        })
    }

    /// Uniform grid on `[0, r_max]`.
    pub fn uniform(r_max: f64, n: usize) -> Result<Self> {
        Self::new(0.0, r_max, n, Spacing::Uniform)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn line_weights(&self) -> &[f64] {
        &self.line_weights
    }

    pub fn volume_weights(&self) -> &[f64] {
        &self.volume_weights
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn r_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn r_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Node spacing for uniform grids.
    pub fn step(&self) -> Option<f64> {
        match self.spacing {
            Spacing::Uniform => Some((self.r_max() - self.r_min()) / (self.len() - 1) as f64),
            Spacing::Logarithmic => None,
        }
    }

    /// Absolute tolerance used when comparing sums and differences of radii.
    pub fn radius_tolerance(&self) -> f64 {
        1e-10 * self.r_max()
    }

    /// `ω(r_i)` for every node.
    pub fn omegas(&self, p: &PhysicalParams) -> Vec<f64> {
        self.nodes.iter().map(|&r| omega(r, p)).collect()
    }
}

/// Isotropic wave-action density sampled on a [`RadialGrid`].
///
/// Values are always finite. [`Spectrum::new`] also enforces nonnegativity;
/// [`Spectrum::new_signed`] admits signed fields such as differences of two
/// spectra.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        let s = Self::new_signed(grid, values)?;
        if let Some((index, &value)) = s.values.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::InvalidSpectrum { index, value });
        }
        Ok(s)
    }

    pub fn new_signed(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "spectrum has {} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSpectrum { index, value });
        }
        Ok(Spectrum { grid, values })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        Spectrum {
            grid,
            values: vec![0.0; n],
        }
    }

    /// Samples `f(r)` at every node.
    pub fn from_fn(grid: Arc<RadialGrid>, mut f: impl FnMut(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new_signed(self.grid.clone(), self.values.iter().map(|v| c * v).collect())
    }

    /// Pointwise `self − other`; the result may be signed.
    pub fn difference(&self, other: &Spectrum) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::new_signed(self.grid.clone(), values)
    }

    /// Pointwise absolute value.
    pub fn abs(&self) -> Self {
        Spectrum {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub(crate) fn check_same_grid(&self, other: &Spectrum) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Writes the `r,f` snapshot format, preceded by `#` comment lines.
    pub fn write_csv(&self, out: &mut impl Write, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "r,f")?;
        for (r, f) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(out, "{r},{f}")?;
        }
        Ok(())
    }

    /// Reads an `r,f` file onto `grid`; the radii must match the grid nodes.
    pub fn read_csv(path: &Path, grid: Arc<RadialGrid>) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let parse_err = |line: usize, message: String| Error::Parse {
            path: path.display().to_string(),
            line,
            message,
        };
        let mut values = Vec::with_capacity(grid.len());
        let mut saw_header = false;
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line.replace(' ', "") != "r,f" {
                    return Err(parse_err(lineno + 1, format!("expected header `r,f`, got `{line}`")));
                }
                saw_header = true;
                continue;
            }
            let mut cols = line.split(',');
            let (Some(r), Some(f), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(parse_err(lineno + 1, "expected two columns".to_string()));
            };
            let r: f64 = r.trim().parse().map_err(|e| parse_err(lineno + 1, format!("{e}")))?;
            let f: f64 = f.trim().parse().map_err(|e| parse_err(lineno + 1, format!("{e}")))?;
            let idx = values.len();
            let Some(&node) = grid.nodes().get(idx) else {
                return Err(parse_err(lineno + 1, "more rows than grid nodes".to_string()));
            };
            if (node - r).abs() > grid.radius_tolerance() {
                return Err(parse_err(
                    lineno + 1,
                    format!("radius {r} does not match grid node {node}"),
                ));
            }
            values.push(f);
        }
        if values.len() != grid.len() {
            return Err(parse_err(
                0,
                format!("file has {} rows, grid has {} nodes", values.len(), grid.len()),
            ));
        }
        Spectrum::new(grid, values)
    }
}

/// A set of moments `𝔐_n[f]` for several orders.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentVector {
    pub orders: Vec<f64>,
    pub moments: Vec<f64>,
}

impl MomentVector {
    pub fn compute(f: &Spectrum, orders: &[f64], p: &PhysicalParams) -> Self {
        MomentVector {
            orders: orders.to_vec(),
            moments: orders.iter().map(|&n| moment(f, n, p)).collect(),
        }
    }
}

/// Total wave action `M₀ = Σ wv_i f_i`.
pub fn mass(f: &Spectrum) -> f64 {
    f.grid
        .volume_weights()
        .iter()
        .zip(&f.values)
        .map(|(w, v)| w * v)
        .sum()
}

/// `𝔐_n[f] = Σ wv_i ω_i^n f_i`. Order zero returns [`mass`] exactly.
pub fn moment(f: &Spectrum, n: f64, p: &PhysicalParams) -> f64 {
    if n == 0.0 {
        return mass(f);
    }
    weighted_sum(f, n, p, |v| v)
}

/// `‖f‖_{L¹_N} = Σ wv_i ω_i^N |f_i|`.
pub fn l1n_norm(f: &Spectrum, order: f64, p: &PhysicalParams) -> f64 {
    if order == 0.0 {
        return f
            .grid
            .volume_weights()
            .iter()
            .zip(&f.values)
            .map(|(w, v)| w * v.abs())
            .sum();
    }
    weighted_sum(f, order, p, f64::abs)
}

fn weighted_sum(f: &Spectrum, order: f64, p: &PhysicalParams, map: impl Fn(f64) -> f64) -> f64 {
    let g = &f.grid;
    g.nodes()
        .iter()
        .zip(g.volume_weights())
        .zip(&f.values)
        .map(|((&r, w), &v)| w * omega(r, p).powf(order) * map(v))
        .sum()
}

/// Wave action inside the ball `|k| ≤ R₀`.
pub fn restricted_mass(f: &Spectrum, r0: f64) -> f64 {
    f.grid
        .nodes()
        .iter()
        .zip(f.grid.volume_weights())
        .zip(&f.values)
        .filter(|((&r, _), _)| r <= r0)
        .map(|((_, w), v)| w * v)
        .sum()
}

/// Both sides of the moment interpolation inequality
/// `𝔐_n ≤ 𝔐_p^{(N−n)/(N−p)} 𝔐_N^{(n−p)/(N−p)}` for `p < n < N`.
///
/// Returns `(0, 0)` for a spectrum of zero mass.
pub fn interpolation_gap(
    f: &Spectrum,
    low: f64,
    mid: f64,
    high: f64,
    params: &PhysicalParams,
) -> Result<(f64, f64)> {
    if !(0.0 <= low && low < mid && mid < high) {
        return Err(Error::param(
            "orders",
            format!("need 0 <= p < n < N, got ({low}, {mid}, {high})"),
        ));
    }
    if !f.is_nonnegative() {
        return Err(Error::param("f", "interpolation needs a nonnegative spectrum"));
    }
    if mass(f) == 0.0 {
        return Ok((0.0, 0.0));
    }
    let lhs = moment(f, mid, params);
    let theta = (high - mid) / (high - low);
    let rhs = moment(f, low, params).powf(theta) * moment(f, high, params).powf(1.0 - theta);
    Ok((lhs, rhs))
}
