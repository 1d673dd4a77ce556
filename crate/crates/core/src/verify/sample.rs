//! Seeded random spectra in `V_M`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::Execution;
use crate::physics::PhysicalParams;
use crate::spectrum::{l1n_norm, mass, RadialGrid, Spectrum};
use crate::{Error, Result};

const MAX_ATTEMPTS: usize = 10_000;

/// Generator for random admissible spectra: mixtures of Gaussian bumps and
/// truncated power laws with `mass ≥ mass_floor` and
/// `‖·‖_{L¹_{N+2}} ≤ ceiling`, enforced by rejection.
#[derive(Clone, Debug)]
pub struct SampleFamily {
    pub grid: Arc<RadialGrid>,
    pub count: usize,
    pub seed: u64,
    pub amplitude: (f64, f64),
    pub center: (f64, f64),
    pub width: (f64, f64),
    pub power_law_fraction: f64,
    pub mass_floor: f64,
    pub ceiling: f64,
    pub order: f64,
}

impl SampleFamily {
    pub fn new(grid: Arc<RadialGrid>, count: usize, seed: u64) -> Self {
        SampleFamily {
            grid,
            count,
            seed,
            amplitude: (0.1, 1.0),
            center: (0.5, 4.0),
            width: (0.2, 1.0),
            power_law_fraction: 0.25,
            mass_floor: 0.1,
            ceiling: 1e5,
            order: 1.0,
        }
    }

    pub fn with_bounds(mut self, mass_floor: f64, ceiling: f64, order: f64) -> Self {
        self.mass_floor = mass_floor;
        self.ceiling = ceiling;
        self.order = order;
        self
    }

    /// Sample `k`, drawn from its own stream of the family seed.
    pub fn sample(&self, k: usize, p: &PhysicalParams) -> Result<Spectrum> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(k as u64);
        for _ in 0..MAX_ATTEMPTS {
            let f = self.draw(&mut rng)?;
            if mass(&f) >= self.mass_floor && l1n_norm(&f, self.order + 2.0, p) <= self.ceiling {
                return Ok(f);
            }
        }
        Err(Error::Verify(format!(
            "could not draw sample {k} with mass >= {} and L1_(N+2) <= {}",
            self.mass_floor, self.ceiling
        )))
    }

    pub fn generate(&self, p: &PhysicalParams) -> Result<Vec<Spectrum>> {
        Execution::default()
            .map(self.count, |k| self.sample(k, p))
            .into_iter()
            .collect()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Spectrum> {
        let amp = rng.random_range(self.amplitude.0..=self.amplitude.1);
        if rng.random::<f64>() < self.power_law_fraction {
            let exponent = rng.random_range(0.0..2.0);
            let lo = rng.random_range(0.3..1.0);
            let hi = rng.random_range(2.0..self.center.1.max(2.5));
            return Spectrum::from_fn(self.grid.clone(), |r| {
                if (lo..=hi).contains(&r) {
                    amp * r.powf(-exponent)
                } else {
                    0.0
                }
            });
        }
        let bumps = rng.random_range(1..=2);
        let params: Vec<(f64, f64, f64)> = (0..bumps)
            .map(|b| {
                let a = if b == 0 { amp } else { rng.random_range(self.amplitude.0..=self.amplitude.1) };
                let c = rng.random_range(self.center.0..=self.center.1);
                let s = rng.random_range(self.width.0..=self.width.1);
                (a, c, s)
            })
            .collect();
        Spectrum::from_fn(self.grid.clone(), |r| {
            params.iter().map(|(a, c, s)| a * (-((r - c) / s).powi(2)).exp()).sum()
        })
    }
}
