//! Turning a validated config into solver objects.

use std::sync::Arc;

use crate::collision::TriadTable;
use crate::evolution::{
    invariant_set_check, EnvelopeOverrides, InvariantEnvelope, Mode, RunConfig, Solver,
};
use crate::physics::PhysicalParams;
use crate::spectrum::{RadialGrid, Spectrum};
use crate::{Error, Result};

use super::config::{ConfigFile, InitialSpec, RadiusChoice};

/// Samples a named initial condition on `grid`.
pub fn preset_spectrum(spec: &InitialSpec, grid: Arc<RadialGrid>) -> Result<Spectrum> {
    match *spec {
        InitialSpec::GaussianBump { amplitude, center, width } => {
            if amplitude < 0.0 {
                return Err(Error::param("amplitude", "must be >= 0"));
            }
            if !(width > 0.0) {
                return Err(Error::param("width", "must be > 0"));
            }
            Spectrum::from_fn(grid, |r| amplitude * (-((r - center) / width).powi(2)).exp())
        }
        InitialSpec::PowerLaw {
            amplitude,
            exponent,
            r_a,
            r_b,
        } => {
            if r_a == 0.0 && exponent >= 3.0 {
                return Err(Error::param("exponent", "mass diverges for exponent >= 3 at the origin"));
            }
            if !(amplitude >= 0.0 && r_a >= 0.0 && r_a < r_b) {
                return Err(Error::param("r_a", "need amplitude >= 0 and 0 <= r_a < r_b"));
            }
            Spectrum::from_fn(grid, |r| {
                if r < r_a || r > r_b {
                    0.0
                } else if r == 0.0 {
                    if exponent > 0.0 {
                        0.0
                    } else {
                        amplitude
                    }
                } else {
                    amplitude * r.powf(-exponent)
                }
            })
        }
        InitialSpec::File { .. } => Err(Error::param("preset", "file input is not a preset")),
    }
}

/// Everything derived from one config.
pub struct Setup {
    pub config: ConfigFile,
    pub hash: String,
    pub grid: Arc<RadialGrid>,
    pub params: PhysicalParams,
    pub table: Arc<TriadTable>,
    pub solver: Solver,
    pub run: RunConfig,
    pub f0: Spectrum,
    pub envelope: InvariantEnvelope,
}

fn config_err(path: &str, e: Error) -> Error {
    Error::Config {
        path: path.into(),
        message: e.to_string(),
    }
}

impl Setup {
    pub fn new(config: ConfigFile) -> Result<Self> {
        let grid = Arc::new(config.grid.build().map_err(|e| config_err("grid", e))?);
        let params = config.physical;
        let f0 = match &config.initial {
            InitialSpec::File { path } => Spectrum::read_csv(&config.resolve(path), grid.clone())?,
            spec => preset_spectrum(spec, grid.clone()).map_err(|e| config_err("initial", e))?,
        };
        let table = Arc::new(TriadTable::build(grid.clone()));
        let solver = match config.run.mode {
            Mode::NearResonance => Solver::with_table(table.clone(), params)?,
            Mode::ExactResonance => Solver::new(grid.clone(), params, Mode::ExactResonance)?,
        };
        let run = config.run.to_run_config();
        let envelope = Self::envelope_for(&config, &f0, &table, run.t_final)?;
        let flags = invariant_set_check(&f0, 0.0, &envelope, &params);
        if !flags.all() {
            return Err(Error::Inadmissible(format!("{} fails at t = 0", flags.describe_failures())));
        }
        Ok(Setup {
            hash: config.hash(),
            config,
            grid,
            params,
            table,
            solver,
            run,
            f0,
            envelope,
        })
    }

    /// Envelope for `f0` under this config's overrides.
    pub fn envelope_for(config: &ConfigFile, f0: &Spectrum, table: &TriadTable, horizon: f64) -> Result<InvariantEnvelope> {
        let overrides = EnvelopeOverrides {
            r0: match config.envelope.r0 {
                RadiusChoice::Auto => None,
                RadiusChoice::Fixed(v) => Some(v),
            },
            r_lower: config.envelope.r_lower,
            r_upper: config.envelope.r_upper,
        };
        let excess = table.measure_excess().max(1.0);
        InvariantEnvelope::derive(f0, &config.physical, config.run.moment_order, horizon, excess, overrides)
    }

    pub fn header(&self, seed: u64) -> String {
        format!("config_sha256={} seed={seed}", self.hash)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_peak_value() {
        let g = Arc::new(RadialGrid::uniform(8.0, 33).unwrap());
        let f = preset_spectrum(
            &InitialSpec::GaussianBump {
                amplitude: 1.0,
                center: 2.0,
                width: 0.5,
            },
            g.clone(),
        )
        .unwrap();
        assert_eq!(f.values()[8], 1.0);
    }

    #[test]
    fn power_law_rules() {
        let g = Arc::new(RadialGrid::uniform(8.0, 33).unwrap());
        let divergent = InitialSpec::PowerLaw {
            amplitude: 1.0,
            exponent: 5.0,
            r_a: 0.0,
            r_b: 4.0,
        };
        assert!(preset_spectrum(&divergent, g.clone()).is_err());
        let ok = InitialSpec::PowerLaw {
            amplitude: 2.0,
            exponent: 1.0,
            r_a: 0.0,
            r_b: 4.0,
        };
        let f = preset_spectrum(&ok, g).unwrap();
        assert_eq!(f.values()[0], 0.0);
        assert_eq!(f.values()[4], 2.0);
        assert_eq!(f.values()[20], 0.0);
    }
}
