//! JSON configuration file.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::collision;
use crate::evolution::{Mode, RunConfig, StepRule};
use crate::physics::PhysicalParams;
use crate::spectrum::{RadialGrid, Spacing};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub physical: PhysicalParams,
    pub grid: GridSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub run: RunSpec,
    #[serde(default)]
    pub envelope: EnvelopeSpec,
    #[serde(default)]
    pub verify: VerifySpec,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        RadialGrid::new(self.r_min, self.r_max, self.n, self.spacing)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `A exp(−(r − r₀)²/σ²)`.
    GaussianBump { amplitude: f64, center: f64, width: f64 },
    /// `A r^{−p}` on `[r_a, r_b]`, zero elsewhere.
    PowerLaw {
        amplitude: f64,
        exponent: f64,
        r_a: f64,
        r_b: f64,
    },
    /// An `r,f` CSV whose radii match the grid.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cfl_safety: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default = "default_order")]
    pub moment_order: f64,
}

fn default_t_final() -> f64 {
    1.0
}

fn default_record_every() -> usize {
    1
}

fn default_order() -> f64 {
    1.0
}

pub const DEFAULT_CFL: f64 = 0.9;

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            t_final: default_t_final(),
            cfl_safety: None,
            dt: None,
            mode: Mode::default(),
            record_every: default_record_every(),
            moment_order: default_order(),
        }
    }
}

impl RunSpec {
    pub fn to_run_config(&self) -> RunConfig {
        let step = match (self.dt, self.cfl_safety) {
            (Some(dt), _) => StepRule::Fixed(dt),
            (None, s) => StepRule::Cfl(s.unwrap_or(DEFAULT_CFL)),
        };
        RunConfig {
            t_final: self.t_final,
            step,
            record_every: self.record_every,
            moment_order: self.moment_order,
        }
    }
}

/// `R₀`: either chosen from the initial mass distribution or fixed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum RadiusChoice {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for RadiusChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RadiusChoice::Auto => s.serialize_str("auto"),
            RadiusChoice::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for RadiusChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = RadiusChoice;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("\"auto\" or a positive number")
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<RadiusChoice, E> {
                if v == "auto" {
                    Ok(RadiusChoice::Auto)
                } else {
                    Err(E::invalid_value(serde::de::Unexpected::Str(v), &self))
                }
            }
            fn visit_f64<E: serde::de::Error>(self, v: f64) -> std::result::Result<RadiusChoice, E> {
                Ok(RadiusChoice::Fixed(v))
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<RadiusChoice, E> {
                Ok(RadiusChoice::Fixed(v as f64))
            }
            fn visit_i64<E: serde::de::Error>(self, v: i64) -> std::result::Result<RadiusChoice, E> {
                Ok(RadiusChoice::Fixed(v as f64))
            }
        }
        d.deserialize_any(Visitor)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    #[serde(default)]
    pub r0: RadiusChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_upper: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    #[default]
    All,
    Attenuation,
    GainMoment,
    Holder,
    Ledger,
    GammaLimit,
    Stability,
    Energy,
}

impl std::str::FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| format!("unknown suite `{s}`"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default)]
    pub suite: Suite,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mass_floor")]
    pub mass_floor: f64,
    #[serde(default = "default_ceiling")]
    pub ceiling: f64,
    #[serde(default = "default_gamma_scales")]
    pub gamma_scales: Vec<f64>,
}

fn default_samples() -> usize {
    50
}

fn default_pairs() -> usize {
    100
}

fn default_mass_floor() -> f64 {
    0.1
}

fn default_ceiling() -> f64 {
    1e5
}

fn default_gamma_scales() -> Vec<f64> {
    vec![1e-1, 1e-2, 1e-3]
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            suite: Suite::default(),
            samples: default_samples(),
            pairs: default_pairs(),
            seed: 0,
            mass_floor: default_mass_floor(),
            ceiling: default_ceiling(),
            gamma_scales: default_gamma_scales(),
        }
    }
}

fn config_err(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn prefixed(section: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { field, reason } => config_err(&format!("{section}.{field}"), reason),
        Error::InvalidGrid(m) => config_err(section, m),
        other => config_err(section, other.to_string()),
    }
}

impl ConfigFile {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: ConfigFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(if path.is_empty() { "." } else { &path }, e.into_inner().to_string())
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json(&text, &base)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact canonical serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.physical.validate().map_err(|e| prefixed("physical", e))?;
        let grid = self.grid.build().map_err(|e| prefixed("grid", e))?;
        self.validate_initial()?;
        let run = &self.run;
        if run.dt.is_some() && run.cfl_safety.is_some() {
            return Err(config_err("run", "give either `dt` or `cfl_safety`, not both"));
        }
        run.to_run_config().validate().map_err(|e| prefixed("run", e))?;
        if run.mode == Mode::ExactResonance {
            collision::check_exact_mode(&grid, &self.physical).map_err(|e| config_err("run.mode", e.to_string()))?;
        }
        for (name, v) in [("r_lower", self.envelope.r_lower), ("r_upper", self.envelope.r_upper)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(config_err(&format!("envelope.{name}"), format!("must be > 0, got {v}")));
                }
            }
        }
        if let RadiusChoice::Fixed(r0) = self.envelope.r0 {
            if !(r0.is_finite() && r0 > 0.0) {
                return Err(config_err("envelope.r0", format!("must be \"auto\" or > 0, got {r0}")));
            }
        }
        let v = &self.verify;
        if v.samples == 0 {
            return Err(config_err("verify.samples", "must be at least 1"));
        }
        if v.pairs == 0 {
            return Err(config_err("verify.pairs", "must be at least 1"));
        }
        if !(v.mass_floor > 0.0 && v.mass_floor.is_finite()) {
            return Err(config_err("verify.mass_floor", "must be > 0"));
        }
        if !(v.ceiling > v.mass_floor && v.ceiling.is_finite()) {
            return Err(config_err("verify.ceiling", "must be finite and exceed mass_floor"));
        }
        if v.gamma_scales.len() < 2
            || v.gamma_scales.iter().any(|s| !(*s > 0.0))
            || v.gamma_scales.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(config_err("verify.gamma_scales", "need at least two positive, decreasing values"));
        }
        Ok(())
    }

    fn validate_initial(&self) -> Result<()> {
        let finite = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(config_err(&format!("initial.{name}"), "must be finite"))
            }
        };
        match &self.initial {
            InitialSpec::GaussianBump { amplitude, center, width } => {
                finite("amplitude", *amplitude)?;
                finite("center", *center)?;
                if *amplitude < 0.0 {
                    return Err(config_err("initial.amplitude", "must be >= 0"));
                }
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(config_err("initial.width", "must be > 0"));
                }
            }
            InitialSpec::PowerLaw {
                amplitude,
                exponent,
                r_a,
                r_b,
            } => {
                for (n, v) in [("amplitude", amplitude), ("exponent", exponent), ("r_a", r_a), ("r_b", r_b)] {
                    finite(n, *v)?;
                }
                if *amplitude < 0.0 {
                    return Err(config_err("initial.amplitude", "must be >= 0"));
                }
                if !(*r_a >= 0.0 && r_a < r_b) {
                    return Err(config_err("initial.r_b", "need 0 <= r_a < r_b"));
                }
                if *r_a == 0.0 && *exponent >= 3.0 {
                    return Err(config_err(
                        "initial.exponent",
                        format!("r^-{exponent} is not integrable at the origin in 3-D (mass diverges); need exponent < 3"),
                    ));
                }
            }
            InitialSpec::File { path } => {
                let full = self.resolve(path);
                if !full.is_file() {
                    return Err(config_err("initial.path", format!("{} does not exist", full.display())));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "physical": {"lambda1": 1, "lambda2": 1, "nu": 0.01},
        "grid": {"r_max": 8, "n": 64},
        "initial": {"preset": "gaussian_bump", "amplitude": 1, "center": 2, "width": 0.5}
    }"#;

    fn parse(text: &str) -> Result<ConfigFile> {
        ConfigFile::from_json(text, Path::new("."))
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        assert_eq!(cfg.physical.c_v, 1.0);
        assert_eq!(cfg.physical.c_gamma, 1.0);
        assert_eq!(cfg.grid.spacing, Spacing::Uniform);
        assert_eq!(cfg.grid.r_min, 0.0);
        assert_eq!(cfg.envelope.r0, RadiusChoice::Auto);
        assert_eq!(cfg.run.to_run_config().step, StepRule::Cfl(DEFAULT_CFL));
        assert_eq!(cfg.verify.suite, Suite::All);
    }

    #[test]
    fn round_trip_is_lossless() {
        let mut cfg = parse(MINIMAL).unwrap();
        cfg.envelope.r0 = RadiusChoice::Fixed(0.1 + 0.2);
        cfg.physical.nu = 1.0 / 3.0;
        let again = parse(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn negative_viscosity_names_field() {
        let text = MINIMAL.replace("\"nu\": 0.01", "\"nu\": -0.5");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("physical.nu"), "{err}");
    }

    #[test]
    fn schema_errors_carry_path() {
        let text = MINIMAL.replace("\"n\": 64", "\"n\": \"many\"");
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("grid.n"), "{err}");
        let text = MINIMAL.replace("\"r_max\": 8", "\"r_max\": 8, \"bogus\": 1");
        assert!(parse(&text).unwrap_err().to_string().contains("grid"));
    }

    #[test]
    fn exact_mode_with_inertial_frequency_rejected() {
        let text = MINIMAL.replace(
            "\"initial\"",
            "\"run\": {\"mode\": \"exact_resonance\"}, \"initial\"",
        );
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("empty resonant manifold"), "{err}");
    }

    #[test]
    fn divergent_power_law_rejected() {
        let text = MINIMAL.replace(
            r#"{"preset": "gaussian_bump", "amplitude": 1, "center": 2, "width": 0.5}"#,
            r#"{"preset": "power_law", "amplitude": 1, "exponent": 5, "r_a": 0, "r_b": 4}"#,
        );
        let err = parse(&text).unwrap_err();
        assert!(err.to_string().contains("initial.exponent"), "{err}");
    }

    #[test]
    fn missing_initial_file_rejected() {
        let text = MINIMAL.replace(
            r#"{"preset": "gaussian_bump", "amplitude": 1, "center": 2, "width": 0.5}"#,
            r#"{"preset": "file", "path": "no/such/file.csv"}"#,
        );
        assert!(parse(&text).unwrap_err().to_string().contains("initial.path"));
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("gain_moment".parse::<Suite>().unwrap(), Suite::GainMoment);
        assert!("nope".parse::<Suite>().is_err());
    }
}
