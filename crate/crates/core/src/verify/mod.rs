//! Property suite for the a priori estimates.
//!
//! Every check returns a [`CheckRecord`] with the worst observed ratio, the
//! bound it was compared against and where that bound comes from: either
//! forced analytically ([`Provenance::Trivial`]) or computed from an explicit
//! inequality chain in [`constants`] ([`Provenance::Derived`]).

mod checks;
pub mod constants;
mod sample;

use serde::Serialize;
use serde_json::{Map, Value};

pub use checks::{
    check_attenuation, check_energy, check_gain_moment, check_gamma_limit, check_holder, check_ledger,
    check_stability, HolderOutcome,
};
pub use constants::DerivedConstants;
pub use sample::SampleFamily;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Trivial,
    Derived,
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The inequality being tested, in words.
    pub estimate: String,
    pub samples: usize,
    pub worst_ratio: f64,
    pub bound: f64,
    pub provenance: Provenance,
    /// Relative slack allowed on `bound`.
    pub tolerance: f64,
    pub passed: bool,
    pub skipped: bool,
    pub seed: Option<u64>,
    pub config_hash: Option<String>,
    pub details: Map<String, Value>,
}

impl CheckRecord {
    pub fn new(name: &str, estimate: &str, provenance: Provenance) -> Self {
        CheckRecord {
            name: name.into(),
            estimate: estimate.into(),
            samples: 0,
            worst_ratio: 0.0,
            bound: 1.0,
            provenance,
            tolerance: 0.0,
            passed: true,
            skipped: false,
            seed: None,
            config_hash: None,
            details: Map::new(),
        }
    }

    /// Sets `passed` from `worst_ratio ≤ bound (1 + tolerance)`.
    pub fn judge(mut self) -> Self {
        self.passed = self.skipped || self.worst_ratio <= self.bound * (1.0 + self.tolerance);
        self
    }

    pub fn skip(mut self, reason: &str) -> Self {
        self.skipped = true;
        self.passed = true;
        self.detail("skip_reason", reason);
        self
    }

    pub fn detail(&mut self, key: &str, value: impl Into<Value>) {
        self.details.insert(key.into(), value.into());
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Ordered collection of check records, serialized as a JSON array.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct VerifyReport {
    pub records: Vec<CheckRecord>,
}

impl VerifyReport {
    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }
}
