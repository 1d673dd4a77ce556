//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Desk-scale defaults: uniform grid with 128 nodes on [0, 8], λ₁ = λ₂ = 1,
//! ν = 0.01, ℭ = 𝔠 = 1, Gaussian initial bump A = 1, r₀ = 2, σ = 0.5.

mod support;

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use wavekin::cli::{holder_pairs, ConfigFile, Setup};
use wavekin::collision::{self, TriadTable};
use wavekin::evolution::{
    envelope_lower, evolve, evolve_with, stable_dt, EnvelopeOverrides, InvariantEnvelope, Mode, RunConfig,
    StepRule,
};
use wavekin::physics::PhysicalParams;
use wavekin::spectrum::{RadialGrid, Spectrum};
use wavekin::verify::{self, DerivedConstants, SampleFamily};

use support::{ball_mass, Model, Oracle};

const SEED: u64 = 7;

const CONFIG: &str = r#"{
    "physical": {"lambda1": 1, "lambda2": 1, "nu": 0.01},
    "grid": {"r_min": 0, "r_max": 8, "n": 128},
    "initial": {"preset": "gaussian_bump", "amplitude": 1, "center": 2, "width": 0.5},
    "run": {"t_final": 1, "cfl_safety": 0.9, "record_every": 1, "moment_order": 1},
    "verify": {"seed": 7, "samples": 50, "pairs": 100, "mass_floor": 0.1, "ceiling": 1e5}
}"#;

fn setup() -> Setup {
    Setup::new(ConfigFile::from_json(CONFIG, std::path::Path::new(".")).unwrap()).unwrap()
}

fn gaussian(r: f64) -> f64 {
    (-((r - 2.0) / 0.5).powi(2)).exp()
}

struct Outcome {
    passed: bool,
    summary: String,
}

impl Outcome {
    fn new(passed: bool, summary: impl Into<String>) -> Self {
        Outcome {
            passed,
            summary: summary.into(),
        }
    }
}

fn positivity_and_invariant_set() -> Outcome {
    let s = setup();
    let start = Instant::now();
    let mut min_value = f64::INFINITY;
    let run = evolve_with(&s.solver, &s.f0, &s.run, &s.envelope, |_, f| {
        min_value = min_value.min(f.min_value());
    })
    .unwrap();
    let elapsed = start.elapsed();
    let flags = run.ledger.flags_pass();
    let passed = min_value >= 0.0 && flags && elapsed < Duration::from_secs(60);
    Outcome::new(
        passed,
        format!(
            "min iterate value {min_value:e}, S1-S3 flags {} over {} rows, {} steps in {:.2?} (limit 60s)",
            if flags { "all pass" } else { "VIOLATED" },
            run.ledger.rows.len(),
            run.dts.len(),
            elapsed
        ),
    )
}

fn attenuation_bound() -> Outcome {
    let s = setup();
    let samples = SampleFamily::new(s.grid.clone(), 50, SEED).generate(&s.params).unwrap();
    let rec = verify::check_attenuation(&samples, &s.params, &s.table).unwrap();
    Outcome::new(
        rec.passed && rec.samples == 50,
        format!("max theta/(4r) = {:.15} over {} spectra (limit 1 + 1e-12)", rec.worst_ratio, rec.samples),
    )
}

fn continuum_defect(s: &Setup, dt: f64, t_final: f64) -> f64 {
    let cfg = RunConfig {
        t_final,
        step: StepRule::Fixed(dt),
        record_every: usize::MAX,
        moment_order: 1.0,
    };
    let env = InvariantEnvelope::derive(&s.f0, &s.params, 1.0, t_final, 1.0, EnvelopeOverrides::default()).unwrap();
    let run = evolve(&s.solver, &s.f0, &cfg, &env).unwrap();
    let lower = envelope_lower(&s.f0, t_final, &s.params);
    run.final_state
        .values()
        .iter()
        .zip(lower.values())
        .filter(|(_, e)| **e > 0.0)
        .map(|(f, e)| 1.0 - f / e)
        .fold(0.0, f64::max)
}

fn lower_envelopes() -> Outcome {
    let s = setup();
    let p = s.params;
    let rates: Vec<f64> = s
        .grid
        .nodes()
        .iter()
        .map(|&r| 4.0 * r + 2.0 * p.nu * r * r)
        .collect();
    let mut bound = s.f0.values().to_vec();
    let mut worst: f64 = 0.0;
    let mut last_t = 0.0;
    evolve_with(&s.solver, &s.f0, &s.run, &s.envelope, |info, f| {
        let dt = info.t - last_t;
        last_t = info.t;
        for (b, rate) in bound.iter_mut().zip(&rates) {
            *b *= 1.0 - dt * rate;
        }
        let fmax = f.max_value();
        for (v, b) in f.values().iter().zip(&bound) {
            worst = worst.max((b - v) / fmax);
        }
    })
    .unwrap();
    let discrete_ok = worst <= 1e-13;

    let dt = stable_dt(&s.grid, &p, 0.9).unwrap();
    let deltas: Vec<f64> = [dt, dt / 2.0, dt / 4.0]
        .iter()
        .map(|&h| continuum_defect(&s, h, 0.5))
        .collect();
    let contracts = deltas[1] <= 0.6 * deltas[0] && deltas[2] <= 0.6 * deltas[1];
    Outcome::new(
        discrete_ok && contracts,
        format!(
            "discrete product deficit {worst:e} (limit 1e-13); continuum defect at T=0.5 for dt, dt/2, dt/4: {:e}, {:e}, {:e} (each halving must contract by <= 0.6)",
            deltas[0], deltas[1], deltas[2]
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let p = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
    let grid = Arc::new(RadialGrid::uniform(8.0, 32).unwrap());
    let table = TriadTable::build(grid.clone());
    let f = Spectrum::from_fn(grid.clone(), gaussian).unwrap();
    let reduced = collision::evaluate(&f, &p, &table, 1.0).unwrap();

    let start = Instant::now();
    let model = Model {
        lambda1: 1.0,
        lambda2: 1.0,
        c_v: 1.0,
        c_gamma: 1.0,
    };
    let oracle = Oracle::new(model, &gaussian, ball_mass(&gaussian, 8.0), 8.0);
    let direct: Vec<f64> = grid.nodes().iter().map(|&r| oracle.q(r)).collect();
    let elapsed = start.elapsed();

    let wv = grid.volume_weights();
    let diff: f64 = wv
        .iter()
        .zip(reduced.q.iter().zip(&direct))
        .map(|(w, (a, b))| w * (a - b).abs())
        .sum();
    let norm: f64 = wv.iter().zip(&direct).map(|(w, b)| w * b.abs()).sum();
    let rel = diff / norm;
    Outcome::new(
        rel <= 0.02 && elapsed < Duration::from_secs(600),
        format!("L1 relative difference {:.4}% (limit 2%), oracle time {elapsed:.2?} (limit 10 min)", 100.0 * rel),
    )
}

fn moment_ledger() -> Outcome {
    let s = setup();
    let run = evolve(&s.solver, &s.f0, &s.run, &s.envelope).unwrap();
    let constants = DerivedConstants::compute(&s.table, &s.params, 1.0, 1e5, 0.1);
    let records = verify::check_ledger(&run.ledger, &s.params, &constants).unwrap();
    let ineq = &records[0];
    let env = &records[1];
    let passed = records.iter().all(|r| r.passed);
    Outcome::new(
        passed,
        format!(
            "{} rows; worst inequality ratio {:.4} (limit 1), worst M_N/envelope {:.6} (limit 1), growth rate {:.3}",
            run.ledger.rows.len(),
            ineq.worst_ratio,
            env.worst_ratio,
            constants.growth_rate
        ),
    )
}

fn holder_continuity(s: &Setup) -> (Outcome, f64) {
    let constants = DerivedConstants::compute(&s.table, &s.params, 1.0, 1e5, 0.1);
    let pairs = holder_pairs(s, SEED).unwrap();
    let out = verify::check_holder(&pairs, 1.0, &s.params, &s.table, &constants).unwrap();
    let passed = out.lipschitz.passed
        && out.holder.passed
        && out.interpolation.passed
        && out.lipschitz.samples == 100;
    (
        Outcome::new(
            passed,
            format!(
                "{} pairs; Lipschitz {:.4} <= {:.4e}, Holder {:.4} <= {:.4e}, interpolation ratio {:.15} <= 1 + 1e-12",
                out.lipschitz.samples,
                out.lipschitz.worst_ratio,
                out.lipschitz.bound,
                out.holder.worst_ratio,
                out.holder.bound,
                out.interpolation.worst_ratio
            ),
        ),
        out.max_lipschitz,
    )
}

fn exact_energy() -> Outcome {
    let p = PhysicalParams::new(0.0, 1.0, 0.01).unwrap();
    let grid = Arc::new(RadialGrid::uniform(8.0, 129).unwrap());
    let samples = SampleFamily::new(grid, 10, SEED).generate(&p).unwrap();
    let rec = verify::check_energy(&samples, &p).unwrap();
    Outcome::new(
        rec.passed && rec.samples == 10,
        format!("max |sum wv w q| / sum wv w |q| = {:e} over 10 spectra (limit 1e-12)", rec.worst_ratio),
    )
}

fn gamma_limit() -> Outcome {
    let s = setup();
    let rec = verify::check_gamma_limit(&s.f0, &s.params, &s.table, &[1e-1, 1e-2, 1e-3]).unwrap();
    Outcome::new(
        rec.passed,
        format!(
            "fitted slope {:.4} on eps in {{1e-1, 1e-2, 1e-3}} (need 1 +- 0.1); diagnostic slope on {{1e-5, 1e-6, 1e-7}}: {:.4}",
            rec.worst_ratio, rec.details["diagnostic_slope"]
        ),
    )
}

fn stability(s: &Setup, lipschitz: f64) -> Outcome {
    let g0 = s.f0.scaled(1.01).unwrap();
    let env_g = Setup::envelope_for(&s.config, &g0, &s.table, s.run.t_final).unwrap();
    let rec = verify::check_stability(&s.solver, (&s.f0, &s.envelope), (&g0, &env_g), &s.run, lipschitz).unwrap();
    Outcome::new(
        rec.passed,
        format!(
            "sup d(t)/(d(0) exp(L t)) = {:.6} with L = {lipschitz:.4} (limit 1.05), max d(t)/d(0) = {:.4}",
            rec.worst_ratio, rec.details["max_distance_growth"]
        ),
    )
}

fn main() -> ExitCode {
    let shared = setup();
    assert_eq!(shared.solver.mode(), Mode::NearResonance);
    let (holder, lipschitz) = holder_continuity(&shared);
    let results: Vec<(&str, Outcome)> = vec![
        ("1 positivity and invariant set", positivity_and_invariant_set()),
        ("2 attenuation bound", attenuation_bound()),
        ("3 lower-bound envelopes", lower_envelopes()),
        ("4 oracle equivalence", oracle_equivalence()),
        ("5 moment ledger", moment_ledger()),
        ("6 Holder/Lipschitz continuity", holder),
        ("7a exact-resonance energy conservation", exact_energy()),
        ("7b vanishing-width linear scaling", gamma_limit()),
        ("8 two-run stability", stability(&shared, lipschitz)),
    ];
    let mut failed = 0;
    for (name, out) in &results {
        let tag = if out.passed { "PASS" } else { "FAIL" };
        println!("{tag} criterion {name}: {}", out.summary);
        if !out.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
