//! Running verification suites against a config.

use std::sync::Arc;

use crate::evolution::{evolve, Mode, Solver};
use crate::physics::PhysicalParams;
use crate::spectrum::{RadialGrid, Spacing, Spectrum};
use crate::verify::{self, CheckRecord, DerivedConstants, Provenance, SampleFamily, VerifyReport};
use crate::Result;

use super::config::Suite;
use super::setup::Setup;

/// Tolerance on the discrete product lower bound, relative to `max f`.
pub const DISCRETE_BOUND_TOL: f64 = 1e-13;

/// Number of random spectra used by the exact-resonance energy check.
pub const ENERGY_SAMPLES: usize = 10;

pub fn derived_constants(setup: &Setup) -> DerivedConstants {
    let v = &setup.config.verify;
    DerivedConstants::compute(&setup.table, &setup.params, setup.run.moment_order, v.ceiling, v.mass_floor)
}

fn family(setup: &Setup, count: usize, seed: u64) -> SampleFamily {
    let v = &setup.config.verify;
    SampleFamily::new(setup.grid.clone(), count, seed).with_bounds(v.mass_floor, v.ceiling, setup.run.moment_order)
}

/// Random pairs for the continuity checks; drawn from a family seeded
/// independently of the single-sample family.
pub fn holder_pairs(setup: &Setup, seed: u64) -> Result<Vec<(Spectrum, Spectrum)>> {
    let pairs = setup.config.verify.pairs;
    let mut all = family(setup, 2 * pairs, seed.wrapping_add(1)).generate(&setup.params)?;
    let mut out = Vec::with_capacity(pairs);
    while let (Some(h), Some(g)) = (all.pop(), all.pop()) {
        out.push((g, h));
    }
    out.reverse();
    Ok(out)
}

/// Runs `suite` and returns every record, stamped with hash and seed.
pub fn run_suite(setup: &Setup, suite: Suite, seed: u64) -> Result<VerifyReport> {
    let p = &setup.params;
    let order = setup.run.moment_order;
    let constants = derived_constants(setup);
    let wants = |s: Suite| suite == Suite::All || suite == s;
    let mut report = VerifyReport::default();

    let needs_samples = wants(Suite::Attenuation) || wants(Suite::GainMoment);
    let samples = if needs_samples {
        family(setup, setup.config.verify.samples, seed).generate(p)?
    } else {
        Vec::new()
    };
    if wants(Suite::Attenuation) {
        report.push(verify::check_attenuation(&samples, p, &setup.table)?);
    }
    if wants(Suite::GainMoment) {
        report.push(verify::check_gain_moment(&samples, order, p, &setup.table, &constants)?);
    }
    let mut lipschitz = None;
    if wants(Suite::Holder) || wants(Suite::Stability) {
        let pairs = holder_pairs(setup, seed)?;
        let out = verify::check_holder(&pairs, order, p, &setup.table, &constants)?;
        lipschitz = Some(out.max_lipschitz);
        if wants(Suite::Holder) {
            report.push(out.lipschitz);
            report.push(out.holder);
            report.push(out.interpolation);
        }
    }
    if wants(Suite::Ledger) {
        let run = evolve(&setup.solver, &setup.f0, &setup.run, &setup.envelope)?;
        for rec in verify::check_ledger(&run.ledger, p, &constants)? {
            report.push(rec);
        }
        report.push(discrete_bound_record(run.discrete_slack, run.dts.len()));
    }
    if wants(Suite::GammaLimit) {
        let rec = if p.lambda1 == 0.0 {
            CheckRecord::new(
                "gamma_limit",
                "vanishing-width limit: ||Q||_(L1) ~ eps as the broadening scale eps -> 0 for lambda1 > 0",
                Provenance::Trivial,
            )
            .skip("lambda1 = 0: covered by the exact-resonance energy check")
        } else {
            verify::check_gamma_limit(&setup.f0, p, &setup.table, &setup.config.verify.gamma_scales)?
        };
        report.push(rec);
    }
    if wants(Suite::Stability) {
        let g0 = setup.f0.scaled(1.01)?;
        let env_g = Setup::envelope_for(&setup.config, &g0, &setup.table, setup.run.t_final)?;
        let rec = verify::check_stability(
            &setup.solver,
            (&setup.f0, &setup.envelope),
            (&g0, &env_g),
            &setup.run,
            lipschitz.expect("holder ran"),
        )?;
        report.push(rec);
    }
    if wants(Suite::Energy) {
        report.push(energy_record(setup, seed)?);
    }
    for rec in &mut report.records {
        rec.seed = Some(seed);
        rec.config_hash = Some(setup.hash.clone());
    }
    Ok(report)
}

fn discrete_bound_record(slack: f64, steps: usize) -> CheckRecord {
    let mut rec = CheckRecord::new(
        "discrete_lower_bound",
        "every iterate dominates f0 prod(1 - dt(4|k| + 2 nu |k|^2)) relative to max f",
        Provenance::Trivial,
    );
    rec.samples = steps;
    rec.worst_ratio = (-slack).max(0.0);
    rec.bound = DISCRETE_BOUND_TOL;
    rec.detail("min_slack", slack);
    rec.judge()
}

/// Exact-resonance energy conservation with `λ₁` forced to zero on a
/// uniform grid from the origin.
fn energy_record(setup: &Setup, seed: u64) -> Result<CheckRecord> {
    let p = PhysicalParams { lambda1: 0.0, ..setup.params };
    let g = &setup.grid;
    let grid = if g.spacing() == Spacing::Uniform && g.r_min() == 0.0 {
        g.clone()
    } else {
        Arc::new(RadialGrid::uniform(g.r_max(), g.len())?)
    };
    let v = &setup.config.verify;
    let samples = SampleFamily::new(grid, ENERGY_SAMPLES, seed.wrapping_add(2))
        .with_bounds(v.mass_floor, v.ceiling, setup.run.moment_order)
        .generate(&p)?;
    // Confirms the exact-mode preconditions before evaluating.
    Solver::new(samples[0].grid().clone(), p, Mode::ExactResonance)?;
    let mut rec = verify::check_energy(&samples, &p)?;
    rec.detail("lambda1_forced_zero", setup.params.lambda1 != 0.0);
    Ok(rec)
}
