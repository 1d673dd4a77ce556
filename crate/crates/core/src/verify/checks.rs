use crate::collision::{self, TriadTable};
use crate::evolution::{evolve_with, InvariantEnvelope, MomentLedger, RunConfig, Solver};
use crate::exec::Execution;
use crate::physics::PhysicalParams;
use crate::spectrum::{interpolation_gap, l1n_norm, mass, moment, Spectrum};
use crate::{Error, Result};

use super::constants::{coupling_ratio, lipschitz_pair_bound};
use super::{CheckRecord, DerivedConstants, Provenance};

const ROUNDING: f64 = 1e-12;

fn nonempty<T>(items: &[T], what: &str) -> Result<()> {
    if items.is_empty() {
        return Err(Error::Verify(format!("{what}: empty sample family")));
    }
    Ok(())
}

/// `ϑ_i ≤ 4 r_i ℭ²/𝔠` on every node with positive radius.
pub fn check_attenuation(samples: &[Spectrum], p: &PhysicalParams, table: &TriadTable) -> Result<CheckRecord> {
    nonempty(samples, "attenuation")?;
    let scale = 4.0 * coupling_ratio(p, 1.0);
    let ratios = Execution::default().map(samples.len(), |k| -> Result<Option<f64>> {
        let f = &samples[k];
        if mass(f) == 0.0 {
            return Ok(None);
        }
        let theta = collision::attenuation(f, p, table)?;
        let worst = table
            .grid()
            .nodes()
            .iter()
            .zip(&theta)
            .filter(|(r, _)| **r > 0.0)
            .map(|(r, th)| th / (scale * r))
            .fold(0.0, f64::max);
        Ok(Some(worst))
    });
    let mut rec = CheckRecord::new(
        "attenuation",
        "pointwise attenuation bound theta(k) <= 4|k| C^2/c",
        Provenance::Derived,
    );
    rec.tolerance = ROUNDING;
    let mut skipped = 0usize;
    for r in ratios {
        match r? {
            Some(v) => {
                rec.samples += 1;
                rec.worst_ratio = rec.worst_ratio.max(v);
            }
            None => skipped += 1,
        }
    }
    rec.detail("zero_mass_skipped", skipped);
    if rec.samples == 0 {
        return Ok(rec.skip("all samples have zero mass"));
    }
    Ok(rec.judge())
}

/// `Σ wv ω^N Q_gain ≤ C 𝔐_{N+1}`, also reporting the ratio against
/// `𝔐_{N+1}/𝔐₀`.
pub fn check_gain_moment(
    samples: &[Spectrum],
    order: f64,
    p: &PhysicalParams,
    table: &TriadTable,
    constants: &DerivedConstants,
) -> Result<CheckRecord> {
    nonempty(samples, "gain_moment")?;
    let ratios = Execution::default().map(samples.len(), |k| -> Result<Option<(f64, f64)>> {
        let f = &samples[k];
        let m0 = mass(f);
        if m0 == 0.0 {
            return Ok(None);
        }
        let res = collision::evaluate(f, p, table, 1.0)?;
        let om = table.grid().omegas(p);
        let gain_moment: f64 = table
            .grid()
            .volume_weights()
            .iter()
            .zip(&om)
            .zip(&res.gain)
            .map(|((w, o), g)| w * o.powf(order) * g)
            .sum();
        let next = moment(f, order + 1.0, p);
        Ok(Some((gain_moment / next, gain_moment * m0 / next)))
    });
    let mut rec = CheckRecord::new(
        "gain_moment",
        "gain moment bound sum(wv w^N Q_gain) <= C M_(N+1)",
        Provenance::Derived,
    );
    rec.bound = constants.gain_moment;
    rec.tolerance = ROUNDING;
    let mut per_mass: f64 = 0.0;
    for r in ratios {
        if let Some((a, b)) = r? {
            rec.samples += 1;
            rec.worst_ratio = rec.worst_ratio.max(a);
            per_mass = per_mass.max(b);
        }
    }
    rec.detail("order", order);
    rec.detail("worst_ratio_mass_normalized", per_mass);
    if rec.samples == 0 {
        return Ok(rec.skip("all samples have zero mass"));
    }
    Ok(rec.judge())
}

/// Records from [`check_holder`] plus the largest measured Lipschitz ratio.
#[derive(Clone, Debug)]
pub struct HolderOutcome {
    pub lipschitz: CheckRecord,
    pub holder: CheckRecord,
    pub interpolation: CheckRecord,
    pub max_lipschitz: f64,
}

/// Lipschitz and Hölder-½ continuity of `Q` on pairs from `V_M`, with the
/// interpolation step verified on the same differences.
pub fn check_holder(
    pairs: &[(Spectrum, Spectrum)],
    order: f64,
    p: &PhysicalParams,
    table: &TriadTable,
    constants: &DerivedConstants,
) -> Result<HolderOutcome> {
    nonempty(pairs, "holder")?;
    struct PairStats {
        lipschitz: f64,
        holder: f64,
        interpolation: f64,
        pair_bound_ratio: f64,
    }
    let stats = Execution::default().map(pairs.len(), |k| -> Result<Option<PairStats>> {
        let (g, h) = &pairs[k];
        let diff = g.difference(h)?;
        let d_n = l1n_norm(&diff, order, p);
        if d_n == 0.0 {
            return Ok(None);
        }
        let qg = collision::evaluate(g, p, table, 1.0)?;
        let qh = collision::evaluate(h, p, table, 1.0)?;
        let dq: Vec<f64> = qg.q.iter().zip(&qh.q).map(|(a, b)| a - b).collect();
        let dq = Spectrum::new_signed(g.grid().clone(), dq)?;
        let num = l1n_norm(&dq, order, p);
        let d_n1 = l1n_norm(&diff, order + 1.0, p);
        let (lhs, rhs) = interpolation_gap(&diff.abs(), order, order + 1.0, order + 2.0, p)?;
        let lipschitz = num / d_n1;
        Ok(Some(PairStats {
            lipschitz,
            holder: num / d_n.sqrt(),
            interpolation: lhs / rhs,
            pair_bound_ratio: lipschitz / lipschitz_pair_bound(order, p, constants.measure_excess, g, h),
        }))
    });
    let mut lip = CheckRecord::new(
        "lipschitz",
        "Lipschitz bound ||Q[g]-Q[h]||_(L1_N) <= C(M,M') ||g-h||_(L1_(N+1)) on V_M",
        Provenance::Derived,
    );
    lip.bound = constants.lipschitz;
    lip.tolerance = ROUNDING;
    let mut hol = CheckRecord::new(
        "holder",
        "Holder-1/2 bound ||Q[g]-Q[h]||_(L1_N) <= C(M,M') sqrt(2M) ||g-h||_(L1_N)^(1/2) on V_M",
        Provenance::Derived,
    );
    hol.bound = constants.holder;
    hol.tolerance = ROUNDING;
    let mut interp = CheckRecord::new(
        "interpolation",
        "moment interpolation ||d||_(L1_(N+1)) <= ||d||_(L1_N)^(1/2) ||d||_(L1_(N+2))^(1/2) on pair differences",
        Provenance::Trivial,
    );
    interp.tolerance = ROUNDING;
    let mut excluded = 0usize;
    let mut pair_ratio: f64 = 0.0;
    for s in stats {
        match s? {
            Some(s) => {
                for rec in [&mut lip, &mut hol, &mut interp] {
                    rec.samples += 1;
                }
                lip.worst_ratio = lip.worst_ratio.max(s.lipschitz);
                hol.worst_ratio = hol.worst_ratio.max(s.holder);
                interp.worst_ratio = interp.worst_ratio.max(s.interpolation);
                pair_ratio = pair_ratio.max(s.pair_bound_ratio);
            }
            None => excluded += 1,
        }
    }
    lip.detail("worst_ratio_over_pair_bound", pair_ratio);
    let max_lipschitz = lip.worst_ratio;
    let finish = |mut rec: CheckRecord| {
        rec.detail("identical_pairs_excluded", excluded);
        rec.detail("order", order);
        if rec.samples == 0 {
            rec.skip("all pairs identical")
        } else {
            rec.judge()
        }
    };
    Ok(HolderOutcome {
        lipschitz: finish(lip),
        holder: finish(hol),
        interpolation: finish(interp),
        max_lipschitz,
    })
}

/// Row-by-row moment inequality, exponential moment envelope and
/// invariant-set flags of a completed run.
pub fn check_ledger(
    ledger: &MomentLedger,
    p: &PhysicalParams,
    constants: &DerivedConstants,
) -> Result<Vec<CheckRecord>> {
    ledger.validate()?;
    let rows = &ledger.rows;
    let damp = 2.0 * p.nu / p.lambda2;

    let mut ineq = CheckRecord::new(
        "moment_inequality",
        "discrete moment inequality dM_N/dt + (2nu/l2) M_(N+2) - (2nu l1/l2) M_N <= C M_(N+1) + defect",
        Provenance::Derived,
    );
    ineq.bound = 1.0;
    ineq.tolerance = 1e-10;
    let slopes: Vec<f64> = rows
        .windows(2)
        .map(|w| (w[1].m_n - w[0].m_n) / (w[1].t - w[0].t))
        .collect();
    let mut worst_defect: f64 = 0.0;
    for (k, slope) in slopes.iter().enumerate() {
        let row = &rows[k];
        let mut defect: f64 = 0.0;
        if k > 0 {
            defect = defect.max((slope - slopes[k - 1]).abs());
        }
        if k + 1 < slopes.len() {
            defect = defect.max((slopes[k + 1] - slope).abs());
        }
        worst_defect = worst_defect.max(defect);
        let lhs = slope + damp * row.m_n2 - damp * p.lambda1 * row.m_n;
        let rhs = constants.gain_moment * row.m_n1;
        ineq.samples += 1;
        ineq.worst_ratio = ineq.worst_ratio.max((lhs - defect) / rhs);
    }
    ineq.detail("max_defect", worst_defect);
    ineq.detail("gain_constant", constants.gain_moment);
    let ineq = if ineq.samples == 0 {
        ineq.skip("single-row ledger")
    } else {
        ineq.judge()
    };

    let mut env = CheckRecord::new(
        "moment_envelope",
        "exponential moment envelope M_N(t) <= M_N(0) exp(A t)",
        Provenance::Derived,
    );
    env.tolerance = 1e-10;
    let m_start = rows[0].m_n;
    for row in rows {
        env.samples += 1;
        let bound = m_start * (constants.growth_rate * row.t).exp();
        if bound > 0.0 {
            env.worst_ratio = env.worst_ratio.max(row.m_n / bound);
        }
    }
    env.detail("growth_rate", constants.growth_rate);
    let env = env.judge();

    let mut set = CheckRecord::new(
        "invariant_set",
        "invariant set membership: f >= 0, ||f||_(L1_(N+3)) <= c0(t), ||f||_(L1) >= c1(t)",
        Provenance::Derived,
    );
    let mut failures = 0usize;
    for row in rows {
        set.samples += 1;
        let upper = if row.c0.is_finite() { row.l1_n3 / row.c0 } else { 0.0 };
        let lower = if row.m0 > 0.0 { row.c1 / row.m0 } else { f64::INFINITY };
        set.worst_ratio = set.worst_ratio.max(upper).max(lower);
        if !(row.s1 && row.s2 && row.s3) {
            failures += 1;
        }
    }
    set.detail("flag_failures", failures);
    set.detail("truncation_warnings", rows.iter().filter(|r| r.trunc_warn).count());
    let mut set = set.judge();
    set.passed = set.passed && failures == 0;
    Ok(vec![ineq, env, set])
}

fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Width scales probed for the asymptotic diagnostic slope.
const SMALL_SCALES: [f64; 3] = [1e-5, 1e-6, 1e-7];

/// Fits `log ‖q(ε)‖_{L¹}` against `log ε`; linear vanishing (slope 1) is
/// expected as the width scale `ε` goes to zero.
pub fn check_gamma_limit(f: &Spectrum, p: &PhysicalParams, table: &TriadTable, scales: &[f64]) -> Result<CheckRecord> {
    if p.lambda1 == 0.0 {
        return Err(Error::Verify(
            "gamma_limit needs lambda1 > 0; with lambda1 = 0 use the exact-resonance energy check".into(),
        ));
    }
    if scales.len() < 2 || scales.windows(2).any(|w| !(w[1] < w[0])) || scales.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::param("gamma_scales", "need at least two positive, decreasing scales"));
    }
    let mut rec = CheckRecord::new(
        "gamma_limit",
        "vanishing-width limit: ||Q||_(L1) ~ eps as the broadening scale eps -> 0 for lambda1 > 0",
        Provenance::Trivial,
    );
    rec.tolerance = 0.1;
    if mass(f) == 0.0 {
        return Ok(rec.skip("zero spectrum"));
    }
    let norms = |s: &[f64]| -> Result<Vec<f64>> {
        s.iter()
            .map(|&e| Ok(collision::evaluate(f, p, table, e)?.l1(table.grid())))
            .collect()
    };
    let ys = norms(scales)?;
    let slope = log_slope(scales, &ys);
    rec.samples = scales.len();
    rec.worst_ratio = slope;
    rec.passed = (slope - 1.0).abs() <= rec.tolerance;
    rec.detail("scales", scales.to_vec());
    rec.detail("l1_norms", ys);
    let small = norms(&SMALL_SCALES)?;
    rec.detail("diagnostic_scales", SMALL_SCALES.to_vec());
    rec.detail("diagnostic_slope", log_slope(&SMALL_SCALES, &small));
    Ok(rec)
}

/// Evolves `f0` and `g0` with identical step sequences and tests
/// `d(t) ≤ d(0) e^{L t}` with `d = ‖f − g‖_{L¹_N}`.
pub fn check_stability(
    solver: &Solver,
    (f0, env_f): (&Spectrum, &InvariantEnvelope),
    (g0, env_g): (&Spectrum, &InvariantEnvelope),
    cfg: &RunConfig,
    lipschitz: f64,
) -> Result<CheckRecord> {
    let p = solver.params();
    let d0 = l1n_norm(&f0.difference(g0)?, cfg.moment_order, p);
    if d0 == 0.0 {
        return Err(Error::Verify("stability: initial distance is zero".into()));
    }
    let mut path_f = Vec::new();
    evolve_with(solver, f0, cfg, env_f, |info, f| path_f.push((info.t, f.clone())))?;
    let mut path_g = Vec::new();
    evolve_with(solver, g0, cfg, env_g, |info, g| path_g.push((info.t, g.clone())))?;
    if path_f.len() != path_g.len() {
        return Err(Error::Verify("stability: runs took different step sequences".into()));
    }
    let mut rec = CheckRecord::new(
        "stability",
        "two-run stability d(t) <= d(0) exp(L t) with L the measured Lipschitz ratio",
        Provenance::Derived,
    );
    rec.tolerance = 0.05;
    let mut growth: f64 = 0.0;
    for ((t, f), (tg, g)) in path_f.iter().zip(&path_g) {
        debug_assert_eq!(t, tg);
        let d = l1n_norm(&f.difference(g)?, cfg.moment_order, p);
        rec.samples += 1;
        rec.worst_ratio = rec.worst_ratio.max(d / (d0 * (lipschitz * t).exp()));
        growth = growth.max(d / d0);
    }
    rec.detail("lipschitz_rate", lipschitz);
    rec.detail("initial_distance", d0);
    rec.detail("max_distance_growth", growth);
    Ok(rec.judge())
}

/// Quadratic-energy conservation of the exact-resonance operator.
pub fn check_energy(samples: &[Spectrum], p: &PhysicalParams) -> Result<CheckRecord> {
    nonempty(samples, "energy")?;
    let mut rec = CheckRecord::new(
        "energy",
        "exact-resonance energy conservation |sum(wv w q)| <= 1e-12 sum(wv w |q|)",
        Provenance::Trivial,
    );
    rec.bound = 1e-12;
    for f in samples {
        let res = collision::evaluate_exact(f, p)?;
        let grid = f.grid();
        let om = grid.omegas(p);
        let scale: f64 = grid
            .volume_weights()
            .iter()
            .zip(&om)
            .zip(&res.q)
            .map(|((w, o), q)| w * o * q.abs())
            .sum();
        rec.samples += 1;
        if scale > 0.0 {
            rec.worst_ratio = rec.worst_ratio.max(res.integrate(grid, &om).abs() / scale);
        }
    }
    Ok(rec.judge())
}
