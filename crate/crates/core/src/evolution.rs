//! Explicit Euler integration of `∂t f = Q_gain − f ϑ − 2ν|k|² f`.
//!
//! With `dt ≤ stable_dt` every step keeps the spectrum nonnegative, because
//! the gain is nonnegative and the per-node depletion rate `ϑ + 2νr²` never
//! exceeds `4r ℭ²/𝔠 + 2νr²`. The same domination yields an exact discrete
//! lower bound (a product of per-step factors) and, as `dt → 0`, the
//! exponential envelope `f₀ e^{−(2νr² + 4r)t}`.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::collision::{self, CollisionResult, TriadTable};
use crate::exec::Execution;
use crate::physics::{damping_rate, PhysicalParams};
use crate::spectrum::{l1n_norm, mass, moment, restricted_mass, RadialGrid, Spectrum};
use crate::verify::constants;
use crate::{Error, Result};

/// Relative level at the outermost node above which truncation is flagged.
pub const TRUNCATION_LEVEL: f64 = 1e-10;

/// Fraction of the initial mass the automatic `R₀` must enclose.
pub const AUTO_R0_MASS_FRACTION: f64 = 0.99;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    NearResonance,
    ExactResonance,
}

/// How the time step is chosen.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// Fraction of the positivity limit, in `(0, 1]`.
    Cfl(f64),
    /// A fixed step, which must not exceed the positivity limit.
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub t_final: f64,
    pub step: StepRule,
    pub record_every: usize,
    pub moment_order: f64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::param("t_final", format!("must be finite and >= 0, got {}", self.t_final)));
        }
        match self.step {
            StepRule::Cfl(s) if !(s > 0.0 && s <= 1.0) => {
                return Err(Error::param("cfl_safety", format!("must lie in (0, 1], got {s}")))
            }
            StepRule::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(Error::param("dt", format!("must be finite and > 0, got {dt}")))
            }
            _ => {}
        }
        if self.record_every == 0 {
            return Err(Error::param("record_every", "must be at least 1"));
        }
        if !(self.moment_order.is_finite() && self.moment_order >= 0.0) {
            return Err(Error::param("moment_order", format!("must be >= 0, got {}", self.moment_order)));
        }
        Ok(())
    }
}

/// Depletion-rate bound per node: `4 r ℭ²/𝔠 + 2ν r²`.
pub fn depletion_bound(r: f64, p: &PhysicalParams) -> f64 {
    4.0 * r * p.c_v * p.c_v / p.c_gamma + damping_rate(r, p)
}

/// Largest step that provably keeps the iterate nonnegative, times `safety`.
pub fn stable_dt(grid: &RadialGrid, p: &PhysicalParams, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::param("cfl_safety", format!("must lie in (0, 1], got {safety}")));
    }
    Ok(safety / depletion_bound(grid.r_max(), p))
}

/// `f₀ e^{−(2νr² + 4r)t}` per node.
pub fn envelope_lower(f0: &Spectrum, t: f64, p: &PhysicalParams) -> Spectrum {
    let values = f0
        .grid()
        .nodes()
        .iter()
        .zip(f0.values())
        .map(|(&r, &v)| v * (-depletion_bound(r, p) * t).exp())
        .collect();
    Spectrum::new(f0.grid().clone(), values).expect("scaled nonnegative spectrum")
}

/// `f₀ Π_k (1 − dt_k (4r + 2νr²))` per node, clamped at zero.
pub fn discrete_lower_product(f0: &Spectrum, dts: &[f64], p: &PhysicalParams) -> Spectrum {
    let values = f0
        .grid()
        .nodes()
        .iter()
        .zip(f0.values())
        .map(|(&r, &v)| {
            let rate = depletion_bound(r, p);
            dts.iter().fold(v, |acc, dt| acc * (1.0 - dt * rate).max(0.0))
        })
        .collect();
    Spectrum::new(f0.grid().clone(), values).expect("product of nonnegative factors")
}

/// Constants describing the time-dependent invariant set
/// `S_t = {f ≥ 0, ‖f‖_{L¹_{N+3}} ≤ c₀(t), ‖f‖_{L¹} ≥ c₁(t)}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvariantEnvelope {
    pub order: f64,
    pub r0: f64,
    pub r_lower: f64,
    pub r_upper: f64,
    /// Growth-rate constant of `c₀`.
    pub c_star: f64,
    /// Decay-rate constant of `c₁`: `4νR₀² + 8R₀`.
    pub c_upper: f64,
    /// Moment growth constant at order `N + 3`.
    pub c_zero: f64,
    pub f0_restricted_mass: f64,
}

/// Optional overrides for [`InvariantEnvelope::derive`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EnvelopeOverrides {
    pub r0: Option<f64>,
    pub r_lower: Option<f64>,
    pub r_upper: Option<f64>,
}

impl InvariantEnvelope {
    /// Builds the envelope for initial datum `f0` on `[0, horizon]`.
    ///
    /// Defaults: `R₀` is the smallest node radius enclosing 99% of the mass,
    /// `R_* = max(1, ‖f₀‖_{L¹_{N+3}})` and `R^* = ‖f₀‖_{L¹}`.
    pub fn derive(
        f0: &Spectrum,
        p: &PhysicalParams,
        order: f64,
        horizon: f64,
        measure_excess: f64,
        overrides: EnvelopeOverrides,
    ) -> Result<Self> {
        let m0 = mass(f0);
        if !(m0 > 0.0) {
            return Err(Error::Inadmissible(
                "S3 fails: initial mass is zero, so no positive mass floor exists".into(),
            ));
        }
        let r0 = match overrides.r0 {
            Some(r0) if r0 > 0.0 && r0.is_finite() => r0,
            Some(r0) => return Err(Error::param("envelope.r0", format!("must be > 0, got {r0}"))),
            None => auto_r0(f0),
        };
        let restricted = restricted_mass(f0, r0);
        if !(restricted > 0.0) {
            return Err(Error::param(
                "envelope.r0",
                format!("ball of radius {r0} holds no initial mass"),
            ));
        }
        let r_lower = overrides
            .r_lower
            .unwrap_or_else(|| l1n_norm(f0, order + 3.0, p).max(1.0));
        let r_upper = overrides.r_upper.unwrap_or(m0);
        for (name, v) in [("envelope.r_lower", r_lower), ("envelope.r_upper", r_upper)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        let c_upper = 4.0 * p.nu * r0 * r0 + 8.0 * r0;
        let c_zero = constants::moment_growth_rate(order + 3.0, p, f0.grid(), 1.0, measure_excess).max(0.0);
        let c_star = c_zero * (1.0 + (c_upper * horizon).exp()) / restricted;
        Ok(InvariantEnvelope {
            order,
            r0,
            r_lower,
            r_upper,
            c_star,
            c_upper,
            c_zero,
            f0_restricted_mass: restricted,
        })
    }

    /// Ceiling on `‖f‖_{L¹_{N+3}}`; may overflow to infinity.
    pub fn c0(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 2.0 * self.r_lower + 1.0;
        }
        (2.0 * self.r_lower + 1.0) * (self.c_star * t).exp()
    }

    /// Floor on `‖f‖_{L¹}`.
    pub fn c1(&self, t: f64) -> f64 {
        0.5 * self.r_upper * (-self.c_upper * t).exp()
    }
}

fn auto_r0(f0: &Spectrum) -> f64 {
    let total = mass(f0);
    let grid = f0.grid();
    let mut acc = 0.0;
    for ((&r, w), v) in grid.nodes().iter().zip(grid.volume_weights()).zip(f0.values()) {
        acc += w * v;
        if r > 0.0 && acc >= AUTO_R0_MASS_FRACTION * total {
            return r;
        }
    }
    grid.r_max()
}

/// Membership flags for the invariant set at time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SetFlags {
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
}

impl SetFlags {
    pub fn all(&self) -> bool {
        self.s1 && self.s2 && self.s3
    }

    pub fn describe_failures(&self) -> String {
        let mut out = Vec::new();
        if !self.s1 {
            out.push("S1 (positivity)");
        }
        if !self.s2 {
            out.push("S2 (L1_{N+3} ceiling c0)");
        }
        if !self.s3 {
            out.push("S3 (mass floor c1)");
        }
        out.join(", ")
    }
}

pub fn invariant_set_check(f: &Spectrum, t: f64, env: &InvariantEnvelope, p: &PhysicalParams) -> SetFlags {
    let m0 = l1n_norm(f, 0.0, p);
    SetFlags {
        s1: f.is_nonnegative(),
        s2: l1n_norm(f, env.order + 3.0, p) <= env.c0(t),
        s3: m0 > 0.0 && m0 >= env.c1(t),
    }
}

/// One recorded state of a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerRow {
    pub t: f64,
    pub m0: f64,
    pub m1: f64,
    pub m_n: f64,
    pub m_n1: f64,
    pub m_n2: f64,
    pub l1_n3: f64,
    pub c0: f64,
    pub c1: f64,
    /// `min_i (f_i − envelope_i) / max f₀`.
    pub envelope_slack: f64,
    pub s1: bool,
    pub s2: bool,
    pub s3: bool,
    pub trunc_warn: bool,
}

/// Time series of moments, norms and invariant-set flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MomentLedger {
    pub order: f64,
    pub rows: Vec<LedgerRow>,
}

pub const LEDGER_HEADER: &str = "t,m0,m1,mN,mN1,mN2,l1N3,c0,c1,envelope_slack,s1,s2,s3,trunc_warn";

impl MomentLedger {
    pub fn new(order: f64) -> Self {
        MomentLedger { order, rows: Vec::new() }
    }

    /// Checks that the ledger has rows, finite times strictly increasing and
    /// finite moments.
    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::MalformedLedger("no rows".into()));
        }
        for (k, row) in self.rows.iter().enumerate() {
            let moments = [row.t, row.m0, row.m1, row.m_n, row.m_n1, row.m_n2, row.l1_n3];
            if moments.iter().any(|v| !v.is_finite()) {
                return Err(Error::MalformedLedger(format!("row {k} has a non-finite entry")));
            }
            if k > 0 && row.t <= self.rows[k - 1].t {
                return Err(Error::MalformedLedger(format!("time not increasing at row {k}")));
            }
        }
        Ok(())
    }

    pub fn flags_pass(&self) -> bool {
        self.rows.iter().all(|r| r.s1 && r.s2 && r.s3)
    }

    pub fn write_csv(&self, out: &mut impl Write, comments: &[String]) -> std::io::Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "{LEDGER_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                r.m0,
                r.m1,
                r.m_n,
                r.m_n1,
                r.m_n2,
                r.l1_n3,
                r.c0,
                r.c1,
                r.envelope_slack,
                r.s1,
                r.s2,
                r.s3,
                r.trunc_warn
            )?;
        }
        Ok(())
    }
}

/// Collision operator plus damping on a fixed grid.
#[derive(Clone, Debug)]
pub struct Solver {
    grid: Arc<RadialGrid>,
    params: PhysicalParams,
    mode: Mode,
    table: Option<Arc<TriadTable>>,
    exec: Execution,
}

impl Solver {
    pub fn new(grid: Arc<RadialGrid>, params: PhysicalParams, mode: Mode) -> Result<Self> {
        params.validate()?;
        let table = match mode {
            Mode::NearResonance => Some(Arc::new(TriadTable::build(grid.clone()))),
            Mode::ExactResonance => {
                collision::check_exact_mode(&grid, &params)?;
                None
            }
        };
        Ok(Solver {
            grid,
            params,
            mode,
            table,
            exec: Execution::default(),
        })
    }

    /// Near-resonance solver reusing a prebuilt table.
    pub fn with_table(table: Arc<TriadTable>, params: PhysicalParams) -> Result<Self> {
        params.validate()?;
        Ok(Solver {
            grid: table.grid().clone(),
            params,
            mode: Mode::NearResonance,
            table: Some(table),
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn table(&self) -> Option<&Arc<TriadTable>> {
        self.table.as_ref()
    }

    /// Collision rates of `f`.
    pub fn rates(&self, f: &Spectrum) -> Result<CollisionResult> {
        match &self.table {
            Some(t) => collision::evaluate_with(f, &self.params, t, 1.0, self.exec),
            None => collision::evaluate_exact_with(f, &self.params, self.exec),
        }
    }

    /// Largest positivity-preserving step for the given rates.
    fn step_limit(&self, rates: &CollisionResult) -> f64 {
        match self.mode {
            Mode::NearResonance => 1.0 / depletion_bound(self.grid.r_max(), &self.params),
            Mode::ExactResonance => {
                let worst = self
                    .grid
                    .nodes()
                    .iter()
                    .zip(&rates.theta)
                    .map(|(&r, th)| th + damping_rate(r, &self.params))
                    .fold(0.0, f64::max);
                if worst > 0.0 {
                    1.0 / worst
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn advance(&self, f: &Spectrum, rates: &CollisionResult, dt: f64) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .zip(f.values())
            .zip(rates.gain.iter().zip(&rates.theta))
            .map(|((&r, &v), (&g, &th))| v + dt * (g - v * th - damping_rate(r, &self.params) * v))
            .collect()
    }

    /// One explicit Euler step.
    pub fn step(&self, f: &Spectrum, dt: f64) -> Result<Spectrum> {
        let rates = self.rates(f)?;
        let limit = self.step_limit(&rates);
        if !(dt > 0.0) || dt > limit {
            return Err(Error::UnstableStep { dt, limit });
        }
        Spectrum::new(f.grid().clone(), self.advance(f, &rates, dt))
    }
}

/// Per-step information handed to observers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub recorded: bool,
}

/// Result of [`evolve`].
#[derive(Clone, Debug)]
pub struct Run {
    pub final_state: Spectrum,
    pub ledger: MomentLedger,
    /// Minimum over all iterates of `min_i (f_i − product bound_i) / max f`.
    pub discrete_slack: f64,
    pub dts: Vec<f64>,
}

pub fn evolve(solver: &Solver, f0: &Spectrum, cfg: &RunConfig, env: &InvariantEnvelope) -> Result<Run> {
    evolve_with(solver, f0, cfg, env, |_, _| {})
}

/// [`evolve`] with an observer called on the initial state and after every
/// step.
pub fn evolve_with(
    solver: &Solver,
    f0: &Spectrum,
    cfg: &RunConfig,
    env: &InvariantEnvelope,
    mut observer: impl FnMut(&StepInfo, &Spectrum),
) -> Result<Run> {
    cfg.validate()?;
    f0.check_same_grid(&Spectrum::zeros(solver.grid.clone()))?;
    let p = solver.params;
    let flags = invariant_set_check(f0, 0.0, env, &p);
    if !flags.all() {
        return Err(Error::Inadmissible(format!("{} fails at t = 0", flags.describe_failures())));
    }
    let (base_dt, safety) = match cfg.step {
        StepRule::Cfl(s) => (stable_dt(&solver.grid, &p, s)?, s),
        StepRule::Fixed(dt) => {
            let limit = stable_dt(&solver.grid, &p, 1.0)?;
            if solver.mode == Mode::NearResonance && dt > limit {
                return Err(Error::UnstableStep { dt, limit });
            }
            (dt, 1.0)
        }
    };

    let grid = solver.grid.clone();
    let depletion: Vec<f64> = grid.nodes().iter().map(|&r| depletion_bound(r, &p)).collect();
    let f0_max = f0.max_value();
    let mut ledger = MomentLedger::new(cfg.moment_order);
    let mut bound = f0.values().to_vec();
    let mut f = f0.clone();
    let mut t = 0.0;
    let mut step = 0usize;
    let mut dts = Vec::new();
    let mut discrete_slack = 0.0f64;

    ledger.rows.push(ledger_row(&f, t, f0, f0_max, env, &p, cfg.moment_order));
    observer(&StepInfo { step, t, dt: 0.0, recorded: true }, &f);

    while t < cfg.t_final {
        let rates = solver.rates(&f)?;
        let mut dt = base_dt;
        if solver.mode == Mode::ExactResonance {
            dt = dt.min(safety * solver.step_limit(&rates));
        }
        let remaining = cfg.t_final - t;
        let last = dt >= remaining * (1.0 - 1e-12);
        if last {
            dt = remaining;
        }
        let next = solver.advance(&f, &rates, dt);
        if let Some(index) = next.iter().position(|v| *v < 0.0) {
            return Err(Error::PositivityLost { index, t: t + dt });
        }
        f = Spectrum::new(grid.clone(), next)?;
        t = if last { cfg.t_final } else { t + dt };
        step += 1;
        dts.push(dt);

        let f_max = f.max_value();
        for ((b, rate), v) in bound.iter_mut().zip(&depletion).zip(f.values()) {
            *b *= (1.0 - dt * rate).max(0.0);
            if f_max > 0.0 {
                discrete_slack = discrete_slack.min((v - *b) / f_max);
            }
        }

        let recorded = last || step.is_multiple_of(cfg.record_every);
        if recorded {
            ledger.rows.push(ledger_row(&f, t, f0, f0_max, env, &p, cfg.moment_order));
        }
        observer(&StepInfo { step, t, dt, recorded }, &f);
    }
    Ok(Run {
        final_state: f,
        ledger,
        discrete_slack,
        dts,
    })
}

fn ledger_row(
    f: &Spectrum,
    t: f64,
    f0: &Spectrum,
    f0_max: f64,
    env: &InvariantEnvelope,
    p: &PhysicalParams,
    order: f64,
) -> LedgerRow {
    let flags = invariant_set_check(f, t, env, p);
    let lower = envelope_lower(f0, t, p);
    let slack = f
        .values()
        .iter()
        .zip(lower.values())
        .map(|(v, e)| v - e)
        .fold(f64::INFINITY, f64::min)
        / f0_max;
    let f_max = f.max_value();
    let tail = *f.values().last().expect("grid has nodes");
    LedgerRow {
        t,
        m0: mass(f),
        m1: moment(f, 1.0, p),
        m_n: moment(f, order, p),
        m_n1: moment(f, order + 1.0, p),
        m_n2: moment(f, order + 2.0, p),
        l1_n3: l1n_norm(f, order + 3.0, p),
        c0: env.c0(t),
        c1: env.c1(t),
        envelope_slack: slack,
        s1: flags.s1,
        s2: flags.s2,
        s3: flags.s3,
        trunc_warn: f_max > 0.0 && tail >= TRUNCATION_LEVEL * f_max,
    }
}
