//! Command-line front end: `run`, `verify` and `eval`.
//!
//! Exit codes: 0 on success, 1 when a check or invariant fails (`verify`
//! always, `run` only with `--strict`), 2 for configuration errors.

mod config;
mod setup;
mod suite;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::collision;
use crate::evolution::{envelope_lower, evolve_with, Mode};
use crate::spectrum::Spectrum;
use crate::verify::VerifyReport;
use crate::{Error, Result};

pub use config::{
    ConfigFile, EnvelopeSpec, GridSpec, InitialSpec, RadiusChoice, RunSpec, Suite, VerifySpec, DEFAULT_CFL,
};
pub use setup::{preset_spectrum, Setup};
pub use suite::{derived_constants, holder_pairs, run_suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wavekin", version, about = "Near-resonance three-wave kinetic solver and estimate verifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve the initial spectrum and write the ledger and snapshots.
    Run(CommonArgs),
    /// Run a verification suite and write report.json.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Suite name or `all`; overrides the config.
        #[arg(long)]
        suite: Option<Suite>,
    },
    /// Dump gain, attenuation and net rate to eval.csv.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluate the initial spectrum instead of the state at `t_final`.
        #[arg(long)]
        t0: bool,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Turn invariant or check failures into exit code 1.
    #[arg(long)]
    pub strict: bool,
    /// Overrides `verify.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

fn is_config_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config { .. }
            | Error::InvalidParameter { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidSpectrum { .. }
            | Error::Inadmissible(_)
            | Error::EmptyResonantManifold { .. }
            | Error::NonUniformGrid
            | Error::Parse { .. }
            | Error::GridMismatch
    )
}

/// Parses `args` and runs the chosen subcommand; returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_config_error(&e) {
                EXIT_CONFIG
            } else {
                EXIT_CHECK_FAILED
            }
        }
    }
}

fn load(common: &CommonArgs) -> Result<(Setup, u64)> {
    let config = ConfigFile::load(&common.config).map_err(|e| match e {
        Error::Io { path, source } => Error::Config {
            path,
            message: source.to_string(),
        },
        other => other,
    })?;
    let seed = common.seed.unwrap_or(config.verify.seed);
    Ok((Setup::new(config)?, seed))
}

pub fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Run(common) => cmd_run(common),
        Command::Verify { common, suite } => cmd_verify(common, *suite),
        Command::Eval { common, t0 } => cmd_eval(common, *t0),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?))
}

fn write_snapshot(dir: &Path, header: &str, t: f64, f: &Spectrum, f0: &Spectrum, setup: &Setup) -> Result<()> {
    let name = format!("spectrum_t{t}.csv");
    let path = dir.join(&name);
    let io = |e| Error::io(&path, e);
    let mut out = create(dir, &name)?;
    let env = envelope_lower(f0, t, &setup.params);
    writeln!(out, "# {header}").map_err(io)?;
    writeln!(out, "r,f,env").map_err(io)?;
    for ((r, v), e) in setup.grid.nodes().iter().zip(f.values()).zip(env.values()) {
        writeln!(out, "{r},{v},{e}").map_err(io)?;
    }
    out.flush().map_err(io)
}

fn cmd_run(common: &CommonArgs) -> Result<i32> {
    let (setup, seed) = load(common)?;
    let header = setup.header(seed);
    let mut snapshot_err = None;
    let run = evolve_with(&setup.solver, &setup.f0, &setup.run, &setup.envelope, |info, f| {
        if info.recorded && snapshot_err.is_none() {
            if let Err(e) = write_snapshot(&common.out, &header, info.t, f, &setup.f0, &setup) {
                snapshot_err = Some(e);
            }
        }
    })?;
    if let Some(e) = snapshot_err {
        return Err(e);
    }
    let path = common.out.join("ledger.csv");
    let mut out = create(&common.out, "ledger.csv")?;
    run.ledger
        .write_csv(&mut out, &[header])
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&path, e))?;

    let constants = derived_constants(&setup);
    let checks = crate::verify::check_ledger(&run.ledger, &setup.params, &constants)?;
    let flags_ok = run.ledger.flags_pass();
    let checks_ok = checks.iter().all(|c| c.passed);
    let truncated = run.ledger.rows.iter().filter(|r| r.trunc_warn).count();
    println!(
        "run: {} steps to t = {}, {} ledger rows, invariant set {}, moment checks {}",
        run.dts.len(),
        setup.run.t_final,
        run.ledger.rows.len(),
        if flags_ok { "ok" } else { "VIOLATED" },
        if checks_ok { "ok" } else { "FAILED" },
    );
    if truncated > 0 {
        eprintln!("warning: spectrum reaches the outer radius in {truncated} ledger rows");
    }
    if common.strict && !(flags_ok && checks_ok) {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

fn cmd_verify(common: &CommonArgs, suite: Option<Suite>) -> Result<i32> {
    let (setup, seed) = load(common)?;
    let suite = suite.unwrap_or(setup.config.verify.suite);
    let report = run_suite(&setup, suite, seed)?;
    write_report(&common.out, &report)?;
    for rec in &report.records {
        let status = if rec.skipped {
            "SKIP"
        } else if rec.passed {
            "PASS"
        } else {
            "FAIL"
        };
        println!("{status} {:<22} worst={:e} bound={:e}", rec.name, rec.worst_ratio, rec.bound);
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

fn write_report(dir: &Path, report: &VerifyReport) -> Result<()> {
    let path = dir.join("report.json");
    let mut out = create(dir, "report.json")?;
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| Error::io(&path, e.into()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Error::io(&path, e))
}

fn cmd_eval(common: &CommonArgs, at_start: bool) -> Result<i32> {
    let (setup, seed) = load(common)?;
    let f = if at_start {
        setup.f0.clone()
    } else {
        evolve_with(&setup.solver, &setup.f0, &setup.run, &setup.envelope, |_, _| {})?.final_state
    };
    let res = match setup.solver.mode() {
        Mode::NearResonance => collision::evaluate(&f, &setup.params, &setup.table, 1.0)?,
        Mode::ExactResonance => collision::evaluate_exact(&f, &setup.params)?,
    };
    let path = common.out.join("eval.csv");
    let io = |e| Error::io(&path, e);
    let mut out = create(&common.out, "eval.csv")?;
    writeln!(out, "# {}", setup.header(seed)).map_err(io)?;
    writeln!(out, "r,f,gain,theta,q").map_err(io)?;
    for (i, r) in setup.grid.nodes().iter().enumerate() {
        writeln!(out, "{r},{},{},{},{}", f.values()[i], res.gain[i], res.theta[i], res.q[i]).map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(EXIT_OK)
}
