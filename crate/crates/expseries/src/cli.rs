//! Subcommands: solve, verify, bounds, abel, export.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use expseries_core::bounds::residual_tail_estimate;
use expseries_core::combinatorics::{
    abel_lhs_i, abel_lhs_ii, abel_rhs_i, abel_rhs_ii, cor3_check, cor_i_closed, cor_i_sum, cor_ii_closed,
    cor_ii_sum,
};
use expseries_core::euler::{self, solve_euler, EulerError};
use expseries_core::fieldeval::{FieldError, FieldEvaluator, GridSpec, ResidualReport};
use expseries_core::lattice::MultiIndex;
use expseries_core::ns::{self, solve_ns, NsError};
use expseries_core::ring::Rational;
use expseries_core::table::{CoefficientTable, TableKind};
use num_bigint::BigInt;
use num_traits::Pow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{parse_grid, parse_times, ConfigFile, Problem};
use crate::error::CliError;
use crate::report::{self, Checks};
use crate::{eval, export, json, samples, tablefile};

/// Divergence threshold relative to the size of the terms it sums.
pub const DIVERGENCE_TOL: f64 = 1e-10;
/// Residual threshold for tables that solve the PDE exactly.
pub const CLOSED_RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Parser)]
#[command(name = "expseries", version, about = "Exact series solutions of 3D Euler and Navier-Stokes Cauchy problems")]
pub struct Cli {
    /// Worker threads for grid and mode evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a configured problem and write its coefficient table.
    Solve(SolveArgs),
    /// Check a table's identities and PDE residual on a grid.
    Verify(VerifyArgs),
    /// Compare an Euler table against its decay bounds.
    Bounds(BoundsArgs),
    /// Check the Abel identities and the sums derived from them.
    Abel(AbelArgs),
    /// Write sampled fields and residuals to CSV.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the truncation level of the config.
    #[arg(long)]
    pub levels: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// x1min:x1max:n1,x2min:x2max:n2,x3min:x3max:n3
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// tmin:tmax:nt
    #[arg(long = "t", allow_hyphen_values = true)]
    pub t: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-3)]
    pub fd_step: f64,
    /// Must match the table's epsilon when given.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub table: PathBuf,
    /// Must match the table's epsilon when given.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Sample times, `a,b,c` or `min:max:count`.
    #[arg(long = "t", default_value = "0,0.5,1,2")]
    pub t: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AbelArgs {
    #[arg(long, default_value_t = 40)]
    pub n_max: u64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub k_max: u64,
    #[arg(long, default_value_t = 6)]
    pub cor3_max: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub table: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// CSV destination.
    #[arg(long, alias = "csv")]
    pub out: PathBuf,
}

pub fn run<W: Write>(cli: Cli, out: &mut W) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Bounds(a) => cmd_bounds(&a, out),
        Command::Abel(a) => cmd_abel(&a, out),
        Command::Export(a) => cmd_export(&a, out),
    }
}

fn emit<W: Write>(out: &mut W, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::config(format!("stdout: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn euler_error(e: EulerError) -> CliError {
    match e {
        EulerError::DivergenceViolation(k) => {
            CliError::incompatible(format!("mode {k}: divergence constraint k·B_k = 0 fails"))
        }
        other => CliError::config(other.to_string()),
    }
}

fn ns_error(e: NsError) -> CliError {
    match e {
        NsError::CompatibilityViolation(k) => {
            CliError::incompatible(format!("mode {k}: compatibility constraint λ·A_k = 0 fails"))
        }
        NsError::NotSymbolic(k) => CliError::incompatible(format!(
            "mode {k}: zero-mode forcing with λ·B_0 ≠ 0 leaves the exact function class"
        )),
        other => CliError::config(other.to_string()),
    }
}

fn field_error(e: FieldError) -> CliError {
    CliError::config(format!("grid: {e}"))
}

fn kind_name(kind: TableKind) -> String {
    kind.to_string()
}

pub fn cmd_solve<W: Write>(args: &SolveArgs, out: &mut W) -> Result<(), CliError> {
    let cfg = ConfigFile::load(&args.config)?;
    let problem = cfg.problem(args.levels)?;
    let path = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.table.clone()))
        .ok_or_else(|| CliError::config("no output path: pass --out or set output.table"))?;
    let start = Instant::now();
    let table = match &problem {
        Problem::Euler(spec) => solve_euler(spec).map_err(euler_error)?,
        Problem::NavierStokes(spec) => solve_ns(spec).map_err(ns_error)?,
    };
    let elapsed = start.elapsed();
    tablefile::save(&table, &path)?;
    emit(
        out,
        &format!(
            "solved {}: modes={} nonzero={} max_level={} spec_hash={:016x} time_ms={} out={}\n",
            table.kind(),
            table.len(),
            table.nonzero_count(),
            table.max_level(),
            table.spec_hash(),
            elapsed.as_millis(),
            path.display()
        ),
    )
}

fn grid_for(args: &GridArgs, kind: TableKind) -> Result<GridSpec, CliError> {
    let (dx, dt) = match kind {
        TableKind::Euler => ("0:2:5,0:2:5,0:2:5", "0:2:5"),
        TableKind::NavierStokes => ("-1:1:5,-1:1:5,-1:1:5", "0:1:5"),
    };
    let x = args.grid.as_deref().unwrap_or(dx);
    let t = args.t.as_deref().unwrap_or(dt);
    let grid = parse_grid(x, t).map_err(|e| CliError::config(format!("grid: {e}")))?;
    grid.validate(kind).map_err(field_error)?;
    Ok(grid)
}

fn check_epsilon(flag: Option<&str>, table: &CoefficientTable) -> Result<(), CliError> {
    let Some(flag) = flag else {
        return Ok(());
    };
    let eps = json::parse_rational(flag).map_err(|e| CliError::config(format!("--epsilon: {e}")))?;
    match table.epsilon() {
        Some(own) if *own == eps => Ok(()),
        Some(own) => Err(CliError::config(format!("--epsilon {eps} does not match the table's {own}"))),
        None => Err(CliError::config("--epsilon applies to euler tables only")),
    }
}

/// First mode whose exact mode equation fails, if any.
fn first_ode_violation(table: &CoefficientTable) -> Result<Option<MultiIndex>, CliError> {
    match table.kind() {
        TableKind::Euler => {
            for (k, _) in table.iter().filter(|(k, _)| !k.is_zero()) {
                for axis in 0..3 {
                    let r = euler::ode_residual(axis, k, table).map_err(euler_error)?;
                    if !r.is_zero() {
                        return Ok(Some(*k));
                    }
                }
            }
            Ok(None)
        }
        TableKind::NavierStokes => {
            let spec = ns::spec_of_table_ns(table).ok_or_else(|| CliError::config("not a navier-stokes table"))?;
            for k in 1..=table.max_level() {
                for axis in 0..3 {
                    let r = ns::ode_residual_ns(axis, k, &spec, table).map_err(ns_error)?;
                    if !r.is_zero() {
                        return Ok(Some(MultiIndex::new(k, 0, 0)));
                    }
                }
            }
            Ok(None)
        }
    }
}

fn hash_matches(table: &CoefficientTable) -> bool {
    match table.kind() {
        TableKind::Euler => euler::spec_of_table(table).is_ok_and(|s| s.fingerprint() == table.spec_hash()),
        TableKind::NavierStokes => ns::spec_of_table_ns(table).is_some_and(|s| s.fingerprint() == table.spec_hash()),
    }
}

/// Exact identity checks, the sampled report and the rendered text.
pub fn verify_table(
    table: &CoefficientTable,
    grid: &GridSpec,
    h: f64,
) -> Result<(ResidualReport, Checks, String), CliError> {
    let mut checks = Checks::default();
    let div = table.first_divergence_violation();
    checks.push(
        match div {
            None => "exact divergence identity".to_string(),
            Some(k) => format!("exact divergence identity (fails at mode {k})"),
        },
        div.is_none(),
    );
    let ode = first_ode_violation(table)?;
    checks.push(
        match ode {
            None => "exact mode equations".to_string(),
            Some(k) => format!("exact mode equations (fail at mode {k})"),
        },
        ode.is_none(),
    );
    checks.push("spec hash matches initial data", hash_matches(table));

    let ev = FieldEvaluator::new(table);
    let samples = eval::sample_grid(&ev, grid, h).map_err(field_error)?;
    let mut report = ResidualReport::from_samples(&samples, table.max_level());
    report.grid = Some(*grid);
    let closed = match table.kind() {
        TableKind::Euler => euler::is_closed(table),
        TableKind::NavierStokes => true,
    };
    if let (Some(eps), Some(zero)) = (table.epsilon(), table.zero_mode()) {
        report.tail_estimate = residual_tail_estimate(table.max_level(), eps, zero).ok();
    }
    checks.push(
        format!("divergence <= {DIVERGENCE_TOL:e} x term size"),
        report.divergence_ok(DIVERGENCE_TOL),
    );
    if closed {
        checks.push(
            format!("closed-form residual <= {CLOSED_RESIDUAL_TOL:e}"),
            report.residual_ok(CLOSED_RESIDUAL_TOL),
        );
    }
    let text = report::residual(&kind_name(table.kind()), &report, closed, &checks);
    Ok((report, checks, text))
}

pub fn cmd_verify<W: Write>(args: &VerifyArgs, out: &mut W) -> Result<(), CliError> {
    let table = tablefile::load(&args.table)?;
    check_epsilon(args.epsilon.as_deref(), &table)?;
    let grid = grid_for(&args.grid, table.kind())?;
    if !(args.fd_step > 0.0 && args.fd_step.is_finite()) {
        return Err(CliError::config(format!("--fd-step: {} is not a positive step", args.fd_step)));
    }
    let (report, checks, text) = verify_table(&table, &grid, args.fd_step)?;
    emit(out, &text)?;
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    match checks.first_failure() {
        None => Ok(()),
        Some(name) => {
            let w = report.worst_residual();
            let d = report.max_divergence;
            Err(CliError::verification(format!(
                "{name}; worst divergence {:.3e} at x=({}, {}, {}) t={}; worst residual {:.3e} at x=({}, {}, {}) t={}",
                d.value, d.x[0], d.x[1], d.x[2], d.t, w.value, w.x[0], w.x[1], w.x[2], w.t
            )))
        }
    }
}

pub fn cmd_bounds<W: Write>(args: &BoundsArgs, out: &mut W) -> Result<(), CliError> {
    let table = tablefile::load(&args.table)?;
    if table.kind() != TableKind::Euler {
        return Err(CliError::config("bounds apply to euler tables only"));
    }
    check_epsilon(args.epsilon.as_deref(), &table)?;
    let eps = table.epsilon().cloned().expect("euler tables carry epsilon");
    let times = parse_times(&args.t).map_err(|e| CliError::config(format!("--t: {e}")))?;
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(CliError::config(format!("--t: sample time {t} must be finite and nonnegative")));
    }
    let report = eval::check_decay(&table, &eps, &times).map_err(|e| CliError::config(e.to_string()))?;
    let text = report::bounds(&report, &eps.to_string());
    emit(out, &text)?;
    if let Some(path) = &args.out {
        write_file(path, &text)?;
    }
    let failure = report.violations().next().map(|r| {
        CliError::verification(format!(
            "{} bound violated at mode {} t={}: margin {:.6e}",
            r.quantity, r.k, r.t, r.margin
        ))
    });
    failure.map_or(Ok(()), Err)
}

/// Outcome counts of the Abel checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbelSummary {
    pub identity_i: (usize, usize),
    pub identity_ii: (usize, usize),
    pub cor_i: (usize, usize),
    pub cor_ii: (usize, usize),
    pub cor3: (usize, usize),
}

impl AbelSummary {
    pub fn failures(&self) -> usize {
        self.identity_i.1 + self.identity_ii.1 + self.cor_i.1 + self.cor_ii.1 + self.cor3.1
    }
}

/// Runs every Abel check: both identities for `n = 1..=n_max` on `trials`
/// random pairs, both sums for `k = 1..=k_max`, and the product inequality
/// on the cube `1..=cor3_max`.
pub fn abel_checks(args: &AbelArgs) -> AbelSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let pairs: Vec<_> = (0..args.trials)
        .map(|_| samples::random_abel_pair(&mut rng, args.n_max))
        .collect();
    let counts = |results: Vec<bool>| (results.len(), results.iter().filter(|ok| !**ok).count());
    let ns: Vec<u64> = (1..=args.n_max).collect();
    let identity = |lhs: fn(&Rational, &Rational, u64) -> _, rhs: fn(&Rational, &Rational, u64) -> _| {
        let r: Vec<bool> = pairs
            .par_iter()
            .flat_map_iter(|(x, y)| ns.iter().map(move |&n| (x, y, n)))
            .map(|(x, y, n)| matches!((lhs(x, y, n), rhs(x, y, n)), (Ok(a), Ok(b)) if a == b))
            .collect();
        counts(r)
    };
    let identity_i = identity(abel_lhs_i, abel_rhs_i);
    let identity_ii = identity(abel_lhs_ii, abel_rhs_ii);
    let ks: Vec<u64> = (1..=args.k_max).collect();
    let cor_i = counts(
        ks.par_iter()
            .map(|&k| cor_i_sum(k).is_ok_and(|s| s == cor_i_closed(k)))
            .collect(),
    );
    let cor_ii = counts(
        ks.par_iter()
            .map(|&k| {
                let cap: BigInt = Pow::pow(BigInt::from(k + 1), k as u32) * 2;
                cor_ii_sum(k).is_ok_and(|s| s == cor_ii_closed(k) && s <= Rational::from_integer(cap))
            })
            .collect(),
    );
    let m = args.cor3_max;
    let cube: Vec<MultiIndex> = (1..=m)
        .flat_map(|a| (1..=m).flat_map(move |b| (1..=m).map(move |c| MultiIndex::new(a, b, c))))
        .collect();
    let cor3 = counts(
        cube.par_iter()
            .map(|k| cor3_check(k).is_ok_and(|c| c.holds))
            .collect(),
    );
    AbelSummary {
        identity_i,
        identity_ii,
        cor_i,
        cor_ii,
        cor3,
    }
}

pub fn cmd_abel<W: Write>(args: &AbelArgs, out: &mut W) -> Result<(), CliError> {
    let s = abel_checks(args);
    let line = |name: &str, (n, f): (usize, usize)| format!("{name}: {n} instances, {f} failures\n");
    let mut text = String::new();
    text += &line("abel_identity_i", s.identity_i);
    text += &line("abel_identity_ii", s.identity_ii);
    text += &line("cor_i_sum", s.cor_i);
    text += &line("cor_ii_sum", s.cor_ii);
    text += &line("cor3_inequality", s.cor3);
    emit(out, &text)?;
    match s.failures() {
        0 => Ok(()),
        f => Err(CliError::verification(format!("{f} abel checks failed"))),
    }
}

pub fn cmd_export<W: Write>(args: &ExportArgs, out: &mut W) -> Result<(), CliError> {
    let table = tablefile::load(&args.table)?;
    let grid = grid_for(&args.grid, table.kind())?;
    let ev = FieldEvaluator::new(&table);
    let samples = eval::sample_fields(&ev, &grid).map_err(field_error)?;
    let file = std::fs::File::create(&args.out)
        .map_err(|e| CliError::config(format!("{}: {e}", args.out.display())))?;
    export::write_csv(std::io::BufWriter::new(file), &samples)?;
    emit(out, &format!("exported {} rows to {}\n", samples.len(), args.out.display()))
}
