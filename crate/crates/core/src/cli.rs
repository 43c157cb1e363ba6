//! Command-line front end: `gen`, `run` and `compare`.
//!
//! Exit codes: 0 when every requested check passes, 2 when any check fails,
//! 1 for usage, input or I/O errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::certificates::{
    check_apg_potential, check_function_class, check_mapping_bound, check_norm_monotonicity,
    check_ovg, check_pgd_potential, check_refined_descent, rate_bounds, CheckReport,
};
use crate::error::{invalid, Result};
use crate::fixture::{
    attach_reference, fixture_paths, generate_with_reference, sibling_reference, Fixture,
    ProblemKind, ProblemSpec, ReferenceFile,
};
use crate::io::{bounds_table, compare_table, load_trace, trace_table, trace_to_json, RunReport};
use crate::problem::{prox_apply, CompositeProblem, Vector};
use crate::solvers::{
    apg_run_with, default_schedule, fgm_run_with, pgd_run_with, RunOptions, Schedule, SolverKind,
    Trace,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CHECK_FAILED: i32 = 2;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "PROXGRAD_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "proxgrad",
    version,
    about = "Proximal gradient solvers with inequality certificates"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a fixture and its reference optimum.
    Gen(GenArgs),
    /// Run a solver on a fixture and evaluate certificates.
    Run(RunArgs),
    /// Tabulate two traces on the same fixture side by side.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// JSON experiment config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<ProblemKind>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Samples for logistic kinds.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long = "L")]
    pub lip: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fixture name (default `<kind>-n<n>-s<seed>`).
    #[arg(long)]
    pub name: Option<String>,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    PgdPotential,
    ApgPotential,
    Rates,
    NormMonotone,
    RefinedDescent,
    Ovg,
    FunctionClass,
    UpperBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Problem JSON written by `gen`.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Reference JSON (default: next to the fixture).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    /// PGD step factor; the step is eta / L.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Iteration count.
    #[arg(long = "K")]
    pub iterations: Option<usize>,
    /// Schedule slope: b_k = beta (k+1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Schedule weight: a_k = alpha (k+1)^2 / L.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Stop once the mapping norm reaches this value.
    #[arg(long)]
    pub stop_tol: Option<f64>,
    /// Draw the start point from this seed instead of using the origin.
    #[arg(long)]
    pub x0_seed: Option<u64>,
    /// Comma-separated certificate names.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub check: Vec<CheckName>,
    #[arg(long, env = OUT_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverArg {
    Pgd,
    Fgm,
    Apg,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Pgd => SolverKind::Pgd,
            SolverArg::Fgm => SolverKind::Fgm,
            SolverArg::Apg => SolverKind::Apg,
        }
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub fixture: PathBuf,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// First trace JSON.
    #[arg(long)]
    pub a: PathBuf,
    /// Second trace JSON.
    #[arg(long)]
    pub b: PathBuf,
    /// Output CSV path (default `<out root>/compare.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Experiment config file. Every field is optional; flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub problem: ProblemConfig,
    pub name: Option<String>,
    pub fixture: Option<PathBuf>,
    pub reference: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverConfig,
    pub checks: Option<Vec<CheckName>>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub kind: Option<ProblemKind>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub mu: Option<f64>,
    #[serde(rename = "L")]
    pub lip: Option<f64>,
    pub lambda: Option<f64>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub kind: Option<SolverArg>,
    pub eta: Option<f64>,
    #[serde(rename = "K")]
    pub iterations: Option<usize>,
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub stop_tol: Option<f64>,
    pub x0_seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>) -> Result<ExperimentConfig> {
        match path {
            None => Ok(ExperimentConfig::default()),
            Some(p) => Ok(serde_json::from_str(&std::fs::read_to_string(p)?)?),
        }
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen(a) => cmd_gen(&a).map(|_| true),
        Command::Run(a) => cmd_run(&a).map(|r| r.passed),
        Command::Compare(a) => cmd_compare(&a).map(|_| true),
    }
}

fn out_root(flag: &Option<PathBuf>, cfg: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| cfg.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Writes `<name>.problem.json` and `<name>.reference.json`; returns their paths.
pub fn cmd_gen(a: &GenArgs) -> Result<(PathBuf, PathBuf)> {
    let cfg = ExperimentConfig::load(a.config.as_deref())?;
    let pc = &cfg.problem;
    let kind = a
        .kind
        .or(pc.kind)
        .ok_or_else(|| invalid("--kind is required"))?;
    let n = a.n.or(pc.n).ok_or_else(|| invalid("--n is required"))?;
    let mut spec = ProblemSpec::new(kind, n);
    spec.m = a.m.or(pc.m);
    if let Some(v) = a.mu.or(pc.mu) {
        spec.mu = v;
    }
    if let Some(v) = a.lip.or(pc.lip) {
        spec.lip = v;
    }
    if let Some(v) = a.lambda.or(pc.lambda) {
        spec.lambda = v;
    }
    if let Some(v) = a.lo.or(pc.lo) {
        spec.lo = v;
    }
    if let Some(v) = a.hi.or(pc.hi) {
        spec.hi = v;
    }
    if let Some(v) = a.seed.or(pc.seed) {
        spec.seed = v;
    }
    let name = a.name.clone().or(cfg.name.clone());
    let (fx, r) = generate_with_reference(&spec, name.as_deref())?;
    let dir = out_root(&a.out, &cfg.out);
    std::fs::create_dir_all(&dir)?;
    let (pp, rp) = fixture_paths(&dir, &fx.name);
    std::fs::write(&pp, fx.to_json()?)?;
    std::fs::write(&rp, r.to_json()?)?;
    println!("{}", pp.display());
    println!("{}", rp.display());
    Ok((pp, rp))
}

fn load_fixture(path: &Path, reference: Option<&Path>) -> Result<(Fixture, CompositeProblem)> {
    let fx = Fixture::load(path)?;
    let rp = reference.map_or_else(|| sibling_reference(path), Path::to_path_buf);
    let p = if rp.exists() {
        attach_reference(&fx, &ReferenceFile::load(&rp)?)?
    } else if reference.is_some() {
        return Err(invalid(format!("reference {} not found", rp.display())));
    } else {
        fx.problem()?
    };
    Ok((fx, p))
}

fn start_point(p: &CompositeProblem, seed: Option<u64>) -> Result<Vector> {
    let Some(seed) = seed else {
        return Ok(Vector::zeros(p.dim()));
    };
    let mut rng = crate::functions::seeded_rng(seed);
    let z = Vector::from_fn(p.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    if p.phi(&z).is_finite() {
        Ok(z)
    } else {
        // indicator terms: start from the projection
        prox_apply(p.g.as_ref(), &z, 1.0)
    }
}

/// Runs the configured solver and checks; writes traces, bound table and report.
pub fn cmd_run(a: &RunArgs) -> Result<RunReport> {
    let cfg = ExperimentConfig::load(a.config.as_deref())?;
    let sc = &cfg.solver;
    let fixture_path = a
        .fixture
        .clone()
        .or(cfg.fixture.clone())
        .ok_or_else(|| invalid("--fixture is required"))?;
    let reference = a.reference.clone().or(cfg.reference.clone());
    let (fx, p) = load_fixture(&fixture_path, reference.as_deref())?;
    let solver: SolverKind = a
        .solver
        .or(sc.kind)
        .ok_or_else(|| invalid("--solver is required"))?
        .into();
    let eta = a.eta.or(sc.eta).unwrap_or(1.0);
    let k_max = a.iterations.or(sc.iterations).unwrap_or(100);
    let opts = RunOptions {
        stop_tol: a.stop_tol.or(sc.stop_tol),
    };
    let sched = match (a.beta.or(sc.beta), a.alpha.or(sc.alpha)) {
        (None, None) => default_schedule(p.lip()),
        (beta, alpha) => {
            let d = default_schedule(p.lip());
            Schedule::polynomial(
                p.lip(),
                beta.unwrap_or(d.b(0)),
                alpha.unwrap_or(d.a(0) * p.lip()),
            )?
        }
    };
    let x0 = start_point(&p, a.x0_seed.or(sc.x0_seed))?;
    let trace = match solver {
        SolverKind::Pgd => pgd_run_with(&p, &x0, eta, k_max, opts)?,
        SolverKind::Apg => apg_run_with(&p, &x0, &sched, k_max, opts)?,
        SolverKind::Fgm => {
            if !p.g.is_zero() {
                return Err(invalid("fgm needs a fixture with g = 0"));
            }
            let mut tr = fgm_run_with(p.f.as_ref(), &x0, &sched, k_max, opts)?;
            tr.problem = p.label.clone();
            tr
        }
    };
    let checks = if a.check.is_empty() {
        cfg.checks.clone().unwrap_or_default()
    } else {
        a.check.clone()
    };
    let reports = checks
        .iter()
        .map(|&c| run_check(c, &trace, &p, &sched, eta))
        .collect::<Result<Vec<_>>>()?;

    let dir = out_root(&a.out, &cfg.out);
    std::fs::create_dir_all(&dir)?;
    let stem = format!("{}.{}", fx.name, solver.name());
    let format = a.format.or(cfg.format).unwrap_or(OutputFormat::Both);
    if matches!(format, OutputFormat::Csv | OutputFormat::Both) {
        trace_table(&trace).save_csv(&dir.join(format!("{stem}.trace.csv")))?;
        if p.reference().is_some() {
            bounds_table(&trace, &p)?.save_csv(&dir.join(format!("{stem}.bounds.csv")))?;
        }
    }
    if matches!(format, OutputFormat::Json | OutputFormat::Both) {
        std::fs::write(
            dir.join(format!("{stem}.trace.json")),
            trace_to_json(&trace)?,
        )?;
    }
    let report = RunReport::new(&fx.name, &trace, reports);
    std::fs::write(dir.join(format!("{stem}.report.json")), report.to_json()?)?;
    print!("{}", report.render());
    Ok(report)
}

fn per_iterate<F>(trace: &Trace, name: &str, mut f: F) -> Result<CheckReport>
where
    F: FnMut(&Vector) -> Result<CheckReport>,
{
    let reports = trace
        .records
        .iter()
        .map(|r| f(&r.x))
        .collect::<Result<Vec<_>>>()?;
    let mut merged = CheckReport::merge_all(reports).ok_or_else(|| invalid("empty trace"))?;
    merged.name = name.to_string();
    Ok(merged)
}

/// Evaluates one named certificate against a finished run. Pointwise checks
/// are evaluated at every iterate `x^k` with the run's step.
pub fn run_check(
    c: CheckName,
    trace: &Trace,
    p: &CompositeProblem,
    sched: &Schedule,
    eta: f64,
) -> Result<CheckReport> {
    let t = trace.step;
    match c {
        CheckName::PgdPotential => check_pgd_potential(trace, p, eta),
        CheckName::ApgPotential => check_apg_potential(trace, p, sched),
        CheckName::Rates => {
            let s = (trace.solver != SolverKind::Pgd).then_some(sched);
            rate_bounds(trace, p, s)
        }
        CheckName::NormMonotone => {
            per_iterate(trace, "norm-monotone", |x| check_norm_monotonicity(p, x, t))
        }
        CheckName::RefinedDescent => {
            per_iterate(trace, "refined-descent", |x| check_refined_descent(p, x, t))
        }
        CheckName::UpperBound => {
            per_iterate(trace, "upper-bound", |x| check_mapping_bound(p, x, t))
        }
        CheckName::Ovg => {
            let x_star = p.require_reference("ovg")?.x_star.clone();
            per_iterate(trace, "ovg", |y| check_ovg(p, &x_star, y, t))
        }
        CheckName::FunctionClass => {
            let mut pairs: Vec<(Vector, Vector)> = trace
                .records
                .windows(2)
                .map(|w| (w[0].x.clone(), w[1].x.clone()))
                .collect();
            if let Some(r) = p.reference() {
                pairs.extend(
                    trace
                        .records
                        .iter()
                        .map(|rec| (rec.x.clone(), r.x_star.clone())),
                );
            }
            check_function_class(p.f.as_ref(), &pairs)
        }
    }
}

/// Writes the comparison table; returns its path.
pub fn cmd_compare(a: &CompareArgs) -> Result<PathBuf> {
    let (_, p) = load_fixture(&a.fixture, a.reference.as_deref())?;
    let ta = load_trace(&a.a)?;
    let tb = load_trace(&a.b)?;
    let table = compare_table(&ta, &tb, &p)?;
    let path = match &a.out {
        Some(path) => path.clone(),
        None => {
            let dir = std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("."), PathBuf::from);
            std::fs::create_dir_all(&dir)?;
            dir.join("compare.csv")
        }
    };
    table.save_csv(&path)?;
    println!("{}", path.display());
    Ok(path)
}
