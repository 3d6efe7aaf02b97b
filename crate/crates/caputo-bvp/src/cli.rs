//! Command-line front end.
//!
//! Subcommands: `solve` (dump one solution), `study` (convergence table for
//! a problem file or built-in), `table1`/`table2` (the built-in test problem
//! tables with paper defaults), `verify` (monotonicity certificate).
//!
//! Exit codes: 0 success, 1 I/O or input errors, 2 admissibility validation
//! failure, 3 certificate failure. Data goes to stdout or `--output`;
//! diagnostics go to stderr.

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::discretize::{assemble, AssembleError};
use crate::harness::{self, ConvergenceTable, HarnessError, StudyMode};
use crate::linsolve::{solve_with, write_solution_csv, SolveError, Solver};
use crate::model::{self, FractionalBvp, LoadError};
use crate::monotone;

#[derive(Parser, Debug)]
#[command(
    name = "caputo-bvp",
    about = "Finite difference solver for two-point boundary value problems with a Caputo fractional derivative of order 1 < delta < 2",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for study commands (default: all cores)
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one problem and dump x, u (plus exact solution and error when known)
    Solve(SolveArgs),
    /// Convergence study over a delta/N grid
    Study(StudyArgs),
    /// Exact-error convergence table for built-in test problem 1
    Table1(TableArgs),
    /// Two-mesh convergence table for built-in test problem 2
    Table2(TableArgs),
    /// Check the monotonicity (M-matrix) certificate of the discretization
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    /// Pivoted LU (robust default)
    Lu,
    /// Forward recurrence; falls back to LU when its guards trip
    Forward,
}

impl From<SolverArg> for Solver {
    fn from(s: SolverArg) -> Solver {
        match s {
            SolverArg::Lu => Solver::Lu,
            SolverArg::Forward => Solver::Forward,
        }
    }
}

#[derive(Args, Debug)]
pub struct ProblemSource {
    /// Built-in problem name: tp1 or tp2
    pub name: Option<String>,

    /// Problem JSON file (alternative to a built-in name)
    #[arg(long, value_name = "PATH")]
    pub problem: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: ProblemSource,

    /// Fractional order delta in (1, 2); overrides the problem file's value
    #[arg(long)]
    pub delta: Option<f64>,

    /// Number of mesh cells
    #[arg(long = "N", default_value_t = 64)]
    pub n: usize,

    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    #[arg(long, value_enum, default_value_t = SolverArg::Lu)]
    pub solver: SolverArg,

    /// Override the Robin weight at x = 0
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Override the Robin weight at x = 1
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Override the boundary datum at x = 0
    #[arg(long)]
    pub gamma0: Option<f64>,
    /// Override the boundary datum at x = 1
    #[arg(long)]
    pub gamma1: Option<f64>,
}

#[derive(Args, Debug)]
pub struct StudyArgs {
    #[command(flatten)]
    pub source: ProblemSource,

    /// Comma-separated delta values
    #[arg(long, value_delimiter = ',', required = true)]
    pub deltas: Vec<f64>,

    /// Comma-separated mesh sizes, strictly doubling
    #[arg(long = "Ns", value_delimiter = ',', required = true)]
    pub ns: Vec<usize>,

    /// exact: measure against the exact solution; two-mesh: against the
    /// doubled mesh
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,

    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    #[arg(long, value_enum, default_value_t = SolverArg::Lu)]
    pub solver: SolverArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    #[value(name = "two-mesh")]
    TwoMesh,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// Comma-separated delta values (default: 1.1, 1.2, ..., 1.9)
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,

    /// Comma-separated mesh sizes (default: 64, 128, ..., 2048, with one
    /// internal doubling so that every displayed column has an order)
    #[arg(long = "Ns", value_delimiter = ',')]
    pub ns: Option<Vec<usize>>,

    #[arg(long)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,

    #[arg(long, value_enum, default_value_t = SolverArg::Lu)]
    pub solver: SolverArg,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: ProblemSource,

    #[arg(long)]
    pub delta: Option<f64>,

    #[arg(long = "N", default_value_t = 64)]
    pub n: usize,

    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(io::Error),
    Load(LoadError),
    Validation(String),
    Certificate(String),
    Solve(SolveError),
    Harness(HarnessError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Load(e) => write!(f, "{e}"),
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Certificate(m) => write!(f, "{m}"),
            CliError::Solve(e) => write!(f, "{e}"),
            CliError::Harness(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Certificate(_) => 3,
            _ => 1,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::Load(e)
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Solve(e)
    }
}

impl From<AssembleError> for CliError {
    fn from(e: AssembleError) -> Self {
        match e {
            AssembleError::Validation(report) => CliError::Validation(format!(
                "problem fails validation:\n{report}"
            )),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Assemble(a) => a.into(),
            HarnessError::Solve(s) => CliError::Solve(s),
            other => CliError::Usage(other.to_string()),
        }
    }
}

const DEFAULT_DELTAS: [f64; 9] = [1.1, 1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8, 1.9];
const DEFAULT_NS: [usize; 6] = [64, 128, 256, 512, 1024, 2048];

fn check_delta(delta: f64) -> Result<f64, CliError> {
    if 1.0 < delta && delta < 2.0 {
        Ok(delta)
    } else {
        Err(CliError::Validation(format!(
            "delta = {delta} must lie in (1, 2)"
        )))
    }
}

fn build_problem(source: &ProblemSource, delta: Option<f64>) -> Result<FractionalBvp, CliError> {
    match (&source.name, &source.problem) {
        (Some(name), None) => {
            let delta = check_delta(delta.ok_or_else(|| {
                CliError::Usage(format!("built-in problem {name} needs --delta"))
            })?)?;
            match name.as_str() {
                "tp1" => Ok(model::test_problem_1(delta)),
                "tp2" => Ok(model::test_problem_2(delta)),
                other => Err(CliError::Usage(format!(
                    "unknown built-in problem {other:?} (expected tp1 or tp2)"
                ))),
            }
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let spec: model::ProblemSpec =
                serde_json::from_str(&text).map_err(LoadError::Parse)?;
            let delta = check_delta(delta.unwrap_or(spec.delta))?;
            Ok(spec.resolve(delta)?)
        }
        _ => Err(CliError::Usage(
            "give exactly one problem source: a built-in name (tp1, tp2) or --problem <path>"
                .to_string(),
        )),
    }
}

fn builder_for(source: &ProblemSource) -> Result<Box<dyn Fn(f64) -> FractionalBvp + Sync>, CliError>
{
    match (&source.name, &source.problem) {
        (Some(name), None) => match name.as_str() {
            "tp1" => Ok(Box::new(model::test_problem_1)),
            "tp2" => Ok(Box::new(model::test_problem_2)),
            other => Err(CliError::Usage(format!(
                "unknown built-in problem {other:?} (expected tp1 or tp2)"
            ))),
        },
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            let spec: model::ProblemSpec =
                serde_json::from_str(&text).map_err(LoadError::Parse)?;
            // surface symbol errors once, up front; resolution later only
            // substitutes different delta values into the same symbols
            spec.resolve(spec.delta)?;
            Ok(Box::new(move |delta| {
                spec.resolve(delta).expect("symbols were checked at load")
            }))
        }
        _ => Err(CliError::Usage(
            "give exactly one problem source: a built-in name (tp1, tp2) or --problem <path>"
                .to_string(),
        )),
    }
}

fn open_output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn cmd_solve(args: &SolveArgs) -> Result<(), CliError> {
    let mut p = build_problem(&args.source, args.delta)?;
    if let Some(v) = args.alpha0 {
        p.alpha0 = v;
    }
    if let Some(v) = args.alpha1 {
        p.alpha1 = v;
    }
    if let Some(v) = args.gamma0 {
        p.gamma0 = v;
    }
    if let Some(v) = args.gamma1 {
        p.gamma1 = v;
    }
    let sys = assemble(&p, args.n)?;
    let sol = solve_with(&sys, args.solver.into())?;
    let mut out = open_output(&args.output)?;
    match args.format {
        OutputFormat::Csv => write_solution_csv(&mut out, &sol, p.exact.as_ref())?,
        OutputFormat::Json => {
            let xs: Vec<f64> = (0..=args.n).map(|j| sol.mesh.node(j)).collect();
            let mut doc = serde_json::json!({ "x": xs, "u_numeric": sol.values });
            if let Some(u) = &p.exact {
                let ue: Vec<f64> = xs.iter().map(|&x| u.eval(x)).collect();
                let err: Vec<f64> = ue
                    .iter()
                    .zip(sol.values.iter())
                    .map(|(e, v)| e - v)
                    .collect();
                doc["u_exact"] = serde_json::json!(ue);
                doc["error"] = serde_json::json!(err);
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
    }
    Ok(())
}

fn emit_table(
    table: &ConvergenceTable,
    output: &Option<PathBuf>,
    format: OutputFormat,
) -> Result<(), CliError> {
    let mut out = open_output(output)?;
    match format {
        OutputFormat::Csv => harness::write_table_csv(&mut out, table)?,
        OutputFormat::Json => writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(table).expect("json")
        )?,
    }
    Ok(())
}

fn cmd_study(args: &StudyArgs) -> Result<(), CliError> {
    for &d in &args.deltas {
        check_delta(d)?;
    }
    let builder = builder_for(&args.source)?;
    let mode = match args.mode {
        ModeArg::Exact => StudyMode::ExactError,
        ModeArg::TwoMesh => StudyMode::TwoMesh,
    };
    let table = harness::run_study(
        builder.as_ref(),
        &args.deltas,
        &args.ns,
        mode,
        args.solver.into(),
    )?;
    emit_table(&table, &args.output, args.format)
}

fn table_grids(args: &TableArgs) -> Result<(Vec<f64>, Vec<usize>, Option<Vec<usize>>), CliError> {
    let deltas = args.deltas.clone().unwrap_or_else(|| DEFAULT_DELTAS.to_vec());
    for &d in &deltas {
        check_delta(d)?;
    }
    match &args.ns {
        // default grid: extend one doubling so the last column has an order,
        // then trim the extension away for display
        None => {
            let mut ns = DEFAULT_NS.to_vec();
            ns.push(2 * DEFAULT_NS[DEFAULT_NS.len() - 1]);
            Ok((deltas, ns, Some(DEFAULT_NS.to_vec())))
        }
        Some(ns) => Ok((deltas, ns.clone(), None)),
    }
}

fn cmd_table(args: &TableArgs, mode: StudyMode) -> Result<(), CliError> {
    let (deltas, ns, trim) = table_grids(args)?;
    let builder: &(dyn Fn(f64) -> FractionalBvp + Sync) = match mode {
        StudyMode::ExactError => &model::test_problem_1,
        StudyMode::TwoMesh => &model::test_problem_2,
    };
    let table = harness::run_study(builder, &deltas, &ns, mode, args.solver.into())?;
    let table = match trim {
        Some(keep) => table.trim_to(&keep),
        None => table,
    };
    emit_table(&table, &args.output, args.format)
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    let p = build_problem(&args.source, args.delta)?;
    let sys = assemble(&p, args.n)?;
    let report = monotone::certify_system(&sys);
    let mut out = open_output(&args.output)?;
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&report).expect("json")
    )?;
    if report.m_matrix {
        Ok(())
    } else {
        Err(CliError::Certificate(
            "M-matrix certificate failed; see report".to_string(),
        ))
    }
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if let Some(jobs) = cli.jobs {
        // ignore failure: the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Study(args) => cmd_study(args),
        Command::Table1(args) => cmd_table(args, StudyMode::ExactError),
        Command::Table2(args) => cmd_table(args, StudyMode::TwoMesh),
        Command::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
