//! `fide` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 problem-definition error,
//! 3 solver failure (divergence or non-finite iterate), 4 I/O error.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fide_core::{
    builtin, builtin_names, convergence_study, estimate_kernel_norms, make_certificate, solve,
    ContractionCertificate, ConvergenceStudy, Error as CoreError, Grid, ProblemConfig, ProblemSpec,
    Quantity, SolveReport, StoppingRule,
};

#[derive(Debug, Parser)]
#[command(
    name = "fide",
    version,
    about = "Fourth-order functional integro-differential BVP solver"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem on one grid.
    Solve(SolveArgs),
    /// Solve on several grids and fit the convergence order.
    Study(StudyArgs),
    /// Compute the contraction factor from user-supplied Lipschitz constants.
    Certify(CertifyArgs),
    /// List the built-in problems.
    List,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ProblemSource {
    /// Built-in problem name.
    #[arg(long)]
    pub example: Option<String>,
    /// JSON problem definition.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CriterionArg {
    Successive,
    #[value(name = "exact-h2")]
    ExactH2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct RuleArgs {
    #[arg(long, value_enum, default_value = "successive")]
    pub criterion: CriterionArg,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long = "max-iter", default_value_t = 100)]
    pub max_iter: usize,
}

impl RuleArgs {
    fn rule(&self) -> StoppingRule {
        let rule = match self.criterion {
            CriterionArg::Successive => StoppingRule::successive(self.tol),
            CriterionArg::ExactH2 => StoppingRule::exact_h2(),
        };
        rule.with_max_iterations(self.max_iter)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Write the `x,u` plot data of the final iterate here.
    #[arg(long = "solution-out")]
    pub solution_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    #[arg(long = "n-list", value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[command(flatten)]
    pub rule: RuleArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: ProblemSource,
    /// Radius M of the ball for ψ.
    #[arg(long = "big-m")]
    pub big_m: f64,
    /// Lipschitz constants L0,L1,L2,L3 of f in u, y, v, z.
    #[arg(
        long = "l",
        value_delimiter = ',',
        num_args = 1,
        required = true,
        allow_hyphen_values = true
    )]
    pub l: Vec<f64>,
    /// Grid used to estimate the kernel norms K0, K1.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Problem(String),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Problem(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn io(path: Option<&Path>, err: io::Error) -> Self {
        match path {
            Some(p) => CliError::Io(format!("{}: {err}", p.display())),
            None => CliError::Io(err.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage error", m),
            CliError::Problem(m) => ("problem error", m),
            CliError::Solver(m) => ("solver error", m),
            CliError::Io(m) => ("i/o error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let msg = e.to_string();
        match e {
            CoreError::TooFewSubintervals(_) | CoreError::InvalidArgument(_) => {
                CliError::Usage(msg)
            }
            CoreError::UnknownProblem(_)
            | CoreError::Field { .. }
            | CoreError::BoundaryLength(_)
            | CoreError::Validation(_)
            | CoreError::Config(_)
            | CoreError::MissingExact
            | CoreError::OutsideUnitInterval { .. }
            | CoreError::NotContractive(_) => CliError::Problem(msg),
            CoreError::NonFinite {
                quantity: Quantity::Kernel0 | Quantity::Kernel1 | Quantity::Delay,
                ..
            } => CliError::Problem(msg),
            CoreError::NonFinite { .. }
            | CoreError::Divergence { .. }
            | CoreError::LengthMismatch { .. }
            | CoreError::NonFiniteEntry(_) => CliError::Solver(msg),
        }
    }
}

/// Scientific notation with six significant digits and at least a
/// two-digit exponent: `5.82917e-07`.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return "NaN".into();
    }
    let s = format!("{v:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

#[derive(Serialize)]
struct TableRow {
    #[serde(rename = "N")]
    n: usize,
    h2: f64,
    m: usize,
    error: f64,
}

#[derive(Serialize)]
struct TableJson<'a> {
    problem: &'a str,
    rows: Vec<TableRow>,
    fitted_order: Option<f64>,
    fit_residual: Option<f64>,
}

/// Writes a convergence table as CSV (`N,h2,m,error` plus a trailing
/// `# order=` comment) or JSON.
pub fn emit_table(
    study: &ConvergenceStudy,
    format: Format,
    sink: &mut dyn Write,
) -> Result<(), CliError> {
    if study.rows.is_empty() {
        return Err(CliError::Usage("cannot emit an empty study".into()));
    }
    let io = |e| CliError::io(None, e);
    match format {
        Format::Csv => {
            writeln!(sink, "N,h2,m,error").map_err(io)?;
            for r in &study.rows {
                writeln!(
                    sink,
                    "{},{},{},{}",
                    r.n,
                    sci(r.h2),
                    r.iterations,
                    sci(r.error)
                )
                .map_err(io)?;
            }
            match study.fitted_order() {
                Some(p) => writeln!(sink, "# order={}", sci(p)),
                None => writeln!(sink, "# order=n/a"),
            }
            .map_err(io)?;
        }
        Format::Json => {
            let doc = TableJson {
                problem: &study.problem,
                rows: study
                    .rows
                    .iter()
                    .map(|r| TableRow {
                        n: r.n,
                        h2: r.h2,
                        m: r.iterations,
                        error: r.error,
                    })
                    .collect(),
                fitted_order: study.fit.map(|f| f.order),
                fit_residual: study.fit.map(|f| f.residual),
            };
            write_json(sink, &doc)?;
        }
    }
    Ok(())
}

/// Writes `x,u` for every grid node.
pub fn emit_solution(
    report: &SolveReport,
    grid: &Grid,
    sink: &mut dyn Write,
) -> Result<(), CliError> {
    let io = |e| CliError::io(None, e);
    writeln!(sink, "x,u").map_err(io)?;
    for (x, u) in grid.nodes().iter().zip(report.u.values()) {
        writeln!(sink, "{},{}", sci(*x), sci(*u)).map_err(io)?;
    }
    Ok(())
}

fn emit_report(report: &SolveReport, format: Format, sink: &mut dyn Write) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(sink, report),
        Format::Csv => {
            let io = |e| CliError::io(None, e);
            writeln!(sink, "N,h2,m,error,stop_reason,min_u,max_u").map_err(io)?;
            let stop = match report.stop_reason {
                fide_core::StopReason::CriterionMet => "criterion-met",
                fide_core::StopReason::MaxIterations => "max-iterations",
            };
            writeln!(
                sink,
                "{},{},{},{},{stop},{},{}",
                report.n,
                sci(report.h * report.h),
                report.iterations,
                report.error_vs_exact.map(sci).unwrap_or_default(),
                sci(report.min_value),
                sci(report.max_value)
            )
            .map_err(io)
        }
    }
}

fn emit_certificate(
    cert: &ContractionCertificate,
    format: Format,
    sink: &mut dyn Write,
) -> Result<(), CliError> {
    match format {
        Format::Json => write_json(sink, cert),
        Format::Csv => {
            let io = |e| CliError::io(None, e);
            writeln!(sink, "M,L0,L1,L2,L3,K0,K1,M0,q,contractive,domain_bound").map_err(io)?;
            let l = cert.lipschitz.map(sci);
            writeln!(
                sink,
                "{},{},{},{},{},{},{},{},{},{},{}",
                sci(cert.big_m),
                l[0],
                l[1],
                l[2],
                l[3],
                sci(cert.k0),
                sci(cert.k1),
                sci(cert.m0),
                sci(cert.q),
                cert.contractive,
                sci(cert.domain_bound)
            )
            .map_err(io)
        }
    }
}

fn write_json<T: Serialize>(sink: &mut dyn Write, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(sink, "{text}").map_err(|e| CliError::io(None, e))
}

fn load_problem(source: &ProblemSource) -> Result<ProblemSpec, CliError> {
    match (&source.example, &source.config) {
        (Some(name), _) => Ok(builtin(name)?),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(Some(path), e))?;
            let doc = ProblemConfig::from_json(&text)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "config".into());
            Ok(ProblemSpec::from_config(&doc)?.with_name(name))
        }
        (None, None) => Err(CliError::Usage(
            "one of --example or --config is required".into(),
        )),
    }
}

fn with_sink<F>(path: Option<&Path>, stdout: &mut dyn Write, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match path {
        None => body(stdout),
        Some(p) => {
            let file = File::create(p).map_err(|e| CliError::io(Some(p), e))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(|e| CliError::io(Some(p), e))
        }
    }
}

pub fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::List => {
            for name in builtin_names() {
                writeln!(stdout, "{name}").map_err(|e| CliError::io(None, e))?;
            }
            Ok(())
        }
        Command::Solve(args) => {
            let spec = load_problem(&args.source)?;
            let grid = Grid::new(args.n)?;
            let report = solve(&spec, &grid, &args.rule.rule())?;
            with_sink(args.output.out.as_deref(), stdout, |w| {
                emit_report(&report, args.output.format, w)
            })?;
            if let Some(path) = &args.solution_out {
                with_sink(Some(path), stdout, |w| emit_solution(&report, &grid, w))?;
            }
            Ok(())
        }
        Command::Study(args) => {
            if args.n_list.len() < 3 {
                return Err(CliError::Usage(format!(
                    "--n-list needs at least 3 grid sizes, got {}",
                    args.n_list.len()
                )));
            }
            let spec = load_problem(&args.source)?;
            let study = convergence_study(&spec, &args.n_list, &args.rule.rule())?;
            with_sink(args.output.out.as_deref(), stdout, |w| {
                emit_table(&study, args.output.format, w)
            })
        }
        Command::Certify(args) => {
            let l: [f64; 4] = args.l.as_slice().try_into().map_err(|_| {
                CliError::Usage(format!("--l needs exactly 4 values, got {}", args.l.len()))
            })?;
            let spec = load_problem(&args.source)?;
            let (k0, k1) = estimate_kernel_norms(&spec, &Grid::new(args.n)?)?;
            let cert = make_certificate(args.big_m, l, k0, k1)?;
            with_sink(args.output.out.as_deref(), stdout, |w| {
                emit_certificate(&cert, args.output.format, w)
            })
        }
    }
}

/// Parses `argv` (including the program name) and runs it, returning the
/// process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "fide: {e}");
            e.exit_code()
        }
    }
}
