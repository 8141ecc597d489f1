//! Command-line front end: problem files, `solve`, `verify` and `example`.
//!
//! Exit codes: 0 success, 1 invalid input, 2 no unique crisp solution,
//! 3 verification tolerance exceeded.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::equation::LinearOde;
use crate::expr::Expr;
use crate::fbvp::{self, Condition, FbvpError, FuzzyBvp, SolutionBand};
use crate::fuzzy::FuzzyNumber;
use crate::grid::TimeGrid;
use crate::ode::{OdeError, DEFAULT_STEPS};
use crate::oracle::{self, EnvelopeReport, FdMesh, OracleError, DEFAULT_INTERIOR};

/// Significant digits for every number written by the CLI.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub const DEFAULT_POINTS: usize = 101;
pub const DEFAULT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Solve(#[from] FbvpError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("verification failed: max deviation {max_deviation:e} exceeds tolerance {tolerance:e}")]
    VerificationFailed { max_deviation: f64, tolerance: f64 },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(FbvpError::Ode(OdeError::NonUniqueCrispSolution { .. })) => 2,
            CliError::VerificationFailed { .. } => 3,
            _ => 1,
        }
    }

    fn schema(path: impl Into<String>, message: impl ToString) -> Self {
        CliError::Schema {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    pub order: usize,
    pub coeffs: Vec<String>,
    pub forcing: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub t0: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionSpec {
    pub t: f64,
    pub value: FuzzyNumber,
    /// Derivative order of the condition; only value conditions (0) are supported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub points: usize,
    pub alphas: Vec<f64>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            points: DEFAULT_POINTS,
            alphas: vec![0.0, 0.5, 1.0],
        }
    }
}

/// On-disk problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub equation: EquationSpec,
    pub interval: IntervalSpec,
    pub conditions: Vec<ConditionSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A validated problem plus its output settings.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProblem {
    pub problem: FuzzyBvp,
    pub output: OutputSpec,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::schema(path, e.into_inner())
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("problem file serialises");
        s.push('\n');
        s
    }

    /// Validates into a problem integrated with `steps` RK4 steps.
    pub fn to_problem(&self, steps: usize) -> Result<LoadedProblem, CliError> {
        let eq = &self.equation;
        if eq.order == 0 {
            return Err(CliError::schema("equation.order", "must be at least 1"));
        }
        if eq.coeffs.len() != eq.order {
            return Err(CliError::schema(
                "equation.coeffs",
                format!("order {} needs {} coefficients, got {}", eq.order, eq.order, eq.coeffs.len()),
            ));
        }
        let coeffs = eq
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, s)| Expr::parse(s).map_err(|e| CliError::schema(format!("equation.coeffs[{i}]"), e)))
            .collect::<Result<Vec<_>, _>>()?;
        let forcing = Expr::parse(&eq.forcing).map_err(|e| CliError::schema("equation.forcing", e))?;
        let ode = LinearOde::new(coeffs, forcing).map_err(|e| CliError::schema("equation", e))?;

        let IntervalSpec { t0, t_end } = self.interval;
        if !(t0.is_finite() && t_end.is_finite() && t0 < t_end) {
            return Err(CliError::schema("interval", format!("need t0 < T, got [{t0}, {t_end}]")));
        }
        if steps == 0 {
            return Err(CliError::Usage("--steps must be positive".into()));
        }
        let grid = TimeGrid::with_steps(t0, t_end, steps).map_err(|e| CliError::schema("interval", e))?;

        if self.conditions.len() != eq.order {
            return Err(CliError::schema(
                "conditions",
                format!(
                    "order-{} equation needs {} conditions, got {}",
                    eq.order,
                    eq.order,
                    self.conditions.len()
                ),
            ));
        }
        let mut conditions = Vec::with_capacity(self.conditions.len());
        for (j, c) in self.conditions.iter().enumerate() {
            if let Some(d) = c.derivative.filter(|&d| d != 0) {
                return Err(CliError::schema(
                    format!("conditions[{j}].derivative"),
                    format!("only value conditions are supported, got a derivative-{d} condition"),
                ));
            }
            if !(t0 <= c.t && c.t <= t_end) {
                return Err(CliError::schema(
                    format!("conditions[{j}].t"),
                    format!("{} lies outside [{t0}, {t_end}]", c.t),
                ));
            }
            if self.conditions[..j].iter().any(|o| o.t == c.t) {
                return Err(CliError::schema(
                    format!("conditions[{j}].t"),
                    format!("duplicate condition point {}", c.t),
                ));
            }
            conditions.push(Condition::new(c.t, c.value.clone()));
        }

        let out = &self.output;
        if out.points < 2 {
            return Err(CliError::schema("output.points", "must be at least 2"));
        }
        for (i, a) in out.alphas.iter().enumerate() {
            if !(0.0..=1.0).contains(a) {
                return Err(CliError::schema(format!("output.alphas[{i}]"), format!("{a} is outside [0, 1]")));
            }
        }
        let problem = FuzzyBvp::new(ode, conditions, grid)?;
        Ok(LoadedProblem {
            problem,
            output: out.clone(),
        })
    }
}

pub fn load_problem_with_steps(path: &Path, steps: usize) -> Result<LoadedProblem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ProblemFile::from_json(&text)?.to_problem(steps)
}

/// Reads and validates a problem file with the default integration resolution.
pub fn load_problem(path: &Path) -> Result<LoadedProblem, CliError> {
    load_problem_with_steps(path, DEFAULT_STEPS)
}

fn triangular(l: f64, m: f64, r: f64) -> FuzzyNumber {
    FuzzyNumber::triangular(l, m, r).expect("built-in numbers are ordered")
}

/// The two worked examples: `x″ − 3x′ + 2x = 4t − 6` on `[0, 1]` and
/// `x″ + 16x = 47 − 8t²` on `[0, 2]`.
pub fn builtin_example(which: u32) -> Result<ProblemFile, CliError> {
    let cond = |t, value| ConditionSpec {
        t,
        value,
        derivative: None,
    };
    match which {
        1 => Ok(ProblemFile {
            equation: EquationSpec {
                order: 2,
                coeffs: vec!["-3".into(), "2".into()],
                forcing: "4*t - 6".into(),
            },
            interval: IntervalSpec { t0: 0.0, t_end: 1.0 },
            conditions: vec![
                cond(0.0, triangular(1.5, 2.0, 3.0)),
                cond(1.0, triangular(2.0, 3.0, 4.0)),
            ],
            output: OutputSpec {
                points: 101,
                alphas: vec![0.0, 0.5, 1.0],
            },
        }),
        2 => Ok(ProblemFile {
            equation: EquationSpec {
                order: 2,
                coeffs: vec!["0".into(), "16".into()],
                forcing: "47 - 8*t^2".into(),
            },
            interval: IntervalSpec { t0: 0.0, t_end: 2.0 },
            conditions: vec![
                cond(0.0, triangular(2.0, 3.0, 3.5)),
                cond(2.0, triangular(0.5, 1.0, 1.5)),
            ],
            output: OutputSpec {
                points: 201,
                alphas: vec![0.0, 0.6, 1.0],
            },
        }),
        other => Err(CliError::Usage(format!("no built-in example {other}; choose 1 or 2"))),
    }
}

/// Rounds to [`SIGNIFICANT_DIGITS`] and prints the shortest decimal form.
pub fn format_number(x: f64) -> String {
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Rounds every float inside a JSON value.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round_sig(n.as_f64().expect("f64"))),
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn band_to_csv(band: &SolutionBand) -> String {
    let mut out = String::from("t");
    for a in band.alphas() {
        let label = format_number(*a);
        write!(out, ",lower_{label},upper_{label}").expect("write to string");
    }
    out.push('\n');
    for (k, t) in band.grid().nodes().enumerate() {
        out.push_str(&format_number(t));
        for iv in band.row(k) {
            write!(out, ",{},{}", format_number(iv.lo), format_number(iv.hi)).expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn band_to_json(band: &SolutionBand) -> String {
    let g = band.grid();
    let rows: Vec<Value> = g
        .nodes()
        .enumerate()
        .map(|(k, t)| {
            let cuts: Vec<Value> = band
                .row(k)
                .iter()
                .map(|iv| json!({"lower": iv.lo, "upper": iv.hi}))
                .collect();
            json!({"t": t, "cuts": cuts})
        })
        .collect();
    let doc = json!({
        "grid": {"t0": g.t0(), "T": g.t_end(), "points": g.num_points()},
        "alphas": band.alphas(),
        "rows": rows,
    });
    let mut s = serde_json::to_string_pretty(&round_json(doc)).expect("band serialises");
    s.push('\n');
    s
}

pub fn report_to_json(report: &EnvelopeReport) -> String {
    let doc = serde_json::to_value(report).expect("report serialises");
    let mut s = serde_json::to_string_pretty(&round_json(doc)).expect("report serialises");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "fuzzy-bvp",
    version,
    about = "Linear ODE boundary value problems with fuzzy boundary values",
    after_help = "Exit codes: 0 success, 1 invalid input, 2 crisp problem has no unique solution, \
                  3 verification tolerance exceeded"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a problem and write the alpha-cut band.
    Solve(SolveArgs),
    /// Compare the band with the finite-difference envelope.
    Verify(VerifyArgs),
    /// Print a built-in example problem (1 or 2) as JSON.
    Example { which: u32 },
}

#[derive(Debug, clap::Args)]
pub struct SolveArgs {
    pub problem: PathBuf,
    /// Comma-separated alpha levels (overrides the problem file).
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// Output points (overrides the problem file).
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// RK4 steps over the interval.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    pub problem: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Samples per axis of the boundary rectangle.
    #[arg(long, default_value_t = 2)]
    pub samples: usize,
    /// Interior finite-difference nodes.
    #[arg(long, default_value_t = DEFAULT_INTERIOR)]
    pub mesh: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    /// Report points (overrides the problem file).
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
}

fn emit(out: Option<&Path>, content: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => stdout.write_all(content.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn output_grid(problem: &FuzzyBvp, points: usize) -> Result<TimeGrid, CliError> {
    let g = problem.grid();
    TimeGrid::new(g.t0(), g.t_end(), points).map_err(|e| CliError::Usage(format!("--points: {e}")))
}

pub fn cmd_solve(args: &SolveArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load_problem_with_steps(&args.problem, args.steps)?;
    let alphas = args.alphas.clone().unwrap_or(loaded.output.alphas);
    let alphas = fbvp::normalize_alphas(&alphas)?;
    let grid = output_grid(&loaded.problem, args.points.unwrap_or(loaded.output.points))?;
    let solution = fbvp::solve(&loaded.problem)?;
    let band = solution.band_on(&grid, &alphas)?;
    let text = match args.format {
        Format::Csv => band_to_csv(&band),
        Format::Json => band_to_json(&band),
    };
    emit(args.out.as_deref(), &text, stdout)
}

/// Writes the report, then fails with exit code 3 if the tolerance is exceeded.
pub fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<EnvelopeReport, CliError> {
    let loaded = load_problem_with_steps(&args.problem, args.steps)?;
    let problem = &loaded.problem;
    if problem.ode().order() != 2 {
        return Err(OracleError::UnsupportedOrder(problem.ode().order()).into());
    }
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::Usage(format!("--alpha {} is outside [0, 1]", args.alpha)));
    }
    let grid = output_grid(problem, args.points.unwrap_or(loaded.output.points))?;
    let mesh = FdMesh::new(problem.grid().t0(), problem.grid().t_end(), args.mesh)?;
    let envelope = oracle::envelope_on(problem, &grid, args.alpha, args.samples, &mesh)?;
    let band = fbvp::solve(problem)?.band_on(&grid, &[args.alpha])?;
    let report = oracle::compare(&band, &envelope)?;
    emit(args.out.as_deref(), &report_to_json(&report), stdout)?;
    if report.max_deviation.is_nan() || report.max_deviation > args.tolerance {
        return Err(CliError::VerificationFailed {
            max_deviation: report.max_deviation,
            tolerance: args.tolerance,
        });
    }
    Ok(report)
}

pub fn cmd_example(which: u32, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = builtin_example(which)?;
    emit(None, &file.to_json(), stdout)
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve(args) => cmd_solve(args, stdout),
        Command::Verify(args) => cmd_verify(args, stdout).map(|_| ()),
        Command::Example { which } => cmd_example(*which, stdout),
    }
}
