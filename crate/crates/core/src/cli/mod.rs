//! The `qsw` command-line tool.
//!
//! Exit codes: 0 success, 1 audit failure, 2 bad input or configuration,
//! 3 solver failure.

pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{Method, PropagationConfig};
use crate::operators::{audit_axioms, AmplitudeConvention, GlobalOperatorForm, TensorElement};
use crate::oracles::{crw_line_analytic, line_spec, qw_line_analytic, total_variation, variance};
use crate::scenario::{
    build_walk, parse_jump_operators, run_grid, GraphSource, GridSpec, LoadedGraph, PointResult, WalkOptions,
    WalkRegime,
};

use output::{format_f64, to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qsw", version, about = "Quantum stochastic walks on graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Propagate a walker and report site populations.
    Simulate(WalkArgs),
    /// Like simulate, over a grid of omega and/or t values.
    Sweep(WalkArgs),
    /// Check the transition tensor against the axiom table and graph sparsity.
    Audit(AuditArgs),
    /// Distance of a line walk from the analytic classical and quantum walks.
    Compare(WalkArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AmplitudeArg {
    Sqrt,
    Literal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GlobalArg {
    Full,
    Offdiagonal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    #[value(alias = "expm")]
    MatrixExponential,
    #[value(alias = "rk")]
    AdaptiveRk,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// `line:<n>[:<gamma>]` or an edge-list file.
    #[arg(long, default_value = "line:61:1")]
    graph: GraphSource,
    /// crw, qw, qsw-global or qsw-custom.
    #[arg(long, default_value = "crw")]
    regime: WalkRegime,
    #[arg(long, value_enum, default_value = "sqrt")]
    amplitude_convention: AmplitudeArg,
    #[arg(long = "global-l", value_enum, default_value = "full")]
    global_l: GlobalArg,
    /// Jump-operator file for qsw-custom.
    #[arg(long)]
    jump_ops: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WalkArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Interpolation weight, or `start:stop:count` (default: 0 for qw, else 1).
    #[arg(long)]
    omega: Option<GridSpec>,
    /// Evolution time, or `start:stop:count`.
    #[arg(long, default_value = "5")]
    t: GridSpec,
    /// Starting vertex; a signed position on line graphs (default 0, the centre).
    #[arg(long, allow_negative_numbers = true)]
    origin: Option<i64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads for grid points (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    #[arg(long, default_value_t = 1e-9)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    #[arg(long)]
    max_step: Option<f64>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// How many connectivity violations to list in full.
    #[arg(long, default_value_t = 20)]
    max_listed: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::ToleranceNotMet(_) | Error::StateInvariantViolated { .. } => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    }
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => walk(a, "simulate", false),
        Command::Sweep(a) => walk(a, "sweep", true),
        Command::Compare(a) => compare(a),
        Command::Audit(a) => audit(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qsw: {e}");
            exit_code(&e)
        }
    }
}

struct Prepared {
    graph: LoadedGraph,
    options: WalkOptions,
}

impl ScenarioArgs {
    fn prepare(&self) -> Result<Prepared> {
        let graph = LoadedGraph::load(&self.graph)?;
        let custom_operators = match &self.jump_ops {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse { line: 0, message: format!("{}: {e}", path.display()) })?;
                Some(parse_jump_operators(&text, graph.graph.n_vertices())?)
            }
            None => None,
        };
        let options = WalkOptions {
            amplitude: match self.amplitude_convention {
                AmplitudeArg::Sqrt => AmplitudeConvention::Sqrt,
                AmplitudeArg::Literal => AmplitudeConvention::Literal,
            },
            global_form: match self.global_l {
                GlobalArg::Full => GlobalOperatorForm::Full,
                GlobalArg::Offdiagonal => GlobalOperatorForm::OffDiagonal,
            },
            custom_operators,
        };
        Ok(Prepared { graph, options })
    }
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    command: &'static str,
    graph: String,
    n_vertices: usize,
    regime: WalkRegime,
    amplitude_convention: AmplitudeConvention,
    global_l: GlobalOperatorForm,
    jump_ops: Option<String>,
    omega: Vec<f64>,
    t: Vec<f64>,
    origin: i64,
    origin_index: usize,
    method: Method,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    positions: Vec<i64>,
}

struct Grid {
    echo: ConfigEcho,
    results: Vec<PointResult>,
}

fn run_walk(a: &WalkArgs, command: &'static str, prepared: &Prepared) -> Result<Grid> {
    let regime = a.scenario.regime;
    let omega = a.omega.clone().unwrap_or_else(|| GridSpec::single(regime.default_omega()));
    if let Some(bad) = omega.values.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::OmegaOutOfRange(*bad));
    }
    if let Some(bad) = a.t.values.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::InvalidConfig(format!("time must be finite and non-negative, got {bad}")));
    }
    let method = match a.method {
        MethodArg::Auto => Method::Auto,
        MethodArg::MatrixExponential => Method::MatrixExponential,
        MethodArg::AdaptiveRk => Method::AdaptiveRk,
    };
    let cfg = PropagationConfig {
        method,
        rel_tol: a.rel_tol,
        abs_tol: a.abs_tol,
        max_step: a.max_step.unwrap_or(f64::INFINITY),
        ..PropagationConfig::default()
    };
    let graph = &prepared.graph;
    let origin = a.origin.unwrap_or_else(|| graph.default_origin());
    let origin_index = graph.origin_index(origin)?;
    let (h, ls) = build_walk(&graph.graph, regime, &prepared.options)?;
    let results = run_grid(&h, &ls, origin_index, &omega.values, &a.t.values, &cfg, a.jobs)?;
    let echo = ConfigEcho {
        command,
        graph: a.scenario.graph.to_string(),
        n_vertices: graph.graph.n_vertices(),
        regime,
        amplitude_convention: prepared.options.amplitude,
        global_l: prepared.options.global_form,
        jump_ops: a.scenario.jump_ops.as_ref().map(|p| p.display().to_string()),
        omega: omega.values,
        t: a.t.values.clone(),
        origin,
        origin_index,
        method,
        rel_tol: cfg.rel_tol,
        abs_tol: cfg.abs_tol,
        max_step: cfg.max_step,
        positions: graph.position_labels(),
    };
    Ok(Grid { echo, results })
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    let written = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    written.map_err(|e| Error::InvalidConfig(format!("cannot write output: {e}")))
}

#[derive(Serialize)]
struct Validation {
    trace_drift: f64,
    hermiticity: f64,
    min_eigenvalue: f64,
    populations_clamped: bool,
    method: Method,
    solver_steps: usize,
}

#[derive(Serialize)]
struct WalkPoint<'a> {
    omega: f64,
    t: f64,
    populations: &'a [f64],
    coherence_l1: f64,
    validation: Validation,
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    config_echo: &'a ConfigEcho,
    results: Vec<R>,
    version: &'static str,
}

fn walk(a: WalkArgs, command: &'static str, require_sweep: bool) -> Result<i32> {
    if require_sweep && !(a.omega.as_ref().is_some_and(|o| o.is_sweep) || a.t.is_sweep) {
        return Err(Error::InvalidConfig("sweep needs --omega or --t given as start:stop:count".into()));
    }
    let prepared = a.scenario.prepare()?;
    let grid = run_walk(&a, command, &prepared)?;
    let text = match a.format {
        Format::Json => {
            let results = grid
                .results
                .iter()
                .map(|r| WalkPoint {
                    omega: r.omega,
                    t: r.t,
                    populations: &r.populations,
                    coherence_l1: r.coherence_l1,
                    validation: Validation {
                        trace_drift: r.diagnostics.trace_drift,
                        hermiticity: r.diagnostics.hermiticity,
                        min_eigenvalue: r.diagnostics.min_eigenvalue,
                        populations_clamped: r.populations_clamped,
                        method: r.method,
                        solver_steps: r.solver_steps,
                    },
                })
                .collect();
            to_json(&Document { config_echo: &grid.echo, results, version: env!("CARGO_PKG_VERSION") })
        }
        Format::Csv => {
            let mut out = String::from("omega,t,position,population\n");
            for r in &grid.results {
                for (pos, p) in grid.echo.positions.iter().zip(&r.populations) {
                    out.push_str(&format!("{},{},{pos},{}\n", format_f64(r.omega), format_f64(r.t), format_f64(*p)));
                }
            }
            out
        }
    };
    emit(a.output.as_ref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ComparePoint {
    omega: f64,
    t: f64,
    tv_crw: f64,
    tv_qw: f64,
    variance: f64,
    variance_crw: f64,
    variance_qw: f64,
    tail_mass_crw: f64,
    tail_mass_qw: f64,
}

fn compare(a: WalkArgs) -> Result<i32> {
    let prepared = a.scenario.prepare()?;
    let line = prepared.graph.line.clone().ok_or(Error::NonLineGraph)?;
    let grid = run_walk(&a, "compare", &prepared)?;
    let positions = &grid.echo.positions;
    let mut points = Vec::with_capacity(grid.results.len());
    for r in &grid.results {
        let spec = line_spec(&line, r.t)?;
        let crw = crw_line_analytic(&spec);
        let qw = qw_line_analytic(&spec);
        points.push(ComparePoint {
            omega: r.omega,
            t: r.t,
            tv_crw: total_variation(&r.populations, &crw.probabilities)?,
            tv_qw: total_variation(&r.populations, &qw.probabilities)?,
            variance: variance(positions, &r.populations),
            variance_crw: crw.variance(),
            variance_qw: qw.variance(),
            tail_mass_crw: crw.tail_mass,
            tail_mass_qw: qw.tail_mass,
        });
    }
    let text = match a.format {
        Format::Json => to_json(&Document { config_echo: &grid.echo, results: points, version: env!("CARGO_PKG_VERSION") }),
        Format::Csv => {
            let mut out = String::from("omega,t,tv_crw,tv_qw,variance,variance_crw,variance_qw\n");
            for p in &points {
                let row = [p.omega, p.t, p.tv_crw, p.tv_qw, p.variance, p.variance_crw, p.variance_qw];
                out.push_str(&row.iter().map(|v| format_f64(*v)).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
    };
    emit(a.output.as_ref(), &text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct AuditDocument<'a> {
    graph: String,
    regime: WalkRegime,
    report: serde_json::Value,
    connectivity_violation_count: usize,
    listed_violations: &'a [TensorElement],
    version: &'static str,
}

fn audit(a: AuditArgs) -> Result<i32> {
    let prepared = a.scenario.prepare()?;
    let (h, ls) = build_walk(&prepared.graph.graph, a.scenario.regime, &prepared.options)?;
    let report = audit_axioms(&h, &ls, &prepared.graph.graph, a.tol)?;
    let mut value = serde_json::to_value(&report).expect("audit report serialises");
    if let Some(obj) = value.as_object_mut() {
        obj.remove("connectivity_violations");
    }
    let listed = &report.connectivity_violations[..report.connectivity_violations.len().min(a.max_listed)];
    let doc = AuditDocument {
        graph: a.scenario.graph.to_string(),
        regime: a.scenario.regime,
        report: value,
        connectivity_violation_count: report.connectivity_violations.len(),
        listed_violations: listed,
        version: env!("CARGO_PKG_VERSION"),
    };
    emit(a.output.as_ref(), &to_json(&doc))?;
    eprintln!("{report}");
    Ok(if report.passed { EXIT_OK } else { EXIT_AUDIT_FAILED })
}
