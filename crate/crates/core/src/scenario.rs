//! Walk scenarios: where the graph comes from, which jump operators to use,
//! and evaluation over a grid of `(omega, t)` points.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::{
    build_liouvillian, coherence_l1, populations, propagate, DensityMatrix, Method, PropagationConfig, StateDiagnostics,
};
use crate::graph::{build_line, classical_generator, parse_edge_list, Graph, LineGraph};
use crate::linalg::C64;
use crate::operators::{
    edge_jump_operators, empty_jump_operators, global_jump_operator, hamiltonian_from_generator, AmplitudeConvention,
    GlobalOperatorForm, Hamiltonian, JumpOperatorSet,
};

/// `line:<n_sites>[:<gamma>]` or a path to an edge-list file.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Line { n_sites: usize, gamma: f64 },
    EdgeList(PathBuf),
}

impl FromStr for GraphSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let Some(rest) = s.strip_prefix("line:") else {
            return Ok(GraphSource::EdgeList(PathBuf::from(s)));
        };
        let mut parts = rest.split(':');
        let n_sites = parts
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|e| format!("bad line length in `{s}`: {e}"))?;
        let gamma = match parts.next() {
            Some(g) => g.parse().map_err(|e| format!("bad rate in `{s}`: {e}"))?,
            None => 1.0,
        };
        if parts.next().is_some() {
            return Err(format!("expected `line:<n>[:<gamma>]`, got `{s}`"));
        }
        Ok(GraphSource::Line { n_sites, gamma })
    }
}

impl fmt::Display for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::Line { n_sites, gamma } => write!(f, "line:{n_sites}:{gamma}"),
            GraphSource::EdgeList(p) => write!(f, "{}", p.display()),
        }
    }
}

/// A graph plus its line structure when it has one.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub line: Option<LineGraph>,
}

impl LoadedGraph {
    pub fn load(source: &GraphSource) -> Result<Self> {
        match source {
            GraphSource::Line { n_sites, gamma } => {
                let line = build_line(*n_sites, *gamma)?;
                Ok(Self { graph: line.graph().clone(), line: Some(line) })
            }
            GraphSource::EdgeList(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Parse { line: 0, message: format!("{}: {e}", path.display()) })?;
                Ok(Self::from_graph(parse_edge_list(&text)?))
            }
        }
    }

    pub fn from_graph(graph: Graph) -> Self {
        let line = LineGraph::detect(&graph);
        Self { graph, line }
    }

    /// Storage index of the walker origin: a signed position on line graphs,
    /// a vertex index otherwise.
    pub fn origin_index(&self, origin: i64) -> Result<usize> {
        let n = self.graph.n_vertices();
        let index = match &self.line {
            Some(line) => line.index(origin),
            None => usize::try_from(origin).ok().filter(|&i| i < n),
        };
        index.ok_or(Error::IndexOutOfRange { index: origin.unsigned_abs() as usize, n_vertices: n })
    }

    /// Labels for the populations in storage order.
    pub fn position_labels(&self) -> Vec<i64> {
        match &self.line {
            Some(line) => line.positions(),
            None => (0..self.graph.n_vertices() as i64).collect(),
        }
    }

    pub fn default_origin(&self) -> i64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WalkRegime {
    /// Edge-local jump operators; classical walk at `omega = 1`.
    Crw,
    /// No jump operators.
    Qw,
    /// One jump operator built from the whole generator.
    QswGlobal,
    /// Jump operators read from a file.
    QswCustom,
}

impl WalkRegime {
    /// Interpolation weight used when none is given.
    pub fn default_omega(self) -> f64 {
        match self {
            WalkRegime::Qw => 0.0,
            _ => 1.0,
        }
    }
}

impl FromStr for WalkRegime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "crw" => Ok(WalkRegime::Crw),
            "qw" => Ok(WalkRegime::Qw),
            "qsw-global" => Ok(WalkRegime::QswGlobal),
            "qsw-custom" => Ok(WalkRegime::QswCustom),
            _ => Err(format!("unknown regime `{s}` (expected crw, qw, qsw-global or qsw-custom)")),
        }
    }
}

impl fmt::Display for WalkRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WalkRegime::Crw => "crw",
            WalkRegime::Qw => "qw",
            WalkRegime::QswGlobal => "qsw-global",
            WalkRegime::QswCustom => "qsw-custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WalkOptions {
    pub amplitude: AmplitudeConvention,
    pub global_form: GlobalOperatorForm,
    /// Required by [`WalkRegime::QswCustom`].
    pub custom_operators: Option<JumpOperatorSet>,
}

/// Hamiltonian and jump operators for a regime on a graph.
pub fn build_walk(graph: &Graph, regime: WalkRegime, opts: &WalkOptions) -> Result<(Hamiltonian, JumpOperatorSet)> {
    let m = classical_generator(graph);
    let h = hamiltonian_from_generator(&m)?;
    let ls = match regime {
        WalkRegime::Crw => edge_jump_operators(&m, opts.amplitude),
        WalkRegime::Qw => empty_jump_operators(m.dim())?,
        WalkRegime::QswGlobal => global_jump_operator(&m, opts.global_form),
        WalkRegime::QswCustom => {
            let ops = opts
                .custom_operators
                .clone()
                .ok_or_else(|| Error::InvalidConfig("qsw-custom needs a jump-operator file".into()))?;
            if ops.dim() != m.dim() {
                return Err(Error::DimensionMismatch { expected: m.dim(), found: ops.dim() });
            }
            ops
        }
    };
    Ok((h, ls))
}

/// Parses a jump-operator file: each `operator` line starts a new operator,
/// followed by `row col re [im]` entries.
///
/// ```text
/// operator
/// 1 0 1.0
/// operator
/// 0 1 0.5 0.5
/// ```
pub fn parse_jump_operators(text: &str, dim: usize) -> Result<JumpOperatorSet> {
    let mut operators: Vec<DMatrix<C64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno + 1, message };
        if line == "operator" {
            operators.push(DMatrix::zeros(dim, dim));
            continue;
        }
        let current = operators.last_mut().ok_or_else(|| err("entry before first `operator` line".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (r, c, re, im) = match fields[..] {
            [r, c, re] => (r, c, re, "0"),
            [r, c, re, im] => (r, c, re, im),
            _ => return Err(err(format!("expected `row col re [im]`, got `{line}`"))),
        };
        let r: usize = r.parse().map_err(|e| err(format!("bad row: {e}")))?;
        let c: usize = c.parse().map_err(|e| err(format!("bad column: {e}")))?;
        let re: f64 = re.parse().map_err(|e| err(format!("bad real part: {e}")))?;
        let im: f64 = im.parse().map_err(|e| err(format!("bad imaginary part: {e}")))?;
        if r >= dim || c >= dim {
            return Err(err(format!("entry ({r}, {c}) outside {dim}x{dim}")));
        }
        current[(r, c)] += C64::new(re, im);
    }
    JumpOperatorSet::custom(dim, operators)
}

/// A single value or an inclusive `start:stop:count` range.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub values: Vec<f64>,
    pub is_sweep: bool,
}

impl GridSpec {
    pub fn single(value: f64) -> Self {
        Self { values: vec![value], is_sweep: false }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number `{p}` in `{s}`: {e}"));
        match parts[..] {
            [v] => Ok(GridSpec::single(num(v)?)),
            [start, stop, count] => {
                let (start, stop) = (num(start)?, num(stop)?);
                let count: usize = count.trim().parse().map_err(|e| format!("bad count in `{s}`: {e}"))?;
                if count < 2 {
                    return Err(format!("sweep `{s}` needs a count of at least 2"));
                }
                let values = (0..count)
                    .map(|i| if i == count - 1 { stop } else { start + (stop - start) * i as f64 / (count - 1) as f64 })
                    .collect();
                Ok(GridSpec { values, is_sweep: true })
            }
            _ => Err(format!("expected a number or `start:stop:count`, got `{s}`")),
        }
    }
}

/// Outcome at one `(omega, t)` grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub omega: f64,
    pub t: f64,
    pub populations: Vec<f64>,
    pub populations_clamped: bool,
    pub coherence_l1: f64,
    pub diagnostics: StateDiagnostics,
    pub method: Method,
    pub solver_steps: usize,
}

/// Propagates `|origin><origin|` to every `(omega, t)` pair, omega-major.
/// Points run on up to `jobs` threads (0 = rayon default); result order
/// never depends on scheduling.
pub fn run_grid(
    h: &Hamiltonian,
    ls: &JumpOperatorSet,
    origin: usize,
    omegas: &[f64],
    times: &[f64],
    cfg: &PropagationConfig,
    jobs: usize,
) -> Result<Vec<PointResult>> {
    let rho0 = DensityMatrix::basis(h.dim(), origin)?;
    let points: Vec<(f64, f64)> = omegas.iter().flat_map(|&w| times.iter().map(move |&t| (w, t))).collect();
    let run_point = |&(omega, t): &(f64, f64)| -> Result<PointResult> {
        let liouvillian = build_liouvillian(h, ls, omega)?;
        let out = propagate(&rho0, &liouvillian, t, cfg)?;
        let pops = populations(&out.state);
        Ok(PointResult {
            omega,
            t,
            populations: pops.values,
            populations_clamped: pops.clamped,
            coherence_l1: coherence_l1(&out.state),
            diagnostics: out.diagnostics,
            method: out.method,
            solver_steps: out.steps,
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| points.par_iter().map(run_point).collect())
}
