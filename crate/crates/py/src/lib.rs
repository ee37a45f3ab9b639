//! Python bindings: graphs, walks, oracles and discrete maps.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qsw::discrete::{iterate_map, kraus_from_stochastic, lazy_walk_matrix, StochasticMatrix};
use qsw::evolution::{build_liouvillian, propagate, DensityMatrix, Method, PropagationConfig};
use qsw::graph::{build_line, classical_generator, parse_edge_list};
use qsw::operators::{audit_axioms, tensor_element, AmplitudeConvention, GlobalOperatorForm, Hamiltonian, JumpOperatorSet};
use qsw::oracles::{crw_line_analytic, qw_line_analytic, LineWalkSpec};
use qsw::scenario::{build_walk, parse_jump_operators, run_grid, LoadedGraph, PointResult, WalkOptions, WalkRegime};
use qsw::{Error, C64};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::ToleranceNotMet(_) | Error::StateInvariantViolated { .. } => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn matrix_rows(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn parse_method(name: &str) -> PyResult<Method> {
    match name {
        "auto" => Ok(Method::Auto),
        "matrix-exponential" | "expm" => Ok(Method::MatrixExponential),
        "adaptive-rk" | "rk" => Ok(Method::AdaptiveRk),
        _ => Err(PyValueError::new_err(format!("unknown method `{name}`"))),
    }
}

/// Undirected weighted graph. Line graphs keep signed site positions.
#[pyclass(name = "Graph", frozen)]
struct PyGraph {
    inner: LoadedGraph,
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n_vertices: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let graph = qsw::graph::Graph::from_edge_list(n_vertices, &edges).map_err(to_py)?;
        Ok(Self { inner: LoadedGraph::from_graph(graph) })
    }

    /// Line of `n_sites` (odd) vertices centred on position 0.
    #[staticmethod]
    #[pyo3(signature = (n_sites, gamma = 1.0))]
    fn line(n_sites: usize, gamma: f64) -> PyResult<Self> {
        let line = build_line(n_sites, gamma).map_err(to_py)?;
        Ok(Self { inner: LoadedGraph { graph: line.graph().clone(), line: Some(line) } })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self { inner: LoadedGraph::from_graph(parse_edge_list(text).map_err(to_py)?) })
    }

    #[getter]
    fn n_vertices(&self) -> usize {
        self.inner.graph.n_vertices()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.graph.edges().iter().map(|e| (e.u, e.v, e.weight)).collect()
    }

    #[getter]
    fn is_line(&self) -> bool {
        self.inner.line.is_some()
    }

    /// Population labels in storage order.
    #[getter]
    fn positions(&self) -> Vec<i64> {
        self.inner.position_labels()
    }

    /// The classical generator as a list of rows.
    fn generator(&self) -> Vec<Vec<f64>> {
        let m = classical_generator(&self.inner.graph);
        m.matrix().row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n_vertices={}, edges={})", self.inner.graph.n_vertices(), self.inner.graph.edges().len())
    }
}

/// A Hamiltonian and jump-operator set on a graph.
#[pyclass(name = "Walk", frozen)]
struct PyWalk {
    graph: LoadedGraph,
    regime: WalkRegime,
    hamiltonian: Hamiltonian,
    jump_operators: JumpOperatorSet,
}

fn point_dict<'py>(py: Python<'py>, r: &PointResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("omega", r.omega)?;
    d.set_item("t", r.t)?;
    d.set_item("populations", &r.populations)?;
    d.set_item("coherence_l1", r.coherence_l1)?;
    d.set_item("trace_drift", r.diagnostics.trace_drift)?;
    d.set_item("hermiticity", r.diagnostics.hermiticity)?;
    d.set_item("min_eigenvalue", r.diagnostics.min_eigenvalue)?;
    d.set_item("method", r.method.to_string())?;
    d.set_item("solver_steps", r.solver_steps)?;
    Ok(d)
}

impl PyWalk {
    fn config(method: &str) -> PyResult<PropagationConfig> {
        Ok(PropagationConfig::with_method(parse_method(method)?))
    }
}

#[pymethods]
impl PyWalk {
    /// `regime` is one of crw, qw, qsw-global, qsw-custom. The custom regime
    /// reads its operators from `jump_ops` in the CLI's text format.
    #[new]
    #[pyo3(signature = (graph, regime = "crw", amplitude_convention = "sqrt", global_l = "full", jump_ops = None))]
    fn new(
        graph: &PyGraph,
        regime: &str,
        amplitude_convention: &str,
        global_l: &str,
        jump_ops: Option<&str>,
    ) -> PyResult<Self> {
        let regime: WalkRegime = regime.parse().map_err(PyValueError::new_err)?;
        let amplitude = match amplitude_convention {
            "sqrt" => AmplitudeConvention::Sqrt,
            "literal" => AmplitudeConvention::Literal,
            other => return Err(PyValueError::new_err(format!("unknown amplitude convention `{other}`"))),
        };
        let global_form = match global_l {
            "full" => GlobalOperatorForm::Full,
            "offdiagonal" => GlobalOperatorForm::OffDiagonal,
            other => return Err(PyValueError::new_err(format!("unknown global operator form `{other}`"))),
        };
        let n = graph.inner.graph.n_vertices();
        let custom_operators = jump_ops.map(|text| parse_jump_operators(text, n)).transpose().map_err(to_py)?;
        let opts = WalkOptions { amplitude, global_form, custom_operators };
        let (hamiltonian, jump_operators) = build_walk(&graph.inner.graph, regime, &opts).map_err(to_py)?;
        Ok(Self { graph: graph.inner.clone(), regime, hamiltonian, jump_operators })
    }

    #[getter]
    fn regime(&self) -> String {
        self.regime.to_string()
    }

    #[getter]
    fn n_jump_operators(&self) -> usize {
        self.jump_operators.len()
    }

    /// Walker started on `origin` (a signed position on lines), propagated to `t`.
    #[pyo3(signature = (t, omega = None, origin = 0, method = "auto"))]
    fn simulate<'py>(
        &self,
        py: Python<'py>,
        t: f64,
        omega: Option<f64>,
        origin: i64,
        method: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let omega = omega.unwrap_or_else(|| self.regime.default_omega());
        let start = self.graph.origin_index(origin).map_err(to_py)?;
        let cfg = Self::config(method)?;
        let r = py
            .detach(|| run_grid(&self.hamiltonian, &self.jump_operators, start, &[omega], &[t], &cfg, 1))
            .map_err(to_py)?;
        point_dict(py, &r[0])
    }

    /// Every `(omega, t)` pair, omega-major.
    #[pyo3(signature = (omegas, times, origin = 0, jobs = 0, method = "auto"))]
    fn sweep<'py>(
        &self,
        py: Python<'py>,
        omegas: Vec<f64>,
        times: Vec<f64>,
        origin: i64,
        jobs: usize,
        method: &str,
    ) -> PyResult<Vec<Bound<'py, PyDict>>> {
        let start = self.graph.origin_index(origin).map_err(to_py)?;
        let cfg = Self::config(method)?;
        let rows = py
            .detach(|| run_grid(&self.hamiltonian, &self.jump_operators, start, &omegas, &times, &cfg, jobs))
            .map_err(to_py)?;
        rows.iter().map(|r| point_dict(py, r)).collect()
    }

    /// Propagated density matrix as rows of complex numbers.
    #[pyo3(signature = (t, omega, rho0, method = "auto"))]
    fn evolve(&self, py: Python<'_>, t: f64, omega: f64, rho0: Vec<Vec<C64>>, method: &str) -> PyResult<Vec<Vec<C64>>> {
        let n = rho0.len();
        if rho0.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("rho0 must be square"));
        }
        let rho0 = DensityMatrix::new(DMatrix::from_fn(n, n, |i, j| rho0[i][j])).map_err(to_py)?;
        let cfg = Self::config(method)?;
        let out = py
            .detach(|| -> qsw::Result<_> {
                let l = build_liouvillian(&self.hamiltonian, &self.jump_operators, omega)?;
                propagate(&rho0, &l, t, &cfg)
            })
            .map_err(to_py)?;
        Ok(matrix_rows(out.state.matrix()))
    }

    /// Coefficient of `rho[b, beta]` in `d rho[a, alpha] / dt`, without the
    /// omega weighting.
    fn tensor_element(&self, a: usize, alpha: usize, b: usize, beta: usize) -> PyResult<C64> {
        Ok(tensor_element(&self.hamiltonian, &self.jump_operators, a, alpha, b, beta).map_err(to_py)?.value)
    }

    /// Axiom-table and sparsity audit summary.
    #[pyo3(signature = (tol = 1e-12))]
    fn audit<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let report = audit_axioms(&self.hamiltonian, &self.jump_operators, &self.graph.graph, tol).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("passed", report.passed)?;
        d.set_item("axioms_match", report.axioms_match)?;
        d.set_item("connectivity_respected", report.connectivity_respected)?;
        d.set_item("max_deviation", report.max_deviation)?;
        d.set_item("tensor_elements_checked", report.tensor_elements_checked)?;
        d.set_item("connectivity_violations", report.connectivity_violations.len())?;
        d.set_item("axiom6_nonzero", report.axiom6_nonzero.len())?;
        Ok(d)
    }
}

fn line_result(spec: PyResult<LineWalkSpec>, classical: bool) -> PyResult<(Vec<i64>, Vec<f64>)> {
    let spec = spec?;
    let dist = if classical { crw_line_analytic(&spec) } else { qw_line_analytic(&spec) };
    Ok((dist.positions, dist.probabilities))
}

/// Infinite-line classical walk restricted to `n_sites` around the origin.
#[pyfunction]
fn crw_line(n_sites: usize, gamma: f64, t: f64) -> PyResult<(Vec<i64>, Vec<f64>)> {
    line_result(LineWalkSpec::new(n_sites, gamma, t).map_err(to_py), true)
}

/// Infinite-line coherent walk restricted to `n_sites` around the origin.
#[pyfunction]
fn qw_line(n_sites: usize, gamma: f64, t: f64) -> PyResult<(Vec<i64>, Vec<f64>)> {
    line_result(LineWalkSpec::new(n_sites, gamma, t).map_err(to_py), false)
}

#[pyfunction]
fn total_variation(p: Vec<f64>, q: Vec<f64>) -> PyResult<f64> {
    qsw::oracles::total_variation(&p, &q).map_err(to_py)
}

/// Applies the Kraus embedding of column-stochastic `s` to `diag(p)` `steps` times.
#[pyfunction]
fn stochastic_map(s: Vec<Vec<f64>>, p: Vec<f64>, steps: usize) -> PyResult<Vec<Vec<C64>>> {
    let n = s.len();
    if s.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("stochastic matrix must be square"));
    }
    let s = StochasticMatrix::new(DMatrix::from_fn(n, n, |i, j| s[i][j])).map_err(to_py)?;
    let rho = DensityMatrix::diagonal(&p).map_err(to_py)?;
    let out = iterate_map(&kraus_from_stochastic(&s), &rho, steps).map_err(to_py)?;
    Ok(matrix_rows(out.matrix()))
}

/// Column-stochastic lazy walk: stay with probability `hold`, else move to a
/// neighbour with probability proportional to edge weight.
#[pyfunction]
fn lazy_walk(graph: &PyGraph, hold: f64) -> PyResult<Vec<Vec<f64>>> {
    let s = lazy_walk_matrix(&graph.inner.graph, hold).map_err(to_py)?;
    Ok(s.matrix().row_iter().map(|r| r.iter().copied().collect()).collect())
}

#[pymodule]
pub fn qsw_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyGraph>()?;
    m.add_class::<PyWalk>()?;
    m.add_function(wrap_pyfunction!(crw_line, m)?)?;
    m.add_function(wrap_pyfunction!(qw_line, m)?)?;
    m.add_function(wrap_pyfunction!(total_variation, m)?)?;
    m.add_function(wrap_pyfunction!(stochastic_map, m)?)?;
    m.add_function(wrap_pyfunction!(lazy_walk, m)?)?;
    Ok(())
}
