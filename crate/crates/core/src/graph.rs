//! Weighted undirected graphs and the classical generator built from them.
//!
//! The generator follows the column convention `dp_a/dt = sum_b M[a][b] p_b`:
//! off-diagonal entries are the hop rates `gamma_ab` and each diagonal entry is
//! minus the total rate out of that vertex, so every column sums to zero.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Weighted undirected graph without self-loops or multi-edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    /// Builds a graph from `(u, v, weight)` triples. Pairs are unordered, so
    /// `(0, 1)` and `(1, 0)` collide.
    pub fn from_edge_list(n_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut seen: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(u, v, weight) in edges {
            for index in [u, v] {
                if index >= n_vertices {
                    return Err(Error::IndexOutOfRange { index, n_vertices });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::NonpositiveWeight { u, v, weight });
            }
            let key = (u.min(v), u.max(v));
            if seen.insert(key, weight).is_some() {
                return Err(Error::DuplicateEdge(key.0, key.1));
            }
        }

        let mut adjacency = vec![Vec::new(); n_vertices];
        let edges: Vec<Edge> = seen
            .into_iter()
            .map(|((u, v), weight)| {
                adjacency[u].push((v, weight));
                adjacency[v].push((u, weight));
                Edge { u, v, weight }
            })
            .collect();
        for list in &mut adjacency {
            list.sort_by_key(|&(w, _)| w);
        }
        Ok(Self { n_vertices, edges, adjacency })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    /// Edges in lexicographic `(u, v)` order with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbours of `v` with the connecting edge weight, sorted by index.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency
            .get(u)?
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| self.adjacency[u][i].1)
    }

    pub fn is_adjacent(&self, u: usize, v: usize) -> bool {
        self.weight(u, v).is_some()
    }

    /// True when `u == v` or the two vertices share an edge.
    pub fn is_connected_or_equal(&self, u: usize, v: usize) -> bool {
        u == v || self.is_adjacent(u, v)
    }
}

/// A finite path graph standing in for the infinite line, together with the
/// map between signed positions and storage indices.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGraph {
    graph: Graph,
    gamma: f64,
}

impl LineGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn into_graph(self) -> Graph {
        self.graph
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_sites(&self) -> usize {
        self.graph.n_vertices
    }

    /// Largest signed position, `(n_sites - 1) / 2`.
    pub fn half_width(&self) -> i64 {
        (self.graph.n_vertices as i64 - 1) / 2
    }

    /// Storage index of signed position 0.
    pub fn center(&self) -> usize {
        self.half_width() as usize
    }

    pub fn position(&self, index: usize) -> i64 {
        index as i64 - self.half_width()
    }

    pub fn index(&self, position: i64) -> Option<usize> {
        (position.abs() <= self.half_width()).then(|| (position + self.half_width()) as usize)
    }

    /// Signed positions in storage order.
    pub fn positions(&self) -> Vec<i64> {
        (0..self.n_sites()).map(|i| self.position(i)).collect()
    }

    /// Recognises a graph with edges exactly `(j, j + 1)`, one common weight
    /// and an odd vertex count.
    pub fn detect(graph: &Graph) -> Option<LineGraph> {
        let n = graph.n_vertices;
        if n < 3 || n.is_multiple_of(2) || graph.edges.len() != n - 1 {
            return None;
        }
        let gamma = graph.edges[0].weight;
        let is_path = graph
            .edges
            .iter()
            .enumerate()
            .all(|(j, e)| e.u == j && e.v == j + 1 && e.weight == gamma);
        is_path.then(|| LineGraph { graph: graph.clone(), gamma })
    }
}

/// Path graph of `n_sites` vertices, every edge with rate `gamma`. The walker
/// origin (signed position 0) is the middle vertex.
pub fn build_line(n_sites: usize, gamma: f64) -> Result<LineGraph> {
    if n_sites < 3 || n_sites.is_multiple_of(2) {
        return Err(Error::InvalidLineLength(n_sites));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidRate(gamma));
    }
    let edges: Vec<_> = (0..n_sites - 1).map(|j| (j, j + 1, gamma)).collect();
    Ok(LineGraph { graph: Graph::from_edge_list(n_sites, &edges)?, gamma })
}

/// Parses the edge-list text format:
///
/// ```text
/// # comment
/// vertices 4
/// 0 1 1.0
/// 1 2        # weight defaults to 1
/// ```
pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut n_vertices = None;
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno + 1, message };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "vertices" {
            if n_vertices.is_some() {
                return Err(err("repeated `vertices` header".into()));
            }
            let [_, count] = fields[..] else {
                return Err(err("expected `vertices N`".into()));
            };
            let count: usize = count.parse().map_err(|e| err(format!("bad vertex count: {e}")))?;
            n_vertices = Some(count);
            continue;
        }
        if n_vertices.is_none() {
            return Err(err("edge before `vertices N` header".into()));
        }
        let (u, v, w) = match fields[..] {
            [u, v] => (u, v, "1"),
            [u, v, w] => (u, v, w),
            _ => return Err(err(format!("expected `u v [weight]`, got `{line}`"))),
        };
        let u: usize = u.parse().map_err(|e| err(format!("bad vertex `{u}`: {e}")))?;
        let v: usize = v.parse().map_err(|e| err(format!("bad vertex `{v}`: {e}")))?;
        let w: f64 = w.parse().map_err(|e| err(format!("bad weight `{w}`: {e}")))?;
        if !(w > 0.0) || !w.is_finite() {
            return Err(err(format!("non-positive weight {w}")));
        }
        edges.push((u, v, w));
    }
    let n = n_vertices.ok_or(Error::Parse { line: 0, message: "missing `vertices N` header".into() })?;
    Graph::from_edge_list(n, &edges)
}

/// Real square generator of a continuous-time Markov chain, column
/// convention.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    entries: DMatrix<f64>,
}

impl GeneratorMatrix {
    /// Wraps an arbitrary square matrix. No invariants are checked here; use
    /// [`validate_generator`] for that.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.nrows() == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Rate from `from` into `to`, i.e. `M[to][from]`.
    pub fn rate(&self, to: usize, from: usize) -> f64 {
        self.entries[(to, from)]
    }

    pub fn max_asymmetry(&self) -> f64 {
        let m = &self.entries;
        (0..self.dim())
            .flat_map(|i| (0..i).map(move |j| (m[(i, j)] - m[(j, i)]).abs()))
            .fold(0.0, f64::max)
    }
}

/// Negative weighted Laplacian: `M[a][b] = gamma_ab` for neighbours and
/// `M[a][a] = -sum_b gamma_ab`.
pub fn classical_generator(g: &Graph) -> GeneratorMatrix {
    let n = g.n_vertices();
    let mut m = DMatrix::zeros(n, n);
    for e in g.edges() {
        m[(e.u, e.v)] = e.weight;
        m[(e.v, e.u)] = e.weight;
        m[(e.u, e.u)] -= e.weight;
        m[(e.v, e.v)] -= e.weight;
    }
    GeneratorMatrix { entries: m }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorReport {
    pub max_column_sum_deviation: f64,
    /// Smallest off-diagonal entry (0 for a 1x1 matrix).
    pub min_off_diagonal: f64,
    /// Off-diagonal positions `(a, b)` that are nonzero without an edge, or
    /// zero despite an edge. Empty when no reference graph was supplied.
    pub pattern_mismatches: Vec<(usize, usize)>,
    pub passed: bool,
}

impl fmt::Display for GeneratorReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "column-sum deviation {:e}, min off-diagonal {:e}, {} pattern mismatches: {}",
            self.max_column_sum_deviation,
            self.min_off_diagonal,
            self.pattern_mismatches.len(),
            if self.passed { "pass" } else { "FAIL" }
        )
    }
}

pub fn validate_generator(m: &GeneratorMatrix, tol: f64, reference: Option<&Graph>) -> GeneratorReport {
    let n = m.dim();
    let entries = m.matrix();
    let max_column_sum_deviation =
        (0..n).map(|b| entries.column(b).sum().abs()).fold(0.0, f64::max);
    let min_off_diagonal = (0..n)
        .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| entries[(a, b)]))
        .fold(f64::INFINITY, f64::min);
    let min_off_diagonal = if min_off_diagonal.is_finite() { min_off_diagonal } else { 0.0 };

    let mut pattern_mismatches = Vec::new();
    if let Some(g) = reference {
        if g.n_vertices() != n {
            pattern_mismatches.push((n, g.n_vertices()));
        } else {
            for a in 0..n {
                for b in (0..n).filter(|&b| b != a) {
                    let nonzero = entries[(a, b)].abs() > tol;
                    if nonzero != g.is_adjacent(a, b) {
                        pattern_mismatches.push((a, b));
                    }
                }
            }
        }
    }

    let passed = max_column_sum_deviation <= tol && min_off_diagonal >= -tol && pattern_mismatches.is_empty();
    GeneratorReport { max_column_sum_deviation, min_off_diagonal, pattern_mismatches, passed }
}
