//! Quantum stochastic walks on graphs.
//!
//! A graph fixes a classical generator `M` (the negative weighted Laplacian).
//! From it the crate builds a Hamiltonian and one of several jump-operator
//! sets, assembles the Lindblad superoperator
//!
//! ```text
//! L_omega[rho] = -(1 - omega) i [H, rho]
//!              + omega sum_k (L_k rho L_k^dagger - 1/2 {L_k^dagger L_k, rho})
//! ```
//!
//! and propagates walker density matrices. With edge-local jump operators the
//! `omega = 1` walk is the classical random walk; `omega = 0` is the coherent
//! quantum walk; the single global operator gives walks reachable by neither.
//!
//! Modules:
//! - [`graph`]: graphs, line graphs, the classical generator
//! - [`operators`]: Hamiltonian, jump operators, transition tensor and axiom audit
//! - [`evolution`]: density matrices, Liouvillian, propagation
//! - [`oracles`]: analytic and brute-force reference solutions
//! - [`discrete`]: discrete-time Markov chains and Kraus maps
//! - [`scenario`]: walk configuration shared by the CLI and bindings
//! - [`cli`]: the `qsw` command-line tool

pub mod cli;
pub mod discrete;
pub mod error;
pub mod evolution;
pub mod graph;
pub mod linalg;
pub mod operators;
pub mod oracles;
pub mod scenario;

pub use error::{Error, Result};
pub use linalg::C64;
