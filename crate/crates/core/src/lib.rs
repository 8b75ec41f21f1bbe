//! Derivative-free projection methods for large-scale monotone nonlinear
//! equations `G(x) = 0` over a closed convex set.
//!
//! The crate provides two adaptive conjugate-gradient-type solvers together
//! with their fixed-parameter baselines:
//!
//! * [`Method::Gmopcgm`] -- generalized modified optimal Perry direction with
//!   an adaptive spectral scaling `λₖ`.
//! * [`Method::Gcgpm`] -- generalized conjugate gradient projection direction
//!   with a Hager-Zhang type parameter.
//! * [`Method::Mopcgm`] and [`Method::Cgpm`] -- the same directions with the
//!   scaling frozen (`λ ≡ 1`, resp. `λ ≡ 2, τ = 0`).
//!
//! Every method shares the same derivative-free backtracking line search and
//! hyperplane projection step (see [`solver`]). Around the solvers sit a
//! registry of test problems ([`problems`]), a benchmarking harness with
//! Dolan-Moré performance profiles ([`benchmark`]), a compressed-sensing
//! application ([`cs`]) and a dense oracle for the spectral properties of the
//! underlying memoryless quasi-Newton matrix ([`spectral`]).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod benchmark;
pub mod config;
pub mod cs;
pub mod directions;
mod error;
pub mod linalg;
pub mod problem;
pub mod problems;
pub mod projection;
pub mod report;
pub mod solver;
pub mod spectral;

pub use config::{validate_config, Method, SolverConfig};
pub use error::{Error, Result};
pub use problem::{FeasibleSet, Problem};
pub use report::{SolveReport, SolveStatus, TraceRecord};
pub use solver::solve;
