//! Objective acceleration for unconstrained optimization.
//!
//! The crate provides the O-ACCEL and N-GMRES acceleration engines on top of
//! steepest-descent preconditioners, L-BFGS and nonlinear CG baselines, a
//! More-Thuente strong-Wolfe line search, a full orthogonalization method
//! (FOM) reference solver, the standard test problems A-G and the
//! performance-profile arithmetic used to compare solvers.
//!
//! Everything here is pure computation: the crate is `no_std` and only needs
//! `alloc`. File formats, the experiment runner and the CLI live in the
//! `oaccel-bench` crate.
#![no_std]
#![deny(missing_docs)]
// `!(x > 0.0)` is used on purpose so NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod accel;
pub mod baselines;
pub mod error;
pub mod krylov;
pub mod linalg;
pub mod linesearch;
pub mod objective;
pub mod precond;
pub mod problems;
pub mod profile;
pub mod rng;
pub mod solver;
pub mod termination;

pub use accel::{AccelConfig, AccelMode, Accelerator, History, SmallSystem, SystemKind};
pub use baselines::{Lbfgs, Ncg};
pub use error::Error;
pub use linesearch::{LineSearchConfig, LineSearchStatus};
pub use objective::{EvalCounter, Evaluator, Objective, Point};
pub use precond::Preconditioner;
pub use problems::{make_problem, ProblemId, ProblemSpec, RotationKind};
pub use solver::{minimize, RunSummary, Solver, SolverKind};
pub use termination::{check_tolerance_gradient, check_tolerance_objective, Termination, ToleranceMode};
