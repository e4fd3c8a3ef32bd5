//! Global Bayesian thermometry bounds.
//!
//! The crate computes lower bounds on the mean logarithmic error
//! `E[(ln T_est - ln T)^2]` of temperature estimation over a prior:
//!
//! * the optimal biased bounds (classical and quantum), obtained by solving a
//!   linear Euler-Lagrange boundary-value problem for the optimal bias of
//!   `ln T_est` and integrating the resulting functional;
//! * the Cramer-Rao-like bounds, the zero-bias specialization of the same
//!   functional.
//!
//! A Monte-Carlo harness ([`mcverify`]) simulates Bayes-optimal estimation
//! for the built-in probes and checks that the empirical error respects the
//! computed bounds.
//!
//! Sweeps and Monte-Carlo trials run on rayon when the `parallel` feature is
//! enabled (the default); [`Execution::Sequential`] forces the serial path.

pub mod bounds;
pub mod bvp;
pub mod error;
pub mod exec;
pub mod grid;
pub mod mcverify;
pub mod models;
pub mod quadrature;
pub mod tridiag;

pub use bounds::{
    bound, crlb_like, log_spaced, obb, sweep, BoundKind, BoundReport, SweepRow, SweepSpec,
    SweepVariable,
};
pub use bvp::{
    euler_lagrange_residual, refine_until_converged, solve_optimal_bias, BiasSolution,
    ConvergenceReport, NeumannProblem,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use grid::{Spacing, TemperatureGrid};
pub use mcverify::{empirical_mle, run_trials, Estimator, McOptions, Probe, TrialBatch};
pub use models::{
    FisherModel, InfoKind, ModelParams, ModelSpec, NLevelLikelihood, Prior, SpinGasLikelihood,
};
