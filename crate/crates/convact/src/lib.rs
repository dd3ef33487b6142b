//! Convolution-based action functionals for initial value problems.
//!
//! The classical action of a dynamical system pairs trajectories with the
//! `L2` inner product, which is why its stationarity conditions demand data
//! at the *final* time. Replacing that pairing with the temporal
//! convolution `[f, g](t) = integral of f(s) g(t - s)` removes the end
//! condition: stationary trajectories of the convolved functionals solve
//! the initial value problem outright, with the initial velocity entering
//! through an impulsive (Dirac) force term and dissipation through
//! half-order fractional derivatives.
//!
//! This crate evaluates those functionals and their exact discrete first
//! variations, solves for stationary trajectories by a
//! discretize-then-vary Galerkin method (dense LU over the free nodal
//! values), and ships the independent oracles that the verification suite
//! checks everything against: closed forms, modal series, a method-of-lines
//! integrator, and singularity-split quadratures.
//!
//! Modules:
//! - [`signals`]: uniform grids, sampled signals and fields, stencils.
//! - [`convolution`]: trapezoid convolution and its algebraic identities.
//! - [`fractional`]: half-order integral/derivative (two schemes) and the
//!   energy identity linking them to first-order terms.
//! - [`action`]: problem data, admissible sets, action values, variations.
//! - [`solver`]: stationarity solves, certification, reference solutions.
//! - [`experiment`]: batch runner with JSON/CSV artifacts.

pub mod action;
pub mod convolution;
pub mod error;
pub mod experiment;
pub mod fractional;
mod linalg;
pub mod signals;
pub mod solver;

pub use action::{
    action_bar, action_sdof, action_sdof_classical, natural_impulse_bar, natural_impulse_sdof,
    variation_bar, variation_sdof, BarProblem, BarVariation, Forcing, SdofProblem, SdofVariation,
};
pub use convolution::{
    conv_commutativity_residual, conv_ibp_residual, convolve, titchmarsh_probe, ConvKernelResult,
};
pub use error::{Error, Result};
pub use fractional::{
    half_derivative, half_energy_identity, half_ibp_residual, half_integral, HalfOperatorScheme,
    HalfSchemeKind,
};
pub use signals::{derivative, sample, trapezoid, Field, Signal, SpaceTimeGrid, TimeGrid};
pub use solver::{
    certify_stationarity_bar, certify_stationarity_sdof, reference_bar_modal,
    reference_bar_timestep, reference_sdof, solve_bar, solve_bar_with, solve_sdof, solve_sdof_with,
    SolverOptions, StationaryReport,
};
