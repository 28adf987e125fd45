//! Delta calculus on discrete time scales, with three discretizations of
//! Lagrangian dynamics built on top of it.
//!
//! A [`TimeScale`] is a finite, strictly increasing set of time points,
//! uniform or not. Functions on it ([`GridFunction`]) have a delta
//! derivative (forward difference over the gap) and a delta integral
//! (gap-weighted left sum), which obey the fundamental theorem and
//! integration by parts exactly.
//!
//! On that calculus, three discrete versions of the Euler-Lagrange
//! equation coexist for an action `sum mu_k L(t_k, x_k, (delta x)_k)`:
//! forward-difference the momentum (`differential`), backward-difference
//! it (`variational_backward`), or match it to the running integral of the
//! force (`integral`). The last two are equivalent: a trajectory is a
//! stationary point of the discrete action exactly when it satisfies the
//! integral-form equation. The first is a genuinely different scheme with
//! visibly worse accuracy (order one, not two) and energy behavior, which
//! the solvers and diagnostics here quantify.
//!
//! ```
//! use deltavar::{
//!     residual_integral, solve_variational, CEstimateMode, NewtonParams, Problem, TimeScale,
//! };
//!
//! // an irregular scale and the pendulum Lagrangian
//! let ts = TimeScale::from_points(vec![0.0, 0.1, 0.25, 0.3, 0.5, 0.75, 1.0])?;
//! let l = Problem::Pendulum.lagrangian();
//!
//! // step the discrete Euler-Lagrange equation across the scale
//! let tr = solve_variational(&ts, &l, 0.8, 0.8, NewtonParams::default())?;
//!
//! // the trajectory satisfies the integral-form equation to solver tolerance
//! let r = residual_integral(&ts, &l, &tr.x, CEstimateMode::First)?;
//! assert!(r.inf_norm() < 1e-9);
//! # Ok::<(), deltavar::Error>(())
//! ```
//!
//! The `examples/` directory walks through each capability: delta
//! calculus, actions and residuals, the variational integrator,
//! convergence order, coherence on random scales, energy drift, and
//! scheme comparison. The `deltavar` binary exposes the same experiments
//! as reproducible commands emitting CSV/JSON artifacts.

// validation guards use `!(x > 0.0)` so that NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod embedding;
pub mod error;
pub mod experiment;
pub mod io;
pub mod lagrangian;
pub mod solver;
pub mod timescale;

pub use embedding::{
    action, action_gradient, action_usual, residual_differential, residual_integral,
    residual_variational_backward, CEstimateMode, Residual, ResidualKind,
};
pub use error::{Error, Result};
pub use experiment::{
    perturb_interior, random_scale, run, Command, ConfigPatch, ExperimentConfig, Outcome,
    ScaleSpec, Tolerances,
};
pub use lagrangian::{
    apply_along, check_partials, mechanical, Lagrangian, LagrangianTerm, PartialsReport, Potential,
    Problem,
};
pub use solver::{
    convergence_order, energy_series, reference_solution, reference_states, reference_trajectory,
    solve_differential_scheme, solve_variational, ConvergenceReport, EnergySeries, NewtonParams,
    Scheme, SeedData, Trajectory, REFERENCE_RTOL,
};
pub use timescale::{DomainKind, GridFunction, TimeScale};
