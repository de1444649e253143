//! Oscillation time of the damped nonlinear pendulum
//!
//! ```text
//! x'' + 2 alpha x' + x (1 + f(x)) = 0,   x(0) = x0,  x'(0) = 0
//! ```
//!
//! The oscillation time `tau(x0, alpha)` is the time between the initial
//! maximum and the next local maximum of `x`; the half oscillation time is the
//! time to the first local minimum. For softening nonlinearities
//! (`f(x) = -a x^2 + ...` with `a > 0`) `tau` is not monotone in the damping:
//! it first decreases, reaches a minimum at some `0 < alpha* < 1`, then grows
//! without bound as `alpha -> 1`.
//!
//! Modules, bottom up:
//! - [`model`]: nonlinearity families and vector fields
//! - [`integrator`]: Dormand–Prince 5(4) with dense output and event location
//! - [`oscillation`]: half and full oscillation times, damping sensitivities
//! - [`analysis`]: period-coefficient fits, minimisation over alpha, sweeps
//! - [`verify`]: the self-check suite behind `osc-time verify`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod integrator;
pub mod model;
pub mod optimize;
pub mod oscillation;
pub mod quadrature;
pub mod reference;
pub mod roots;
pub mod verify;

pub use analysis::{
    blowup_scan, find_min_alpha, fit_period_coefficient, sweep, BlowupPoint, BlowupReport, MinResult, MinSearch,
    PeriodFit, SweepRow, SweepTable,
};
pub use error::{Error, Result};
pub use integrator::{integrate, DenseTrajectory, Event, ExtremumKind, Tolerances};
pub use model::{
    linear_solution, linear_tau, rhs_augmented, rhs_base, NonlinearityModel, PendulumConfig, SensitivityState, State,
};
pub use oscillation::{
    dtau_dalpha, dtau_half_dalpha, half_oscillation_time, oscillation_time, sensitivity_at, tau_half_polar,
    v2_closed_form, varpar_residual, OscillationResult, PolarState,
};
