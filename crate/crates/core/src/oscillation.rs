//! Oscillation times and their sensitivity to the damping coefficient.
//!
//! The half oscillation time `tau_half` is the first positive zero of the
//! velocity (the first local minimum of `x` for `x0 > 0`), the oscillation
//! time `tau` the second one (the next local maximum). Both are measured by
//! event location on the integrated trajectory.
//!
//! Tolerances passed in are applied with `atol` scaled by the amplitude the
//! solution is expected to have after one linear oscillation, `|x0|
//! exp(-alpha tau_l)`, so that timing accuracy does not degrade for small
//! amplitudes or heavy damping.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{find_events, integrate, locate_crossings, Event, Tolerances};
use crate::model::{
    damped_frequency, linear_solution, linear_tau, rhs_augmented, rhs_base, NonlinearityModel, PendulumConfig,
    SensitivityState, State,
};
use crate::quadrature;

/// Floor for the amplitude-scaled absolute tolerance.
const MIN_ATOL: f64 = 1e-300;

/// Timing of the first full oscillation started at rest from `x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillationResult {
    pub x0: f64,
    pub alpha: f64,
    /// Time to the first extremum after the start.
    pub tau_half: f64,
    /// Amplitude at `tau_half`, `-x(tau_half)` for `x0 > 0` (sign-adjusted
    /// to be positive when `x0 < 0`).
    pub x_hat0: f64,
    /// Time to the second extremum after the start.
    pub tau: f64,
    pub events: [Event<2>; 2],
}

/// Amplitude-scaled tolerances for timing a single oscillation.
pub fn scaled_tolerances(tol: &Tolerances, x0: f64, alpha: f64) -> Result<Tolerances> {
    let tau_l = linear_tau(alpha)?;
    let decay = (-alpha.max(0.0) * 1.25 * tau_l).exp();
    Ok(tol.with_atol((tol.atol * x0.abs() * decay).max(MIN_ATOL)))
}

fn base_field(model: &NonlinearityModel, alpha: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
    move |_t, y| rhs_base(model, alpha, State::from_array(*y)).to_array()
}

fn augmented_field(model: &NonlinearityModel, alpha: f64) -> impl Fn(f64, &[f64; 4]) -> [f64; 4] + '_ {
    move |_t, y| rhs_augmented(model, alpha, SensitivityState::from_array(*y)).to_array()
}

/// Half and full oscillation times from the first two velocity zeros.
pub fn half_oscillation_time(
    model: &NonlinearityModel,
    x0: f64,
    alpha: f64,
    tol: &Tolerances,
) -> Result<OscillationResult> {
    PendulumConfig::new(x0, alpha)?;
    let tol = scaled_tolerances(tol, x0, alpha)?;
    let run = find_events(base_field(model, alpha), [x0, 0.0], 1, 2, &tol)?;
    let events = [run.events[0], run.events[1]];
    Ok(OscillationResult {
        x0,
        alpha,
        tau_half: events[0].t_star,
        x_hat0: -events[0].state_star[0] * x0.signum(),
        tau: events[1].t_star,
        events,
    })
}

/// The oscillation time `tau(x0, alpha)`.
pub fn oscillation_time(model: &NonlinearityModel, x0: f64, alpha: f64, tol: &Tolerances) -> Result<f64> {
    half_oscillation_time(model, x0, alpha, tol).map(|r| r.tau)
}

/// Phase-space point in polar form, `x = r sin(theta)`, `v = r cos(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarState {
    /// Unwrapped phase angle.
    pub theta: f64,
    pub r: f64,
}

impl PolarState {
    /// Principal-branch angle `atan2(x, v)`.
    pub fn from_state(s: State) -> Self {
        Self {
            theta: s.x.atan2(s.v),
            r: s.x.hypot(s.v),
        }
    }

    pub fn to_state(self) -> State {
        let (sin, cos) = self.theta.sin_cos();
        State::new(self.r * sin, self.r * cos)
    }
}

/// Angular rate `1 + alpha sin(2 theta) + sin(theta)^2 f(x)`.
pub fn phase_rate(model: &NonlinearityModel, alpha: f64, p: PolarState) -> f64 {
    let (sin, cos) = p.theta.sin_cos();
    1.0 + 2.0 * alpha * sin * cos + sin * sin * model.f(p.r * sin)
}

/// Time derivative of a polar state; the angle advances at [`phase_rate`]
/// and `r' = -r cos(theta) (2 alpha cos(theta) + sin(theta) f(x))`.
pub fn rhs_polar(model: &NonlinearityModel, alpha: f64, p: PolarState) -> PolarState {
    let (sin, cos) = p.theta.sin_cos();
    let f = model.f(p.r * sin);
    PolarState {
        theta: 1.0 + 2.0 * alpha * sin * cos + sin * sin * f,
        r: -p.r * cos * (2.0 * alpha * cos + sin * f),
    }
}

/// Half oscillation time measured as the time for the phase angle to sweep
/// through `pi`, starting from `theta = pi / 2` (at rest, `x = x0 > 0`).
pub fn tau_half_polar(model: &NonlinearityModel, x0: f64, alpha: f64, tol: &Tolerances) -> Result<f64> {
    if !(x0 > 0.0) {
        return Err(Error::Domain(format!("polar timing needs x0 > 0, got {x0}")));
    }
    PendulumConfig::new(x0, alpha)?;
    let tol = scaled_tolerances(tol, x0, alpha)?;
    let start = PolarState { theta: 0.5 * PI, r: x0 };
    let target = start.theta + PI;
    let field = |_t: f64, y: &[f64; 2]| {
        let d = rhs_polar(model, alpha, PolarState { theta: y[0], r: y[1] });
        [d.theta, d.r]
    };
    let run = match locate_crossings(
        field,
        [start.theta, start.r],
        0.0,
        |_, y: &[f64; 2]| y[0] - target,
        1,
        0.0,
        &tol,
    ) {
        Ok(run) => run,
        Err(Error::NoOscillation { t_max, .. }) => {
            return Err(Error::PhaseStall {
                t: t_max,
                rate: f64::NAN,
            });
        }
        Err(e) => return Err(e),
    };
    for (t, y) in run.trajectory.nodes() {
        let rate = phase_rate(model, alpha, PolarState { theta: y[0], r: y[1] });
        if rate <= 0.0 {
            return Err(Error::PhaseStall { t, rate });
        }
    }
    Ok(run.events[0].t)
}

/// Solution and its `alpha`-derivatives at time `t`.
pub fn sensitivity_at(
    model: &NonlinearityModel,
    x0: f64,
    alpha: f64,
    t: f64,
    tol: &Tolerances,
) -> Result<SensitivityState> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be non-negative")));
    }
    if t == 0.0 {
        return Ok(SensitivityState::initial(x0));
    }
    let tol = scaled_tolerances(tol, x0, alpha)?;
    let traj = integrate(
        augmented_field(model, alpha),
        SensitivityState::initial(x0).to_array(),
        (0.0, t),
        &tol,
    )?;
    Ok(SensitivityState::from_array(
        traj.final_state().expect("non-empty trajectory"),
    ))
}

/// State of the augmented system at its `n`-th velocity zero.
fn augmented_at_extremum(
    model: &NonlinearityModel,
    x0: f64,
    alpha: f64,
    n: usize,
    tol: &Tolerances,
) -> Result<(f64, SensitivityState)> {
    PendulumConfig::new(x0, alpha)?;
    let tol = scaled_tolerances(tol, x0, alpha)?;
    let run = find_events(
        augmented_field(model, alpha),
        SensitivityState::initial(x0).to_array(),
        1,
        n,
        &tol,
    )?;
    let e = run.events[n - 1];
    Ok((e.t_star, SensitivityState::from_array(e.state_star)))
}

/// Implicit-function derivative `dt*/dalpha = V / (x (1 + f(x)))` at an
/// extremum `t*` where `v(t*) = 0`.
fn extremum_shift(model: &NonlinearityModel, s: &SensitivityState) -> Result<f64> {
    let denom = model.restoring_force(s.x);
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::SingularDenominator(denom));
    }
    Ok(s.v_alpha / denom)
}

/// `d tau_half / d alpha` from the variational equations.
pub fn dtau_half_dalpha(model: &NonlinearityModel, x0: f64, alpha: f64, tol: &Tolerances) -> Result<f64> {
    let (_, s) = augmented_at_extremum(model, x0, alpha, 1, tol)?;
    extremum_shift(model, &s)
}

/// `d tau / d alpha` from the variational equations at the second extremum.
pub fn dtau_dalpha(model: &NonlinearityModel, x0: f64, alpha: f64, tol: &Tolerances) -> Result<f64> {
    let (_, s) = augmented_at_extremum(model, x0, alpha, 2, tol)?;
    extremum_shift(model, &s)
}

/// `(tau_half, V(tau_half))` at the first extremum.
pub fn velocity_sensitivity_at_half(
    model: &NonlinearityModel,
    x0: f64,
    alpha: f64,
    tol: &Tolerances,
) -> Result<(f64, f64)> {
    let (t, s) = augmented_at_extremum(model, x0, alpha, 1, tol)?;
    Ok((t, s.v_alpha))
}

/// Cubic-order correction `V2(t)` of the undamped velocity sensitivity for
/// `f(x) = -a x^2 + O(x^4)`:
///
/// ```text
/// V2(t) = 3 a x0^3 ( -(6t^2 + 5) cos t / 32 - 3 t sin 3t / 32 - t sin t / 16
///                    - 17 cos 3t / 128 + 37 cos t / 128 )
/// ```
pub fn v2_closed_form(a: f64, x0: f64, t: f64) -> f64 {
    let (s1, c1) = t.sin_cos();
    let (s3, c3) = (3.0 * t).sin_cos();
    let bracket =
        -(6.0 * t * t + 5.0) * c1 / 32.0 - 3.0 * t * s3 / 32.0 - t * s1 / 16.0 - 17.0 * c3 / 128.0 + 37.0 * c1 / 128.0;
    3.0 * a * x0.powi(3) * bracket
}

/// Defect of the variation-of-constants identity
///
/// ```text
/// x(t) = x_l(t) - (1/omega) int_0^t e^{-alpha (t-s)} sin(omega (t-s)) x(s) f(x(s)) ds
/// ```
///
/// evaluated on the integrated trajectory with adaptive quadrature.
pub fn varpar_residual(model: &NonlinearityModel, x0: f64, alpha: f64, t: f64, tol: &Tolerances) -> Result<f64> {
    let omega = damped_frequency(alpha)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("t = {t} must be non-negative")));
    }
    let linear = linear_solution(x0, alpha, t)?;
    if t == 0.0 {
        return Ok((x0 - linear.x).abs());
    }
    let scaled = scaled_tolerances(tol, x0, alpha)?;
    let traj = integrate(base_field(model, alpha), [x0, 0.0], (0.0, t), &scaled)?;
    let quad_tol = 1e-3 * scaled.atol;
    let convolution: f64 = traj
        .segments()
        .iter()
        .map(|seg| {
            let integrand = |s: f64| {
                let x = seg.eval(s)[0];
                (-alpha * (t - s)).exp() * (omega * (t - s)).sin() * x * model.f(x)
            };
            quadrature::integrate(integrand, seg.t_start, seg.t_end, quad_tol * seg.h() / t).0
        })
        .sum();
    let x_t = traj.final_state().expect("non-empty trajectory")[0];
    Ok((x_t - linear.x + convolution / omega).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::{linear_sensitivity_undamped, pendulum_period};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn linear_half_time_undamped() {
        let r = half_oscillation_time(&NonlinearityModel::Linear, 0.3, 0.0, &tol()).unwrap();
        assert_abs_diff_eq!(r.tau_half, PI, epsilon = 1e-9);
        assert_abs_diff_eq!(r.tau, 2.0 * PI, epsilon = 1e-9);
        assert_abs_diff_eq!(r.x_hat0, 0.3, epsilon = 1e-10);
        assert!(r.tau > r.tau_half && r.tau_half > 0.0);
    }

    #[test]
    fn linear_half_time_damped() {
        let r = half_oscillation_time(&NonlinearityModel::Linear, 0.3, 0.6, &tol()).unwrap();
        assert_abs_diff_eq!(r.tau_half, PI / 0.8, epsilon = 1e-9);
        assert_abs_diff_eq!(r.x_hat0, 0.3 * (-0.6 * PI / 0.8f64).exp(), epsilon = 1e-11);
        assert_abs_diff_eq!(r.x_hat0, 0.028_434_067_452_646, epsilon = 1e-11);
        assert_abs_diff_eq!(r.tau, 7.853_981_633_974_483, epsilon = 1e-9);
    }

    #[test]
    fn negative_start_is_symmetric() {
        let m = NonlinearityModel::SinePendulum;
        let p = half_oscillation_time(&m, 0.4, 0.2, &tol()).unwrap();
        let n = half_oscillation_time(&m, -0.4, 0.2, &tol()).unwrap();
        assert_abs_diff_eq!(p.tau, n.tau, epsilon = 1e-10);
        assert_abs_diff_eq!(p.x_hat0, n.x_hat0, epsilon = 1e-12);
    }

    #[test]
    fn pendulum_period_small_amplitude() {
        let tau = oscillation_time(&NonlinearityModel::SinePendulum, 0.1, 0.0, &tol()).unwrap();
        assert_abs_diff_eq!(tau, pendulum_period(0.1), epsilon = 1e-9);
        assert_abs_diff_eq!(tau, 6.287_114_549_31, epsilon = 1e-9);
    }

    #[test]
    fn duffing_sign_sets_side_of_linear_period() {
        let soft = oscillation_time(&NonlinearityModel::duffing(1.0), 0.2, 0.0, &tol()).unwrap();
        let hard = oscillation_time(&NonlinearityModel::duffing(-1.0), 0.2, 0.0, &tol()).unwrap();
        assert!(soft > 2.0 * PI);
        assert!(hard < 2.0 * PI);
    }

    #[test]
    fn degenerate_inputs() {
        let m = NonlinearityModel::Linear;
        assert!(matches!(
            half_oscillation_time(&m, 0.0, 0.1, &tol()),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            half_oscillation_time(&m, 0.1, 1.0, &tol()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(tau_half_polar(&m, -0.1, 0.1, &tol()), Err(Error::Domain(_))));
    }

    #[test]
    fn too_short_cap_means_no_oscillation() {
        let short = tol().with_t_max(5.0);
        let r = half_oscillation_time(&NonlinearityModel::Linear, 0.3, 0.0, &short);
        assert!(matches!(r, Err(Error::NoOscillation { found: 1, .. })), "{r:?}");
    }

    #[test]
    fn polar_linear() {
        let m = NonlinearityModel::Linear;
        assert_abs_diff_eq!(tau_half_polar(&m, 0.5, 0.0, &tol()).unwrap(), PI, epsilon = 1e-9);
        assert_abs_diff_eq!(tau_half_polar(&m, 0.5, 0.6, &tol()).unwrap(), PI / 0.8, epsilon = 1e-9);
    }

    #[test]
    fn polar_matches_events() {
        let m = NonlinearityModel::SinePendulum;
        let polar = tau_half_polar(&m, 0.3, 0.1, &tol()).unwrap();
        let events = half_oscillation_time(&m, 0.3, 0.1, &tol()).unwrap().tau_half;
        assert_abs_diff_eq!(polar, events, epsilon = 1e-6);
    }

    #[test]
    fn polar_field_matches_cartesian() {
        let m = NonlinearityModel::duffing(1.0);
        let alpha = 0.3;
        let s = State::new(0.25, -0.4);
        let p = PolarState::from_state(s);
        let d = rhs_polar(&m, alpha, p);
        let ds = rhs_base(&m, alpha, s);
        let r2 = s.x * s.x + s.v * s.v;
        // d/dt atan2(x, v) and d/dt |(x, v)|
        assert_abs_diff_eq!(d.theta, (s.v * ds.x - s.x * ds.v) / r2, epsilon = 1e-14);
        assert_abs_diff_eq!(d.r, (s.x * ds.x + s.v * ds.v) / r2.sqrt(), epsilon = 1e-14);
        let back = p.to_state();
        assert_abs_diff_eq!(back.x, s.x, epsilon = 1e-15);
        assert_abs_diff_eq!(back.v, s.v, epsilon = 1e-15);
    }

    #[test]
    fn polar_stall_is_reported() {
        // a strongly hardening spring dominates the damping term
        let m = NonlinearityModel::duffing(-40.0);
        let r = tau_half_polar(&m, 0.9, 0.0, &tol());
        assert!(r.is_ok(), "hardening keeps the rate positive: {r:?}");
        // x (1 - 3x^2 + x^4) pushes outward between 0.618 and 1.618
        let m = NonlinearityModel::even_polynomial(vec![-3.0, 1.0]).unwrap();
        let r = tau_half_polar(&m, 0.9, 0.1, &tol());
        assert!(matches!(r, Err(Error::PhaseStall { .. })), "{r:?}");
    }

    #[test]
    fn linear_sensitivity_matches_closed_form() {
        let m = NonlinearityModel::Linear;
        let s = sensitivity_at(&m, 1.0, 0.0, PI, &tol()).unwrap();
        assert_abs_diff_eq!(s.x_alpha, PI, epsilon = 1e-8);
        assert_abs_diff_eq!(s.v_alpha, 0.0, epsilon = 1e-8);
        for t in [0.5, 1.0, 2.0, 4.0] {
            let s = sensitivity_at(&m, 0.7, 0.0, t, &tol()).unwrap();
            let (x, v) = linear_sensitivity_undamped(0.7, t);
            assert_abs_diff_eq!(s.x_alpha, x, epsilon = 1e-8);
            assert_abs_diff_eq!(s.v_alpha, v, epsilon = 1e-8);
        }
        let s = sensitivity_at(&m, 0.7, 0.4, 0.0, &tol()).unwrap();
        assert_eq!((s.x_alpha, s.v_alpha), (0.0, 0.0));
        assert!(sensitivity_at(&m, 0.7, 0.4, -1.0, &tol()).is_err());
    }

    #[test]
    fn third_derivative_of_x_alpha_at_start() {
        // X = X' = X'' = 0 at t = 0 and X''' = 2 x0 (1 + f(x0))
        let m = NonlinearityModel::SinePendulum;
        let x0 = 0.3;
        let h = 0.01;
        let x_alpha = |t: f64| sensitivity_at(&m, x0, 0.0, t, &tol()).unwrap().x_alpha;
        let third = 6.0 * x_alpha(h) / h.powi(3);
        let expected = 2.0 * m.restoring_force(x0);
        assert!((third - expected).abs() < 1e-2 * expected, "{third} vs {expected}");
    }

    #[test]
    fn softening_makes_v_positive_at_half_time() {
        let (tau_half, v) = velocity_sensitivity_at_half(&NonlinearityModel::duffing(1.0), 0.1, 0.0, &tol()).unwrap();
        assert!(tau_half > PI);
        assert!(v > 0.0);
    }

    #[test]
    fn dtau_half_linear() {
        let m = NonlinearityModel::Linear;
        assert_abs_diff_eq!(dtau_half_dalpha(&m, 0.3, 0.0, &tol()).unwrap(), 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            dtau_half_dalpha(&m, 0.3, 0.5, &tol()).unwrap(),
            2.418_399_152_312_290_3,
            epsilon = 1e-7
        );
        // d/dalpha 2 pi / omega = 2 pi alpha / omega^3
        assert_abs_diff_eq!(
            dtau_dalpha(&m, 0.3, 0.5, &tol()).unwrap(),
            2.0 * 2.418_399_152_312_290_3,
            epsilon = 1e-7
        );
    }

    #[test]
    fn dtau_half_negative_for_softening_at_zero_damping() {
        let d = dtau_half_dalpha(&NonlinearityModel::duffing(1.0), 0.1, 0.0, &tol()).unwrap();
        assert!(d < 0.0, "{d}");
    }

    #[test]
    fn dtau_half_matches_finite_difference() {
        let h = 1e-5;
        for m in [NonlinearityModel::SinePendulum, NonlinearityModel::duffing(1.0)] {
            for alpha in [0.0, 0.3] {
                let d = dtau_half_dalpha(&m, 0.3, alpha, &tol()).unwrap();
                let th = |a: f64| half_oscillation_time(&m, 0.3, a, &tol()).unwrap().tau_half;
                let fd = (th(alpha + h) - th(alpha - h)) / (2.0 * h);
                assert!(
                    (d - fd).abs() <= 1e-6f64.max(1e-3 * d.abs()),
                    "{}: {d} vs {fd}",
                    m.label()
                );
            }
        }
    }

    #[test]
    fn v2_values() {
        assert_abs_diff_eq!(v2_closed_form(1.0, 0.1, 0.0), 0.0, epsilon = 1e-18);
        assert_abs_diff_eq!(v2_closed_form(2.5, 0.3, 0.0), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(
            v2_closed_form(1.0, 0.1, PI),
            9.0 * PI * PI * 1e-3 / 16.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(v2_closed_form(1.0, 0.1, PI), 5.551_652_475_612_77e-3, epsilon = 1e-15);
    }

    #[test]
    fn varpar_identity_holds() {
        assert!(varpar_residual(&NonlinearityModel::Linear, 0.3, 0.4, 5.0, &tol()).unwrap() < 1e-10);
        let r = varpar_residual(&NonlinearityModel::duffing(1.0), 0.2, 0.0, PI, &tol()).unwrap();
        assert!(r <= 1e-8, "{r}");
        let m = NonlinearityModel::SinePendulum;
        let th = half_oscillation_time(&m, 0.3, 0.2, &tol()).unwrap().tau_half;
        let r = varpar_residual(&m, 0.3, 0.2, th, &tol()).unwrap();
        assert!(r <= 1e-8, "{r}");
    }

    #[test]
    fn varpar_detects_wrong_model() {
        // the identity uses f from the model; integrating one model and
        // checking against another must leave a visible defect
        let traj_model = NonlinearityModel::duffing(1.0);
        let r = varpar_residual(&traj_model, 0.5, 0.1, 3.0, &tol()).unwrap();
        assert!(r < 1e-8);
        let lin = linear_solution(0.5, 0.1, 3.0).unwrap().x;
        let x = integrate(base_field(&traj_model, 0.1), [0.5, 0.0], (0.0, 3.0), &tol())
            .unwrap()
            .final_state()
            .unwrap()[0];
        assert!((x - lin).abs() > 1e-3);
    }
}
