//! Restoring nonlinearities and the vector fields of the damped pendulum
//!
//! The equation of motion is
//!
//! ```text
//! x'' + 2 alpha x' + x (1 + f(x)) = 0
//! ```
//!
//! with `f` even and `f(x) = -a x^2 + O(x^4)` near the origin. Everything in
//! this module is a pure function of its arguments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Below this magnitude the pendulum's `f` is summed from its Taylor series.
const SINE_SERIES_CUTOFF: f64 = 0.5;

/// Taylor coefficients of `sin(x)/x - 1` in powers of `x^2`, starting at `x^2`.
const SINE_SERIES: [f64; 8] = [
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362_880.0,
    -1.0 / 39_916_800.0,
    1.0 / 6_227_020_800.0,
    -1.0 / 1_307_674_368_000.0,
    1.0 / 355_687_428_096_000.0,
];

/// An even polynomial `f(x) = c[0] x^2 + c[1] x^4 + ...`.
///
/// Only even powers can be expressed, so `f(-x) = f(x)` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvenPolynomial {
    coeffs: Vec<f64>,
}

impl EvenPolynomial {
    /// `coeffs[k]` multiplies `x^(2k + 2)`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite polynomial coefficient {c}")));
        }
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation of `sum_k w(k) c[k] y^k` with `y = x^2`.
    fn horner(&self, y: f64, weight: impl Fn(usize) -> f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, c)| acc * y + weight(k) * c)
    }
}

/// The restoring nonlinearity `f`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityModel {
    /// `f = 0`.
    Linear,
    /// `f(x) = -a x^2` (unforced Duffing oscillator).
    Duffing {
        a: f64,
    },
    /// The mathematical pendulum, `x (1 + f(x)) = sin x`.
    SinePendulum,
    EvenPolynomial(EvenPolynomial),
}

impl NonlinearityModel {
    pub fn duffing(a: f64) -> Self {
        Self::Duffing { a }
    }

    pub fn even_polynomial(coeffs: Vec<f64>) -> Result<Self> {
        EvenPolynomial::new(coeffs).map(Self::EvenPolynomial)
    }

    /// The constant `a` in `f(x) = -a x^2 + O(x^4)`.
    pub fn a(&self) -> f64 {
        match self {
            Self::Linear => 0.0,
            Self::Duffing { a } => *a,
            Self::SinePendulum => 1.0 / 6.0,
            Self::EvenPolynomial(p) => -p.coeffs.first().copied().unwrap_or(0.0),
        }
    }

    /// Short human-readable label, e.g. `duffing(a=1)`.
    pub fn label(&self) -> String {
        match self {
            Self::Linear => "linear".to_string(),
            Self::Duffing { a } => format!("duffing(a={a})"),
            Self::SinePendulum => "sine".to_string(),
            Self::EvenPolynomial(p) => {
                let cs: Vec<String> = p.coeffs.iter().map(|c| c.to_string()).collect();
                format!("poly({})", cs.join(","))
            }
        }
    }

    /// `f(x)`.
    pub fn f(&self, x: f64) -> f64 {
        let y = x * x;
        match self {
            Self::Linear => 0.0,
            Self::Duffing { a } => -a * y,
            Self::SinePendulum => {
                let ax = x.abs();
                if ax < SINE_SERIES_CUTOFF {
                    SINE_SERIES.iter().rev().fold(0.0, |acc, c| acc * y + c) * y
                } else {
                    ax.sin() / ax - 1.0
                }
            }
            Self::EvenPolynomial(p) => p.horner(y, |_| 1.0) * y,
        }
    }

    /// The restoring force `x (1 + f(x))`.
    ///
    /// For the pendulum this is `sin x` evaluated directly.
    pub fn restoring_force(&self, x: f64) -> f64 {
        match self {
            Self::Linear => x,
            Self::Duffing { a } => x * (1.0 - a * x * x),
            Self::SinePendulum => {
                // odd by construction, independent of libm symmetry
                let s = x.abs().sin();
                if x.is_sign_negative() {
                    -s
                } else {
                    s
                }
            }
            Self::EvenPolynomial(_) => x + x * self.f(x),
        }
    }

    /// `G(x) = -d/dx (x f(x))`.
    pub fn g(&self, x: f64) -> f64 {
        let y = x * x;
        match self {
            Self::Linear => 0.0,
            Self::Duffing { a } => 3.0 * a * y,
            // 1 - cos x without cancellation
            Self::SinePendulum => {
                let s = (0.5 * x).sin();
                2.0 * s * s
            }
            Self::EvenPolynomial(p) => -p.horner(y, |k| (2 * k + 3) as f64) * y,
        }
    }

    /// Potential energy `int_0^x s (1 + f(s)) ds`.
    pub fn potential(&self, x: f64) -> f64 {
        let y = x * x;
        match self {
            Self::Linear => 0.5 * y,
            Self::Duffing { a } => 0.5 * y - 0.25 * a * y * y,
            Self::SinePendulum => {
                let s = (0.5 * x).sin();
                2.0 * s * s
            }
            Self::EvenPolynomial(p) => 0.5 * y + p.horner(y, |k| 1.0 / (2 * k + 4) as f64) * y * y,
        }
    }
}

/// Phase-space point `(x, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub v: f64,
}

impl State {
    pub fn new(x: f64, v: f64) -> Self {
        Self { x, v }
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.v]
    }

    pub fn from_array(y: [f64; 2]) -> Self {
        Self { x: y[0], v: y[1] }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.v.is_finite()
    }
}

/// Phase-space point together with its derivatives with respect to `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SensitivityState {
    pub x: f64,
    pub v: f64,
    /// `dx/dalpha`
    pub x_alpha: f64,
    /// `dv/dalpha`
    pub v_alpha: f64,
}

impl SensitivityState {
    /// Start from rest at `x0`; the sensitivities vanish at `t = 0`.
    pub fn initial(x0: f64) -> Self {
        Self {
            x: x0,
            ..Self::default()
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.v, self.x_alpha, self.v_alpha]
    }

    pub fn from_array(y: [f64; 4]) -> Self {
        Self {
            x: y[0],
            v: y[1],
            x_alpha: y[2],
            v_alpha: y[3],
        }
    }
}

/// Initial deviation and damping of an experiment, with `omega = sqrt(1 - alpha^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumConfig {
    x0: f64,
    alpha: f64,
    omega: f64,
}

impl PendulumConfig {
    /// Requires a finite non-zero `x0` and an underdamped `|alpha| < 1`.
    pub fn new(x0: f64, alpha: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::Domain(format!("x0 = {x0} is not finite")));
        }
        if x0 == 0.0 {
            return Err(Error::Degenerate("x0 = 0 is the equilibrium".into()));
        }
        let omega = damped_frequency(alpha)?;
        Ok(Self { x0, alpha, omega })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }
}

/// `sqrt(1 - alpha^2)`, defined for `|alpha| < 1`.
pub fn damped_frequency(alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha.abs() >= 1.0 {
        return Err(Error::Domain(format!(
            "alpha = {alpha} is outside the underdamped range (-1, 1)"
        )));
    }
    // (1 - a)(1 + a) keeps omega accurate as alpha -> 1
    Ok(((1.0 - alpha) * (1.0 + alpha)).sqrt())
}

pub fn restoring_force(model: &NonlinearityModel, x: f64) -> f64 {
    model.restoring_force(x)
}

pub fn eval_f(model: &NonlinearityModel, x: f64) -> f64 {
    model.f(x)
}

pub fn eval_g(model: &NonlinearityModel, x: f64) -> f64 {
    model.g(x)
}

/// `(x', v') = (v, -2 alpha v - x (1 + f(x)))`.
pub fn rhs_base(model: &NonlinearityModel, alpha: f64, s: State) -> State {
    State {
        x: s.v,
        v: -2.0 * alpha * s.v - model.restoring_force(s.x),
    }
}

/// Base flow plus its variational equation in `alpha`:
///
/// ```text
/// X' = V
/// V' = -2 alpha V - X - 2 v + G(x) X
/// ```
pub fn rhs_augmented(model: &NonlinearityModel, alpha: f64, s: SensitivityState) -> SensitivityState {
    SensitivityState {
        x: s.v,
        v: -2.0 * alpha * s.v - model.restoring_force(s.x),
        x_alpha: s.v_alpha,
        v_alpha: -2.0 * alpha * s.v_alpha - s.x_alpha - 2.0 * s.v + model.g(s.x) * s.x_alpha,
    }
}

/// Closed-form solution for `f = 0` started from rest at `x0`.
pub fn linear_solution(x0: f64, alpha: f64, t: f64) -> Result<State> {
    let omega = damped_frequency(alpha)?;
    let decay = (-alpha * t).exp();
    let (sin, cos) = (omega * t).sin_cos();
    Ok(State {
        x: decay * (cos + alpha / omega * sin) * x0,
        v: -decay * sin / omega * x0,
    })
}

/// Oscillation time of the linear oscillator, `2 pi / sqrt(1 - alpha^2)`.
pub fn linear_tau(alpha: f64) -> Result<f64> {
    Ok(std::f64::consts::TAU / damped_frequency(alpha)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn models() -> Vec<NonlinearityModel> {
        vec![
            NonlinearityModel::Linear,
            NonlinearityModel::duffing(1.0),
            NonlinearityModel::duffing(-1.0),
            NonlinearityModel::SinePendulum,
            NonlinearityModel::even_polynomial(vec![-0.5, 0.1, -0.02]).unwrap(),
        ]
    }

    #[test]
    fn restoring_force_examples() {
        assert_eq!(NonlinearityModel::Linear.restoring_force(0.3), 0.3);
        assert_abs_diff_eq!(
            NonlinearityModel::SinePendulum.restoring_force(0.5),
            0.479_425_538_604_203,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            NonlinearityModel::duffing(1.0).restoring_force(0.2),
            0.192,
            epsilon = 1e-15
        );
    }

    #[test]
    fn f_examples() {
        assert_abs_diff_eq!(NonlinearityModel::duffing(1.0).f(0.3), -0.09, epsilon = 1e-15);
        for m in models() {
            assert_eq!(m.f(0.0), 0.0);
            assert_eq!(m.g(0.0), 0.0);
        }
        // sin(0.1)/0.1 - 1
        assert_abs_diff_eq!(
            NonlinearityModel::SinePendulum.f(0.1),
            -0.001_665_833_531_718_477,
            epsilon = 1e-18
        );
    }

    #[test]
    fn g_examples() {
        assert_abs_diff_eq!(NonlinearityModel::duffing(1.0).g(0.2), 0.12, epsilon = 1e-15);
        assert_eq!(NonlinearityModel::Linear.g(0.7), 0.0);
        // 1 - cos(0.1)
        assert_abs_diff_eq!(
            NonlinearityModel::SinePendulum.g(0.1),
            0.004_995_834_721_974_234,
            epsilon = 1e-18
        );
    }

    #[test]
    fn a_values() {
        assert_eq!(NonlinearityModel::Linear.a(), 0.0);
        assert_eq!(NonlinearityModel::SinePendulum.a(), 1.0 / 6.0);
        assert_eq!(NonlinearityModel::duffing(-1.0).a(), -1.0);
        assert_eq!(NonlinearityModel::even_polynomial(vec![-0.25]).unwrap().a(), 0.25);
    }

    #[test]
    fn polynomial_rejects_nan() {
        assert!(NonlinearityModel::even_polynomial(vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn leading_behaviour_is_quartic() {
        for m in models() {
            let a = m.a();
            let c = (1..=500)
                .map(|i| 0.001 * i as f64)
                .map(|x| (m.f(x) + a * x * x).abs() / x.powi(4))
                .fold(0.0, f64::max);
            assert!(c.is_finite() && c < 1.0, "{}: C = {c}", m.label());
        }
    }

    #[test]
    fn sine_f_branches_agree_at_cutoff() {
        let m = NonlinearityModel::SinePendulum;
        let x = SINE_SERIES_CUTOFF - 1e-12;
        let direct = x.sin() / x - 1.0;
        assert_abs_diff_eq!(m.f(x), direct, epsilon = 1e-15);
        let above = SINE_SERIES_CUTOFF + 1e-12;
        assert_abs_diff_eq!(m.f(x), m.f(above), epsilon = 1e-12);
    }

    #[test]
    fn potential_derivative_is_restoring_force() {
        let h = 1e-6;
        for m in models() {
            for i in -8..=8 {
                let x = 0.1 * i as f64;
                let d = (m.potential(x + h) - m.potential(x - h)) / (2.0 * h);
                assert_abs_diff_eq!(d, m.restoring_force(x), epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn g_matches_finite_difference() {
        let h = 1e-6;
        for m in models() {
            for i in -80..=80 {
                let x = 0.01 * i as f64;
                let xf = |z: f64| z * m.f(z);
                let fd = -(xf(x + h) - xf(x - h)) / (2.0 * h);
                assert_abs_diff_eq!(m.g(x), fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn rhs_base_examples() {
        let s = rhs_base(&NonlinearityModel::Linear, 0.0, State::new(1.0, 0.0));
        assert_eq!(s, State::new(0.0, -1.0));
        let s = rhs_base(&NonlinearityModel::duffing(1.0), 0.5, State::new(0.2, -0.1));
        assert_abs_diff_eq!(s.x, -0.1);
        assert_abs_diff_eq!(s.v, -0.092, epsilon = 1e-15);
        let s = rhs_base(&NonlinearityModel::SinePendulum, 0.0, State::new(0.5, 0.0));
        assert_abs_diff_eq!(s.v, -0.479_425_538_604_203, epsilon = 1e-15);
        for m in models() {
            assert_eq!(rhs_base(&m, 0.3, State::default()), State::new(0.0, 0.0));
        }
    }

    #[test]
    fn rhs_augmented_examples() {
        let x0 = 0.4;
        let d = rhs_augmented(&NonlinearityModel::Linear, 0.0, SensitivityState::initial(x0));
        assert_eq!(d.to_array(), [0.0, -x0, 0.0, 0.0]);

        let s = SensitivityState::from_array([0.2, -0.1, 0.05, 0.01]);
        let d = rhs_augmented(&NonlinearityModel::duffing(1.0), 0.0, s).to_array();
        let expected = [-0.1, -0.192, 0.01, 0.156];
        for (got, want) in d.iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn linear_solution_examples() {
        let s = linear_solution(0.7, 0.3, 0.0).unwrap();
        assert_eq!(s, State::new(0.7, 0.0));
        let s = linear_solution(1.0, 0.0, FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.v, -1.0, epsilon = 1e-15);
        let s = linear_solution(1.0, 0.6, PI / 0.8).unwrap();
        assert_abs_diff_eq!(s.x, -(-0.6 * PI / 0.8f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.x, -0.094_780_224_842_154_8, epsilon = 1e-15);
        assert_abs_diff_eq!(s.v, 0.0, epsilon = 1e-15);
        assert!(matches!(linear_solution(1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn linear_solution_satisfies_the_ode() {
        let h = 1e-6;
        for &alpha in &[0.0, 0.3, 0.8, -0.2] {
            for i in 0..50 {
                let t = 0.37 * i as f64;
                let p = linear_solution(0.9, alpha, t + h).unwrap();
                let m = linear_solution(0.9, alpha, t - h).unwrap();
                let d = State::new((p.x - m.x) / (2.0 * h), (p.v - m.v) / (2.0 * h));
                let r = rhs_base(
                    &NonlinearityModel::Linear,
                    alpha,
                    linear_solution(0.9, alpha, t).unwrap(),
                );
                assert_abs_diff_eq!(d.x, r.x, epsilon = 1e-6);
                assert_abs_diff_eq!(d.v, r.v, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn linear_tau_examples() {
        assert_eq!(linear_tau(0.0).unwrap(), TAU);
        assert_abs_diff_eq!(linear_tau(0.6).unwrap(), 7.853_981_633_974_483, epsilon = 1e-12);
        assert_abs_diff_eq!(linear_tau(0.99).unwrap(), 44.540_319_718_441_33, epsilon = 1e-9);
        assert!(linear_tau(1.0).is_err());
        assert!(linear_tau(f64::NAN).is_err());
        let mut prev = 0.0;
        for i in 0..999 {
            let t = linear_tau(i as f64 / 1000.0).unwrap();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn config_invariants() {
        let c = PendulumConfig::new(0.2, 0.6).unwrap();
        assert_abs_diff_eq!(
            c.omega() * c.omega() + c.alpha() * c.alpha(),
            1.0,
            epsilon = 4.0 * f64::EPSILON
        );
        assert!(matches!(PendulumConfig::new(0.0, 0.1), Err(Error::Degenerate(_))));
        assert!(matches!(PendulumConfig::new(0.1, 1.0), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn restoring_force_is_odd(x in -1.0f64..1.0) {
            for m in models() {
                prop_assert_eq!(m.restoring_force(-x), -m.restoring_force(x));
            }
        }

        #[test]
        fn f_and_g_are_even(x in -1.0f64..1.0) {
            for m in models() {
                prop_assert_eq!(m.f(-x), m.f(x));
                prop_assert_eq!(m.g(-x), m.g(x));
            }
        }

        #[test]
        fn restoring_force_matches_f(x in 1e-3f64..1.0, neg in any::<bool>()) {
            let x = if neg { -x } else { x };
            for m in models() {
                let lhs = m.restoring_force(x);
                let rhs = x * (1.0 + m.f(x));
                prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs(), "{}: {} vs {}", m.label(), lhs, rhs);
            }
        }
    }
}
