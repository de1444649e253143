//! Closed-form reference values used by the self-checks.

use std::f64::consts::PI;

/// Arithmetic–geometric mean of `a` and `b` (both positive).
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let next = (0.5 * (a + b), (a * b).sqrt());
        if (next.0 - next.1).abs() <= 1e-16 * next.0 {
            return next.0;
        }
        (a, b) = next;
    }
    a
}

/// Complete elliptic integral of the first kind, `K(k)` with modulus `k`.
pub fn elliptic_k(k: f64) -> f64 {
    PI / (2.0 * agm(1.0, ((1.0 - k) * (1.0 + k)).sqrt()))
}

/// Period of the undamped pendulum `x'' + sin x = 0` released at rest from
/// `x0`: `4 K(sin(x0 / 2))`.
pub fn pendulum_period(x0: f64) -> f64 {
    4.0 * elliptic_k((0.5 * x0).sin())
}

/// `(X, V) = d(x, v)/dalpha` at `alpha = 0` for the linear oscillator.
pub fn linear_sensitivity_undamped(x0: f64, t: f64) -> (f64, f64) {
    let (s, c) = t.sin_cos();
    (x0 * (s - t * c), x0 * t * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_amplitude_period_is_two_pi() {
        assert!((pendulum_period(1e-8) - 2.0 * PI).abs() < 1e-12);
        assert_eq!(elliptic_k(0.0), PI / 2.0);
    }

    #[test]
    fn known_elliptic_value() {
        // K(1/sqrt 2) = Gamma(1/4)^2 / (4 sqrt(pi))
        let k = elliptic_k(std::f64::consts::FRAC_1_SQRT_2);
        assert!((k - 1.854_074_677_301_372).abs() < 1e-14);
    }
}
