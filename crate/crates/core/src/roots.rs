//! Bracketed scalar root finding.

/// Result of a bracketed root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    /// Best estimate of the root.
    pub root: f64,
    /// Function value at `root`.
    pub value: f64,
    /// Final bracket; `f` changes sign (or vanishes) on `[lo, hi]`.
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl RootBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Brent's method (bisection safeguarding secant and inverse quadratic steps).
///
/// `fa` and `fb` must be `f(a)` and `f(b)` and must not share a sign. Iteration
/// stops once the bracket is narrower than `xtol` plus a few ulps of the root,
/// or after `max_iter` iterations.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    max_iter: usize,
) -> RootBracket {
    debug_assert!(fa * fb <= 0.0, "root not bracketed: f({a}) = {fa}, f({b}) = {fb}");
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    if fa == 0.0 {
        return RootBracket {
            root: a,
            value: 0.0,
            lo: a,
            hi: a,
            iterations: 0,
        };
    }
    if fb == 0.0 {
        return RootBracket {
            root: b,
            value: 0.0,
            lo: b,
            hi: b,
            iterations: 0,
        };
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            break;
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = f(b);
    }

    let (lo, hi) = if fb == 0.0 {
        (b, b)
    } else if b < c {
        (b, c)
    } else {
        (c, b)
    };
    RootBracket {
        root: b,
        value: fb,
        lo,
        hi,
        iterations,
    }
}
