//! Golden-section minimisation and Richardson extrapolation.

/// `(sqrt 5 - 1) / 2`
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub fx: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    pub evaluations: usize,
}

/// Golden-section search for a minimum of a unimodal `f` on `[lo, hi]`,
/// shrinking the bracket below `xtol`.
///
/// Returns the best point seen. Errors from `f` abort the search.
pub fn golden_section<E, F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<GoldenResult, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    while b - a > xtol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    Ok(GoldenResult {
        x,
        fx,
        lo: a,
        hi: b,
        evaluations,
    })
}

/// Polynomial (Neville) extrapolation of `values[i] ~ F(steps[i])` to step 0.
///
/// Entry `k` of the result uses the first `k + 1` points, so successive
/// entries show how the estimate converges.
pub fn richardson_to_zero(steps: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(steps.len(), values.len());
    let n = steps.len();
    let mut table = values.to_vec();
    let mut diagonal = Vec::with_capacity(n);
    // after pass j, table[i] extrapolates points i..=i+j
    for j in 0..n {
        if j > 0 {
            for i in 0..n - j {
                let (hi, hj) = (steps[i], steps[i + j]);
                table[i] = (hi * table[i + 1] - hj * table[i]) / (hi - hj);
            }
        }
        diagonal.push(table[0]);
    }
    diagonal
}
