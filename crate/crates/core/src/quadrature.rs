//! Adaptive Gauss–Kronrod (7, 15) quadrature.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 30;

/// Kronrod estimate and `|Kronrod - Gauss|` on `[a, b]`.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: (f64, f64), tol: f64, depth: u32) -> (f64, f64) {
    let (value, err) = whole;
    if err <= tol || depth >= MAX_DEPTH {
        return (value, err);
    }
    let m = 0.5 * (a + b);
    let left = gk15(f, a, m);
    let right = gk15(f, m, b);
    let (lv, le) = adapt(f, a, m, left, 0.5 * tol, depth + 1);
    let (rv, re) = adapt(f, m, b, right, 0.5 * tol, depth + 1);
    (lv + rv, le + re)
}

/// `int_a^b f` to absolute tolerance `abs_tol`. Returns the value and an
/// error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let whole = gk15(&f, a, b);
    adapt(&f, a, b, whole, abs_tol, 0)
}

/// Sum of [`integrate`] over consecutive breakpoints, splitting the tolerance
/// by interval length.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], abs_tol: f64) -> (f64, f64) {
    let (Some(first), Some(last)) = (breakpoints.first(), breakpoints.last()) else {
        return (0.0, 0.0);
    };
    let span = (last - first).abs().max(f64::MIN_POSITIVE);
    breakpoints.windows(2).fold((0.0, 0.0), |(v, e), w| {
        let (dv, de) = integrate(&f, w[0], w[1], abs_tol * (w[1] - w[0]).abs() / span);
        (v + dv, e + de)
    })
}
