//! Numerical experiments built on the oscillation timings: the small-amplitude
//! period coefficient, the damping that minimises the oscillation time,
//! parameter sweeps and the approach to critical damping.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, Tolerances};
use crate::model::{linear_tau, rhs_base, NonlinearityModel, State};
use crate::optimize::{golden_section, richardson_to_zero};
use crate::oscillation::{half_oscillation_time, oscillation_time, scaled_tolerances};

/// Default amplitudes for [`fit_period_coefficient`].
pub const DEFAULT_FIT_AMPLITUDES: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
/// Default damping values for [`blowup_scan`].
pub const DEFAULT_BLOWUP_ALPHAS: [f64; 3] = [0.9, 0.99, 0.999];
/// Amplitudes plotted in the pendulum sweep figure.
pub const FIGURE_AMPLITUDES: [f64; 4] = [0.1, 0.5, 0.8, 1.2];

/// Coarse scan for [`find_min_alpha`]: `alpha = k / 100`, `k = 0..=95`.
const SCAN_STEPS: usize = 95;
const SCAN_SPACING: f64 = 0.01;
/// Width of the golden-section bracket at termination.
const MIN_ALPHA_XTOL: f64 = 1e-6;
/// A minimum shallower than this below `tau(x0, 0)` is not reported.
pub const DIP_THRESHOLD: f64 = 1e-7;
/// Successive extrapolants closer than this count as converged.
const FIT_NOISE_FLOOR: f64 = 1e-7;

/// Small-amplitude fit of `tau_half(x0, 0) ~ pi (1 + c x0^2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodFit {
    pub amplitudes: Vec<f64>,
    /// `(tau_half(x0, 0) / pi - 1) / x0^2` per amplitude.
    pub raw: Vec<f64>,
    /// Richardson extrapolants in `x0^2`; entry `k` uses the first `k + 1`
    /// amplitudes.
    pub extrapolants: Vec<f64>,
    /// Extrapolated coefficient.
    pub c: f64,
    /// `a / 8`.
    pub a_over_8: f64,
    /// `3a / 8`, the Lindstedt–Poincaré coefficient.
    pub three_a_over_8: f64,
}

/// Estimates `c` in `tau_half(x0, 0) ~ pi (1 + c x0^2)` by Richardson
/// extrapolation in `x0^2` over decreasing amplitudes.
pub fn fit_period_coefficient(model: &NonlinearityModel, amplitudes: &[f64], tol: &Tolerances) -> Result<PeriodFit> {
    if amplitudes.len() < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 amplitudes, got {}",
            amplitudes.len()
        )));
    }
    if amplitudes.iter().any(|x| !(*x > 0.0 && x.is_finite())) || amplitudes.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Domain(
            "amplitudes must be positive and strictly decreasing".into(),
        ));
    }
    let raw = amplitudes
        .par_iter()
        .map(|&x0| {
            let r = half_oscillation_time(model, x0, 0.0, tol)?;
            Ok((r.tau_half / std::f64::consts::PI - 1.0) / (x0 * x0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let steps: Vec<f64> = amplitudes.iter().map(|x| x * x).collect();
    let extrapolants = richardson_to_zero(&steps, &raw);
    let diffs: Vec<f64> = extrapolants.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    if let [.., prev, last] = diffs[..] {
        if last > prev && last > FIT_NOISE_FLOOR {
            return Err(Error::Fit(format!("extrapolants diverge: {extrapolants:?}")));
        }
    }
    let a = model.a();
    Ok(PeriodFit {
        amplitudes: amplitudes.to_vec(),
        raw,
        c: *extrapolants.last().expect("at least three extrapolants"),
        extrapolants,
        a_over_8: a / 8.0,
        three_a_over_8: 3.0 * a / 8.0,
    })
}

/// An interior minimum of `alpha -> tau(x0, alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinResult {
    pub x0: f64,
    pub alpha_star: f64,
    pub tau_star: f64,
    /// Coarse-scan neighbours of the minimum; `tau` at both ends exceeds
    /// `tau_star`.
    pub bracket: (f64, f64),
    /// Final golden-section bracket.
    pub refined: (f64, f64),
    /// `tau(x0, 0) - tau_star`.
    pub dip: f64,
    pub tau_at_zero: f64,
}

/// Outcome of [`find_min_alpha`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MinSearch {
    Interior(MinResult),
    /// The coarse scan never dips below `tau(x0, 0)` (by more than
    /// [`DIP_THRESHOLD`]). `scan` holds the `(alpha, tau)` samples.
    NoInteriorMinimum {
        x0: f64,
        scan: Vec<(f64, f64)>,
    },
}

impl MinSearch {
    pub fn interior(&self) -> Option<&MinResult> {
        match self {
            Self::Interior(m) => Some(m),
            Self::NoInteriorMinimum { .. } => None,
        }
    }
}

/// The coarse `alpha` grid used by [`find_min_alpha`].
pub fn min_scan_grid() -> Vec<f64> {
    (0..=SCAN_STEPS).map(|k| k as f64 * SCAN_SPACING).collect()
}

/// Locates the damping that minimises the oscillation time.
///
/// Scans `alpha = 0, 0.01, ..., 0.95`, then refines around the smallest
/// sample by golden-section search to a bracket of width `1e-6`.
pub fn find_min_alpha(model: &NonlinearityModel, x0: f64, tol: &Tolerances) -> Result<MinSearch> {
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(Error::Domain(format!("x0 = {x0} must lie in (0, 1)")));
    }
    let grid = min_scan_grid();
    let taus = grid
        .par_iter()
        .map(|&alpha| oscillation_time(model, x0, alpha, tol))
        .collect::<Result<Vec<f64>>>()?;
    let (best, _) = taus
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty scan");
    let tau_at_zero = taus[0];
    if best == 0 || best == grid.len() - 1 {
        return Ok(MinSearch::NoInteriorMinimum {
            x0,
            scan: grid.into_iter().zip(taus).collect(),
        });
    }
    let bracket = (grid[best - 1], grid[best + 1]);
    let refined = golden_section(
        |alpha| oscillation_time(model, x0, alpha, tol),
        bracket.0,
        bracket.1,
        MIN_ALPHA_XTOL,
    )?;
    let (alpha_star, tau_star) = match refined.fx.partial_cmp(&taus[best]) {
        Some(Ordering::Greater) => (grid[best], taus[best]),
        _ => (refined.x, refined.fx),
    };
    let dip = tau_at_zero - tau_star;
    if dip <= DIP_THRESHOLD {
        return Ok(MinSearch::NoInteriorMinimum {
            x0,
            scan: grid.into_iter().zip(taus).collect(),
        });
    }
    Ok(MinSearch::Interior(MinResult {
        x0,
        alpha_star,
        tau_star,
        bracket,
        refined: (refined.lo, refined.hi),
        dip,
        tau_at_zero,
    }))
}

/// One grid point of a sweep. Failed points carry NaN timings and the error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub x0: f64,
    pub alpha: f64,
    pub tau_half: f64,
    pub tau: f64,
    pub x_hat0: f64,
    pub tau_linear: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepRow {
    pub fn compute(model: &NonlinearityModel, x0: f64, alpha: f64, tol: &Tolerances) -> Self {
        let tau_linear = linear_tau(alpha).unwrap_or(f64::NAN);
        match half_oscillation_time(model, x0, alpha, tol) {
            Ok(r) => Self {
                x0,
                alpha,
                tau_half: r.tau_half,
                tau: r.tau,
                x_hat0: r.x_hat0,
                tau_linear,
                error: None,
            },
            Err(e) => Self {
                x0,
                alpha,
                tau_half: f64::NAN,
                tau: f64::NAN,
                x_hat0: f64::NAN,
                tau_linear,
                error: Some(e.to_string()),
            },
        }
    }
}

/// Oscillation times over an `(x0, alpha)` grid, rows ordered by `x0` then
/// `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub model: NonlinearityModel,
    pub x0s: Vec<f64>,
    pub alphas: Vec<f64>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// Rows for one amplitude, in increasing `alpha`.
    pub fn series(&self, x0: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.x0 == x0)
    }
}

fn sorted_unique(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `alpha_steps` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        n => (0..n)
            .map(|k| {
                if k == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Evaluates every grid point independently; a failing point is recorded in
/// its row and does not stop the sweep.
pub fn sweep(model: &NonlinearityModel, x0s: &[f64], alphas: &[f64], tol: &Tolerances) -> SweepTable {
    let x0s = sorted_unique(x0s);
    let alphas = sorted_unique(alphas);
    let grid: Vec<(f64, f64)> = x0s.iter().flat_map(|&x| alphas.iter().map(move |&a| (x, a))).collect();
    let rows = grid
        .par_iter()
        .map(|&(x0, alpha)| SweepRow::compute(model, x0, alpha, tol))
        .collect();
    SweepTable {
        model: model.clone(),
        x0s,
        alphas,
        rows,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupPoint {
    pub alpha: f64,
    /// `None` when no full oscillation completes before the time cap.
    pub tau: Option<f64>,
    pub tau_linear: f64,
}

impl BlowupPoint {
    pub fn exceeds_cap(&self) -> bool {
        self.tau.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub x0: f64,
    pub points: Vec<BlowupPoint>,
    /// `tau` strictly increases along the list (a capped point counts as
    /// larger than any finite one).
    pub strictly_increasing: bool,
    /// Every finite `tau` exceeds the linear oscillation time.
    pub above_linear: bool,
}

/// Oscillation time along damping values increasing toward 1.
pub fn blowup_scan(model: &NonlinearityModel, x0: f64, alphas: &[f64], tol: &Tolerances) -> Result<BlowupReport> {
    if alphas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("damping values must be strictly increasing".into()));
    }
    let points = alphas
        .par_iter()
        .map(|&alpha| {
            let tau_linear = linear_tau(alpha)?;
            match oscillation_time(model, x0, alpha, tol) {
                Ok(tau) => Ok(BlowupPoint {
                    alpha,
                    tau: Some(tau),
                    tau_linear,
                }),
                Err(Error::NoOscillation { .. }) => Ok(BlowupPoint {
                    alpha,
                    tau: None,
                    tau_linear,
                }),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let as_key = |p: &BlowupPoint| p.tau.unwrap_or(f64::INFINITY);
    let strictly_increasing = points.windows(2).all(|w| match (w[0].tau, w[1].tau) {
        (None, None) => true,
        _ => as_key(&w[1]) > as_key(&w[0]),
    });
    let above_linear = points.iter().all(|p| p.tau.is_none_or(|t| t > p.tau_linear));
    Ok(BlowupReport {
        x0,
        points,
        strictly_increasing,
        above_linear,
    })
}

/// `max |x(t) - x0 cos t|` over one undamped period, sampled on a fine grid.
pub fn linearisation_error(model: &NonlinearityModel, x0: f64, tol: &Tolerances) -> Result<f64> {
    let tau = oscillation_time(model, x0, 0.0, tol)?;
    let scaled = scaled_tolerances(tol, x0, 0.0)?;
    let field = |_t: f64, y: &[f64; 2]| rhs_base(model, 0.0, State::from_array(*y)).to_array();
    let traj = integrate(field, [x0, 0.0], (0.0, tau), &scaled)?;
    let samples = 4000;
    Ok((0..=samples)
        .map(|k| tau * k as f64 / samples as f64)
        .map(|t| (traj.eval(t).expect("inside span")[0] - x0 * t.cos()).abs())
        .fold(0.0, f64::max))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
