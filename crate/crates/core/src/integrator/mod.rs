//! Adaptive Dormand–Prince 5(4) integration with dense output.
//!
//! Every accepted step keeps the five Hairer–Wanner continuous-extension
//! coefficients, so a [`DenseTrajectory`] can be evaluated anywhere in its
//! span without re-integrating. Zero crossings of scalar functions of the
//! state are located on that interpolant, see [`events`].

pub mod events;

pub use events::{find_events, locate_crossings, Crossing, Event, EventRun, ExtremumKind};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest step the controller may take before giving up.
const MIN_STEP: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// dense output
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Error-control and range settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on any step.
    pub max_step: f64,
    /// Hard cap on the integrated time span.
    pub t_max: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_step: 0.1,
            t_max: 1000.0,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} = {v} must be positive and finite")))
            }
        };
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("max_step", self.max_step)?;
        positive("t_max", self.t_max)?;
        if self.rtol < 1e-14 {
            return Err(Error::Domain(format!("rtol = {} is below 1e-14", self.rtol)));
        }
        Ok(())
    }

    pub fn with_atol(self, atol: f64) -> Self {
        Self { atol, ..self }
    }

    pub fn with_rtol(self, rtol: f64) -> Self {
        Self { rtol, ..self }
    }

    pub fn with_t_max(self, t_max: f64) -> Self {
        Self { t_max, ..self }
    }
}

/// One accepted step with its quartic continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment<const N: usize> {
    pub t_start: f64,
    pub t_end: f64,
    pub y_start: [f64; N],
    pub y_end: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    pub fn h(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_start <= t && t <= self.t_end
    }

    /// Interpolated state at `t`; accurate inside `[t_start, t_end]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t_start) / self.h();
        let s1 = 1.0 - s;
        let c = &self.cont;
        std::array::from_fn(|i| c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i]))))
    }
}

/// Piecewise-polynomial solution over a contiguous run of accepted steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTrajectory<const N: usize> {
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseTrajectory<N> {
    fn new() -> Self {
        Self { segments: Vec::new() }
    }

    pub fn dimension(&self) -> usize {
        N
    }

    pub fn segments(&self) -> &[Segment<N>] {
        &self.segments
    }

    pub fn t_start(&self) -> f64 {
        self.segments.first().map_or(f64::NAN, |s| s.t_start)
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(f64::NAN, |s| s.t_end)
    }

    pub fn final_state(&self) -> Option<[f64; N]> {
        self.segments.last().map(|s| s.y_end)
    }

    /// Step endpoints `(t, y)`, starting with the initial state.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, [f64; N])> + '_ {
        self.segments
            .first()
            .map(|s| (s.t_start, s.y_start))
            .into_iter()
            .chain(self.segments.iter().map(|s| (s.t_end, s.y_end)))
    }

    /// Index of the segment covering `t`, or `None` outside the span.
    pub fn segment_index(&self, t: f64) -> Option<usize> {
        if self.segments.is_empty() || !(self.t_start() <= t && t <= self.t_end()) {
            return None;
        }
        let i = self.segments.partition_point(|s| s.t_end < t);
        Some(i.min(self.segments.len() - 1))
    }

    /// Interpolated state at `t`, `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        self.segment_index(t).map(|i| self.segments[i].eval(t))
    }

    fn push(&mut self, seg: Segment<N>) {
        self.segments.push(seg);
    }
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn rms_norm<const N: usize>(v: &[f64; N], scale: &[f64; N]) -> f64 {
    (v.iter().zip(scale).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / N as f64).sqrt()
}

fn all_finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Forward Dormand–Prince stepper with FSAL reuse.
pub(crate) struct Stepper<const N: usize, F> {
    rhs: F,
    tol: Tolerances,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    last_rejected: bool,
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> Stepper<N, F> {
    pub(crate) fn new(rhs: F, t0: f64, y0: [f64; N], tol: Tolerances) -> Result<Self> {
        tol.validate()?;
        if !all_finite(&y0) || !t0.is_finite() {
            return Err(Error::Divergence { t: t0 });
        }
        let k1 = rhs(t0, &y0);
        let mut stepper = Self {
            rhs,
            tol,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            last_rejected: false,
        };
        stepper.h = stepper.initial_step();
        Ok(stepper)
    }

    pub(crate) fn t(&self) -> f64 {
        self.t
    }

    fn scale(&self, a: &[f64; N], b: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| self.tol.atol + self.tol.rtol * a[i].abs().max(b[i].abs()))
    }

    fn initial_step(&self) -> f64 {
        let sc = self.scale(&self.y, &self.y);
        let d0 = rms_norm(&self.y, &sc);
        let d1 = rms_norm(&self.k1, &sc);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.tol.max_step);
        let y1 = axpy(&self.y, &[(h0, &self.k1)]);
        let k2 = (self.rhs)(self.t + h0, &y1);
        let diff: [f64; N] = std::array::from_fn(|i| k2[i] - self.k1[i]);
        let d2 = rms_norm(&diff, &sc) / h0;
        let dmax = d1.max(d2);
        let h1 = if dmax <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / dmax).powf(0.2)
        };
        // tiny atol on a component starting at zero would otherwise force
        // a sub-ulp first step; the controller shrinks it if needed
        (100.0 * h0).min(h1).min(self.tol.max_step).max(1e-10)
    }

    /// Takes one accepted step that does not pass `t_limit`.
    pub(crate) fn step(&mut self, t_limit: f64) -> Result<Segment<N>> {
        loop {
            let mut h = self.h.min(self.tol.max_step);
            let remaining = t_limit - self.t;
            if h >= remaining {
                h = remaining;
            }
            if h < MIN_STEP && remaining > MIN_STEP {
                return Err(Error::StepUnderflow { t: self.t, h });
            }

            let (t, y, k1) = (self.t, &self.y, &self.k1);
            let rhs = &self.rhs;
            let k2 = rhs(t + C2 * h, &axpy(y, &[(h * A21, k1)]));
            let k3 = rhs(t + C3 * h, &axpy(y, &[(h * A31, k1), (h * A32, &k2)]));
            let k4 = rhs(t + C4 * h, &axpy(y, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]));
            let k5 = rhs(
                t + C5 * h,
                &axpy(y, &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
            );
            let k6 = rhs(
                t + h,
                &axpy(
                    y,
                    &[
                        (h * A61, k1),
                        (h * A62, &k2),
                        (h * A63, &k3),
                        (h * A64, &k4),
                        (h * A65, &k5),
                    ],
                ),
            );
            let y_new = axpy(
                y,
                &[
                    (h * A71, k1),
                    (h * A73, &k3),
                    (h * A74, &k4),
                    (h * A75, &k5),
                    (h * A76, &k6),
                ],
            );
            let t_new = if h == remaining { t_limit } else { t + h };
            if !all_finite(&y_new) {
                return Err(Error::Divergence { t: t_new });
            }
            let k7 = rhs(t_new, &y_new);

            let err_vec: [f64; N] = std::array::from_fn(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            });
            let err = rms_norm(&err_vec, &self.scale(y, &y_new));
            let fac_max = if self.last_rejected { 1.0 } else { FAC_MAX };
            let fac = if err == 0.0 {
                fac_max
            } else {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, fac_max)
            };

            if err <= 1.0 {
                let cont = {
                    let ydiff: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                    let bspl: [f64; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                    let c3: [f64; N] = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
                    let c4: [f64; N] = std::array::from_fn(|i| {
                        h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    });
                    [*y, ydiff, bspl, c3, c4]
                };
                let seg = Segment {
                    t_start: t,
                    t_end: t_new,
                    y_start: *y,
                    y_end: y_new,
                    cont,
                };
                self.t = t_new;
                self.y = y_new;
                self.k1 = k7;
                // a step clipped to t_limit says nothing about the natural size
                if h == self.h.min(self.tol.max_step) || fac < 1.0 {
                    self.h = h * fac;
                }
                self.last_rejected = false;
                return Ok(seg);
            }
            self.h = h * fac;
            self.last_rejected = true;
        }
    }
}

/// Integrates `y' = rhs(t, y)` from `y0` over `[t0, t1]`.
///
/// The local error of each step is held below `rtol |y| + atol` in an RMS
/// sense. Spans longer than `tol.t_max` are rejected.
pub fn integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t_span: (f64, f64),
    tol: &Tolerances,
) -> Result<DenseTrajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::Domain(format!("empty time span ({t0}, {t1})")));
    }
    if t1 - t0 > tol.t_max {
        return Err(Error::Domain(format!(
            "time span {} exceeds t_max = {}",
            t1 - t0,
            tol.t_max
        )));
    }
    let mut stepper = Stepper::new(rhs, t0, y0, *tol)?;
    let mut traj = DenseTrajectory::new();
    while stepper.t() < t1 {
        traj.push(stepper.step(t1)?);
    }
    Ok(traj)
}

/// Fixed-step Dormand–Prince (5th order weights, no error control).
///
/// Returns the state at `t1`; intended for convergence-order studies.
pub fn integrate_fixed_step<const N: usize, F>(rhs: F, y0: [f64; N], t_span: (f64, f64), steps: usize) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let (t0, t1) = t_span;
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + C2 * h, &axpy(&y, &[(h * A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, &[(h * A31, &k1), (h * A32, &k2)]));
        let k4 = rhs(t + C4 * h, &axpy(&y, &[(h * A41, &k1), (h * A42, &k2), (h * A43, &k3)]));
        let k5 = rhs(
            t + C5 * h,
            &axpy(&y, &[(h * A51, &k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
        );
        let k6 = rhs(
            t + h,
            &axpy(
                &y,
                &[
                    (h * A61, &k1),
                    (h * A62, &k2),
                    (h * A63, &k3),
                    (h * A64, &k4),
                    (h * A65, &k5),
                ],
            ),
        );
        y = axpy(
            &y,
            &[
                (h * A71, &k1),
                (h * A73, &k3),
                (h * A74, &k4),
                (h * A75, &k5),
                (h * A76, &k6),
            ],
        );
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{linear_solution, NonlinearityModel};
    use std::f64::consts::TAU;

    fn harmonic(_t: f64, y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    fn damped(alpha: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
        move |_t, y| [y[1], -2.0 * alpha * y[1] - y[0]]
    }

    #[test]
    fn harmonic_returns_after_one_period() {
        let traj = integrate(harmonic, [1.0, 0.0], (0.0, TAU), &Tolerances::default()).unwrap();
        let y = traj.final_state().unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8, "{y:?}");
        assert_eq!(traj.t_end(), TAU);
    }

    #[test]
    fn damped_linear_matches_closed_form() {
        let traj = integrate(damped(0.3), [1.0, 0.0], (0.0, 10.0), &Tolerances::default()).unwrap();
        for i in 0..=1000 {
            let t = 0.01 * i as f64;
            let y = traj.eval(t).unwrap();
            let exact = linear_solution(1.0, 0.3, t).unwrap();
            assert!((y[0] - exact.x).abs() < 1e-8, "t = {t}");
            assert!((y[1] - exact.v).abs() < 1e-8, "t = {t}");
        }
    }

    #[test]
    fn equilibrium_stays_put() {
        let traj = integrate(damped(0.2), [0.0, 0.0], (0.0, 5.0), &Tolerances::default()).unwrap();
        assert!(traj.nodes().all(|(_, y)| y == [0.0, 0.0]));
    }

    #[test]
    fn segments_are_contiguous_and_interpolant_hits_nodes() {
        let traj = integrate(damped(0.1), [0.7, 0.2], (0.0, 20.0), &Tolerances::default()).unwrap();
        for w in traj.segments().windows(2) {
            assert_eq!(w[0].t_end, w[1].t_start);
            assert_eq!(w[0].y_end, w[1].y_start);
        }
        for seg in traj.segments() {
            assert!(seg.h() <= 0.1 + 1e-15);
            let a = seg.eval(seg.t_start);
            let b = seg.eval(seg.t_end);
            for i in 0..2 {
                assert!((a[i] - seg.y_start[i]).abs() <= 1e-13);
                assert!((b[i] - seg.y_end[i]).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn eval_outside_span_is_none() {
        let traj = integrate(harmonic, [1.0, 0.0], (1.0, 2.0), &Tolerances::default()).unwrap();
        assert!(traj.eval(0.5).is_none());
        assert!(traj.eval(2.5).is_none());
        assert!(traj.eval(1.0).is_some());
        assert!(traj.eval(2.0).is_some());
    }

    #[test]
    fn rejects_bad_inputs() {
        let tol = Tolerances::default();
        assert!(matches!(
            integrate(harmonic, [1.0, 0.0], (1.0, 1.0), &tol),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            integrate(harmonic, [f64::NAN, 0.0], (0.0, 1.0), &tol),
            Err(Error::Divergence { .. })
        ));
        let bad = Tolerances { rtol: 1e-16, ..tol };
        assert!(integrate(harmonic, [1.0, 0.0], (0.0, 1.0), &bad).is_err());
        assert!(integrate(harmonic, [1.0, 0.0], (0.0, 2000.0), &tol).is_err());
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 reaches infinity at t = 1
        let r = integrate(
            |_, y: &[f64; 2]| [y[0] * y[0], 0.0],
            [1.0, 0.0],
            (0.0, 2.0),
            &Tolerances::default(),
        );
        assert!(
            matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::Divergence { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn fixed_step_order_is_five() {
        let exact = linear_solution(1.0, 0.3, 10.0).unwrap();
        let errs: Vec<f64> = [50usize, 100, 200, 400]
            .iter()
            .map(|&n| {
                let y = integrate_fixed_step(damped(0.3), [1.0, 0.0], (0.0, 10.0), n);
                (y[0] - exact.x).abs().max((y[1] - exact.v).abs())
            })
            .collect();
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!(slope >= 4.5, "slope {slope}, errors {errs:?}");
        }
    }

    #[test]
    fn energy_decays_under_damping() {
        for model in [
            NonlinearityModel::SinePendulum,
            NonlinearityModel::duffing(1.0),
            NonlinearityModel::Linear,
        ] {
            let m = model.clone();
            let rhs = move |_t: f64, y: &[f64; 2]| [y[1], -0.4 * y[1] - m.restoring_force(y[0])];
            let traj = integrate(rhs, [0.6, 0.0], (0.0, 30.0), &Tolerances::default()).unwrap();
            let energy = |y: [f64; 2]| 0.5 * y[1] * y[1] + model.potential(y[0]);
            let mut prev = f64::INFINITY;
            for (_, y) in traj.nodes() {
                let e = energy(y);
                assert!(e <= prev + 1e-10);
                prev = e;
            }
        }
    }
}
