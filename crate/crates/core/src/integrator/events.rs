//! Zero-crossing detection on dense output.
//!
//! A scalar event function `g(t, y)` is sampled at the endpoints of every
//! accepted step. A sign change marks a bracket, which is refined with Brent's
//! method on the step's interpolant. Detection is armed only once `|g|` has
//! exceeded a threshold, so a start at `g = 0` is not reported.

use serde::{Deserialize, Serialize};

use super::{DenseTrajectory, Segment, Stepper, Tolerances};
use crate::error::{Error, Result};
use crate::roots::brent;

/// Root brackets are refined to this width (plus a few ulps of `t`).
pub const EVENT_TIME_TOL: f64 = 1e-13;
const EVENT_MAX_ITER: usize = 200;
/// Crossings closer than this to the start are ignored.
const ARM_DELAY: f64 = 1e-9;

/// A located zero of an event function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<const N: usize> {
    pub t: f64,
    pub state: [f64; N],
    /// `g` went from negative to positive.
    pub rising: bool,
    pub bracket: (f64, f64),
}

/// Kind of extremum of `x` signalled by a zero of its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    LocalMax,
    LocalMin,
}

/// An extremum of the position found as a zero of the velocity component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<const N: usize> {
    pub t_star: f64,
    pub state_star: [f64; N],
    pub kind: ExtremumKind,
    /// Final root-finding bracket around `t_star`.
    pub bracket: (f64, f64),
}

/// Events together with the trajectory they were found on.
#[derive(Debug, Clone)]
pub struct EventRun<const N: usize, E> {
    pub events: Vec<E>,
    pub trajectory: DenseTrajectory<N>,
}

fn refine<const N: usize, G>(seg: &Segment<N>, g: &G, a: f64, b: f64, ga: f64, gb: f64) -> Crossing<N>
where
    G: Fn(f64, &[f64; N]) -> f64,
{
    let r = brent(|t| g(t, &seg.eval(t)), a, b, ga, gb, EVENT_TIME_TOL, EVENT_MAX_ITER);
    Crossing {
        t: r.root,
        state: seg.eval(r.root),
        rising: ga < 0.0 || gb > 0.0,
        bracket: (r.lo, r.hi),
    }
}

/// Integrates from `(t0, y0)` until `n` zero crossings of `g` are found.
///
/// Detection arms once `|g| > arm_threshold` at a step endpoint later than
/// `t0 + 1e-9`, and re-arms the same way after every crossing. Fails with
/// [`Error::NoOscillation`] when `t0 + tol.t_max` is reached first.
pub fn locate_crossings<const N: usize, F, G>(
    rhs: F,
    y0: [f64; N],
    t0: f64,
    g: G,
    n: usize,
    arm_threshold: f64,
    tol: &Tolerances,
) -> Result<EventRun<N, Crossing<N>>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(f64, &[f64; N]) -> f64,
{
    if n == 0 {
        return Err(Error::Domain("at least one crossing must be requested".into()));
    }
    let t_limit = t0 + tol.t_max;
    let mut stepper = Stepper::new(rhs, t0, y0, *tol)?;
    let mut trajectory = DenseTrajectory::new();
    let mut found = Vec::with_capacity(n);
    // last armed endpoint value of g
    let mut armed: Option<f64> = None;

    while found.len() < n {
        if stepper.t() >= t_limit {
            return Err(Error::NoOscillation {
                found: found.len(),
                requested: n,
                t_max: tol.t_max,
            });
        }
        let seg = stepper.step(t_limit)?;
        let g_end = g(seg.t_end, &seg.y_end);
        match armed {
            Some(g_start) if g_end == 0.0 || g_start * g_end < 0.0 => {
                let c = refine(&seg, &g, seg.t_start, seg.t_end, g_start, g_end);
                found.push(c);
                armed = None;
            }
            Some(_) => armed = Some(g_end),
            None => {}
        }
        if armed.is_none() && g_end.abs() > arm_threshold && seg.t_end > t0 + ARM_DELAY {
            // the crossing just recorded may sit at the very end of the step
            if found.last().is_none_or(|c| c.t < seg.t_end) {
                armed = Some(g_end);
            }
        }
        trajectory.push(seg);
    }
    Ok(EventRun {
        events: found,
        trajectory,
    })
}

/// First `n` positive-time zeros of component `event_component` (the
/// velocity) of a system started at rest.
///
/// A rising zero of the velocity is a local minimum of the position and a
/// falling one a local maximum. The start, where the velocity vanishes, is
/// not counted.
pub fn find_events<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    event_component: usize,
    n: usize,
    tol: &Tolerances,
) -> Result<EventRun<N, Event<N>>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    if event_component >= N {
        return Err(Error::Domain(format!(
            "event component {event_component} out of range for a {N}-dimensional system"
        )));
    }
    let run = locate_crossings(rhs, y0, 0.0, |_, y: &[f64; N]| y[event_component], n, tol.atol, tol)?;
    let events = run
        .events
        .into_iter()
        .map(|c| Event {
            t_star: c.t,
            state_star: c.state,
            kind: if c.rising {
                ExtremumKind::LocalMin
            } else {
                ExtremumKind::LocalMax
            },
            bracket: c.bracket,
        })
        .collect();
    Ok(EventRun {
        events,
        trajectory: run.trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::brent;
    use std::f64::consts::PI;

    fn damped(alpha: f64) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
        move |_t, y| [y[1], -2.0 * alpha * y[1] - y[0]]
    }

    #[test]
    fn harmonic_extrema() {
        let run = find_events(damped(0.0), [1.0, 0.0], 1, 2, &Tolerances::default()).unwrap();
        let [e1, e2] = [run.events[0], run.events[1]];
        assert_eq!(e1.kind, ExtremumKind::LocalMin);
        assert_eq!(e2.kind, ExtremumKind::LocalMax);
        assert!((e1.t_star - PI).abs() < 1e-9);
        assert!((e2.t_star - 2.0 * PI).abs() < 1e-9);
        assert!((e1.state_star[0] + 1.0).abs() < 1e-9);
        assert!(e1.state_star[1].abs() <= 1e-12);
    }

    #[test]
    fn damped_first_extremum() {
        let run = find_events(damped(0.6), [1.0, 0.0], 1, 1, &Tolerances::default()).unwrap();
        assert!((run.events[0].t_star - 3.926_990_816_987_241_5).abs() < 1e-9);
    }

    #[test]
    fn overdamped_has_no_oscillation() {
        let r = find_events(damped(1.2), [1.0, 0.0], 1, 2, &Tolerances::default());
        assert!(matches!(r, Err(Error::NoOscillation { requested: 2, .. })), "{r:?}");
    }

    #[test]
    fn kinds_alternate() {
        let run = find_events(damped(0.05), [0.5, 0.0], 1, 6, &Tolerances::default()).unwrap();
        for (i, e) in run.events.iter().enumerate() {
            let expected = if i % 2 == 0 {
                ExtremumKind::LocalMin
            } else {
                ExtremumKind::LocalMax
            };
            assert_eq!(e.kind, expected);
            assert!(e.bracket.1 - e.bracket.0 <= EVENT_TIME_TOL + 8.0 * f64::EPSILON * e.t_star);
        }
    }

    #[test]
    fn refinement_is_idempotent() {
        let run = find_events(damped(0.2), [0.3, 0.0], 1, 2, &Tolerances::default()).unwrap();
        for e in &run.events {
            let i = run.trajectory.segment_index(e.t_star).unwrap();
            let seg = &run.trajectory.segments()[i];
            let v = |t: f64| seg.eval(t)[1];
            let (lo, hi) = e.bracket;
            if lo == hi {
                continue;
            }
            let again = brent(v, lo, hi, v(lo), v(hi), EVENT_TIME_TOL, 200);
            assert!((again.root - e.t_star).abs() < 1e-13);
        }
    }

    #[test]
    fn bad_component_is_rejected() {
        assert!(find_events(damped(0.0), [1.0, 0.0], 2, 1, &Tolerances::default()).is_err());
        assert!(find_events(damped(0.0), [1.0, 0.0], 1, 0, &Tolerances::default()).is_err());
    }

    #[test]
    fn generic_threshold_crossing() {
        // x(t) = cos t crosses 0.5 at pi/3
        let run = locate_crossings(
            damped(0.0),
            [1.0, 0.0],
            0.0,
            |_, y: &[f64; 2]| y[0] - 0.5,
            1,
            1e-12,
            &Tolerances::default(),
        )
        .unwrap();
        let c = run.events[0];
        assert!(!c.rising);
        assert!((c.t - PI / 3.0).abs() < 1e-9);
    }
}
