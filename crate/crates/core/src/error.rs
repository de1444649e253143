use thiserror::Error;

/// Failures raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The initial deviation is zero, so there is nothing to time.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Fewer zero crossings than requested before the time cap.
    #[error("no oscillation: found {found} of {requested} crossings before t = {t_max}")]
    NoOscillation { found: usize, requested: usize, t_max: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state at t = {t}")]
    Divergence { t: f64 },

    /// The polar angle stopped advancing.
    #[error("phase stall at t = {t}: angular velocity {rate:e}")]
    PhaseStall { t: f64, rate: f64 },

    #[error("singular denominator x(1 + f(x)) = {0:e}")]
    SingularDenominator(f64),

    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;
