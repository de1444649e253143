//! Command grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use osc_time_core::{NonlinearityModel, Tolerances};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "osc-time",
    version,
    about = "Oscillation time of the damped nonlinear pendulum"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectory `t,x,v` sampled at a fixed stride
    Simulate(SimulateArgs),
    /// Oscillation time at one or more amplitudes and one damping value
    Tau(TauArgs),
    /// Oscillation times over an (x0, alpha) grid
    Sweep(SweepArgs),
    /// Damping that minimises the oscillation time
    MinAlpha(MinAlphaArgs),
    /// Damping sensitivities with a finite-difference cross-check
    Sensitivity(SensitivityArgs),
    /// Run the self-check suite
    Verify(VerifyArgs),
    /// Render tau against alpha as SVG
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Linear,
    Sine,
    Duffing,
    Poly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "sine")]
    pub model: ModelKind,
    /// Duffing coefficient in f(x) = -a x^2 (comma list allowed for `plot`)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a: Vec<f64>,
    /// Even polynomial coefficients of x^2, x^4, ...
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub coeffs: Vec<f64>,
}

impl ModelArgs {
    /// All models described by the flags. Only `duffing` may yield several.
    pub fn models(&self) -> Result<Vec<NonlinearityModel>, CliError> {
        if self.model != ModelKind::Duffing && !self.a.is_empty() {
            return Err(CliError::Usage("--a only applies to --model duffing".into()));
        }
        if self.model != ModelKind::Poly && !self.coeffs.is_empty() {
            return Err(CliError::Usage("--coeffs only applies to --model poly".into()));
        }
        match self.model {
            ModelKind::Linear => Ok(vec![NonlinearityModel::Linear]),
            ModelKind::Sine => Ok(vec![NonlinearityModel::SinePendulum]),
            ModelKind::Duffing => {
                if self.a.is_empty() {
                    return Err(CliError::Usage("--model duffing needs --a".into()));
                }
                self.a
                    .iter()
                    .map(|&a| {
                        if a.is_finite() {
                            Ok(NonlinearityModel::duffing(a))
                        } else {
                            Err(CliError::Usage(format!("--a must be finite, got {a}")))
                        }
                    })
                    .collect()
            }
            ModelKind::Poly => {
                if self.coeffs.is_empty() {
                    return Err(CliError::Usage("--model poly needs --coeffs".into()));
                }
                Ok(vec![NonlinearityModel::even_polynomial(self.coeffs.clone())?])
            }
        }
    }

    /// The single model described by the flags.
    pub fn model(&self) -> Result<NonlinearityModel, CliError> {
        let mut m = self.models()?;
        if m.len() != 1 {
            return Err(CliError::Usage("exactly one --a value expected".into()));
        }
        Ok(m.remove(0))
    }
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    #[arg(long, default_value_t = Tolerances::default().rtol)]
    pub rtol: f64,
    #[arg(long, default_value_t = Tolerances::default().atol)]
    pub atol: f64,
    /// Longest integration span
    #[arg(long, default_value_t = Tolerances::default().t_max)]
    pub t_max: f64,
}

impl TolArgs {
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        let t = Tolerances::default()
            .with_rtol(self.rtol)
            .with_atol(self.atol)
            .with_t_max(self.t_max);
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Output file (standard output when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct AlphaRange {
    #[arg(long, default_value_t = 0.0)]
    pub alpha_min: f64,
    #[arg(long, default_value_t = 0.9)]
    pub alpha_max: f64,
    #[arg(long, default_value_t = 91)]
    pub alpha_steps: usize,
}

impl AlphaRange {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi) = (self.alpha_min, self.alpha_max);
        if !(lo.is_finite() && hi.is_finite()) || hi < lo {
            return Err(CliError::Usage(format!("invalid alpha range [{lo}, {hi}]")));
        }
        if self.alpha_steps == 0 || (self.alpha_steps == 1 && hi != lo) {
            return Err(CliError::Usage("--alpha-steps must be at least 2 for a range".into()));
        }
        check_alpha(lo)?;
        check_alpha(hi)?;
        Ok(osc_time_core::analysis::linspace(lo, hi, self.alpha_steps))
    }
}

pub fn check_alpha(alpha: f64) -> Result<(), CliError> {
    if alpha.is_finite() && alpha.abs() < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "alpha = {alpha} is outside the oscillatory range |alpha| < 1"
        )))
    }
}

pub fn check_x0s(x0s: &[f64]) -> Result<(), CliError> {
    if x0s.is_empty() {
        return Err(CliError::Usage("--x0 is required".into()));
    }
    for &x in x0s {
        if !x.is_finite() || x == 0.0 {
            return Err(CliError::Usage(format!("x0 = {x} must be finite and non-zero")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 20.0)]
    pub t_end: f64,
    /// Output sampling interval
    #[arg(long, default_value_t = 0.01)]
    pub stride: f64,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TauArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
    pub x0: Vec<f64>,
    #[command(flatten)]
    pub alpha: AlphaRange,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct MinAlphaArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub x0: Vec<f64>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SensitivityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub x0: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Evaluation times (defaults to 1, 2, pi and the half oscillation time)
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub tol: TolArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Render an existing sweep CSV instead of computing one
    #[arg(long, conflicts_with_all = ["x0", "a", "coeffs"])]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Amplitudes (defaults to 0.1, 0.5, 0.8, 1.2)
    #[arg(long, value_delimiter = ',')]
    pub x0: Vec<f64>,
    #[command(flatten)]
    pub alpha: AlphaRange,
    #[command(flatten)]
    pub tol: TolArgs,
    /// Output file (standard output when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}
