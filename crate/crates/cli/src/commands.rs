//! Subcommand implementations. Each returns the bytes to emit.

use std::f64::consts::PI;

use osc_time_core::analysis::{find_min_alpha, sweep, MinSearch, FIGURE_AMPLITUDES};
use osc_time_core::integrator::integrate;
use osc_time_core::verify::{all_passed, run_suite};
use osc_time_core::{half_oscillation_time, rhs_base, sensitivity_at, NonlinearityModel, State, SweepRow};

use crate::args::{
    check_alpha, check_x0s, Format, MinAlphaArgs, PlotArgs, SensitivityArgs, SimulateArgs, SweepArgs, TauArgs,
    VerifyArgs,
};
use crate::error::CliError;
use crate::svg::{reference_from_rows, render, series_from_rows};
use crate::table::{num, write_columns, write_rows};

/// Step of the central difference in `sensitivity`.
pub const FD_STEP: f64 = 1e-5;

/// Command output plus whether it should be reported as a numerical failure.
pub struct Output {
    pub bytes: Vec<u8>,
    pub failure: Option<String>,
}

impl Output {
    fn ok(bytes: Vec<u8>) -> Self {
        Self { bytes, failure: None }
    }
}

fn no_svg(cmd: &str) -> CliError {
    CliError::Usage(format!("{cmd} has no svg output"))
}

pub fn simulate(a: &SimulateArgs) -> Result<Output, CliError> {
    let model = a.model.model()?;
    let tol = a.tol.tolerances()?;
    if !a.x0.is_finite() || !a.alpha.is_finite() {
        return Err(CliError::Usage("x0 and alpha must be finite".into()));
    }
    if !(a.t_end > 0.0 && a.t_end.is_finite()) {
        return Err(CliError::Usage(format!("--t-end must be positive, got {}", a.t_end)));
    }
    if !(a.stride > 0.0 && a.stride.is_finite()) {
        return Err(CliError::Usage(format!("--stride must be positive, got {}", a.stride)));
    }
    let alpha = a.alpha;
    let rhs = |_t: f64, y: &[f64; 2]| rhs_base(&model, alpha, State::from_array(*y)).to_array();
    let traj = integrate(rhs, [a.x0, 0.0], (0.0, a.t_end), &tol)?;
    let n = (a.t_end / a.stride * (1.0 + 1e-12)).floor() as usize;
    let rows: Vec<Vec<f64>> = (0..=n)
        .map(|k| {
            let t = (k as f64 * a.stride).min(a.t_end);
            let y = traj.eval(t).expect("t inside the integrated span");
            vec![t, y[0], y[1]]
        })
        .collect();
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => write_columns(&["t", "x", "v"], &rows, &mut buf)?,
        Format::Json => {
            let pts: Vec<_> = rows
                .iter()
                .map(|r| serde_json::json!({"t": r[0], "x": r[1], "v": r[2]}))
                .collect();
            serde_json::to_writer_pretty(&mut buf, &pts)?;
            buf.push(b'\n');
        }
        Format::Svg => return Err(no_svg("simulate")),
    }
    Ok(Output::ok(buf))
}

fn emit_rows(rows: &[SweepRow], format: Format) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_rows(rows, &mut buf)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, rows)?;
            buf.push(b'\n');
        }
        Format::Svg => {
            let series = series_from_rows(rows, "");
            buf = render(&series, reference_from_rows(rows).as_ref())?.into_bytes();
        }
    }
    Ok(buf)
}

pub fn tau(a: &TauArgs) -> Result<Output, CliError> {
    let model = a.model.model()?;
    let tol = a.tol.tolerances()?;
    check_x0s(&a.x0)?;
    check_alpha(a.alpha)?;
    if a.out.format == Format::Svg {
        return Err(no_svg("tau"));
    }
    let mut x0s = a.x0.clone();
    x0s.sort_by(f64::total_cmp);
    x0s.dedup();
    let rows = x0s
        .iter()
        .map(|&x0| {
            half_oscillation_time(&model, x0, a.alpha, &tol)
                .map(|r| SweepRow {
                    x0,
                    alpha: a.alpha,
                    tau_half: r.tau_half,
                    tau: r.tau,
                    x_hat0: r.x_hat0,
                    tau_linear: osc_time_core::linear_tau(a.alpha).unwrap_or(f64::NAN),
                    error: None,
                })
                .map_err(CliError::from)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Output::ok(emit_rows(&rows, a.out.format)?))
}

fn failed_rows(rows: &[SweepRow]) -> Option<String> {
    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| {
            r.error
                .as_ref()
                .map(|e| format!("x0={} alpha={}: {e}", num(r.x0), num(r.alpha)))
        })
        .collect();
    (!failed.is_empty()).then(|| format!("{} grid point(s) failed:\n{}", failed.len(), failed.join("\n")))
}

pub fn sweep_cmd(a: &SweepArgs) -> Result<Output, CliError> {
    let model = a.model.model()?;
    let tol = a.tol.tolerances()?;
    check_x0s(&a.x0)?;
    let alphas = a.alpha.values()?;
    let table = sweep(&model, &a.x0, &alphas, &tol);
    let mut out = Output::ok(emit_rows(&table.rows, a.out.format)?);
    out.failure = failed_rows(&table.rows);
    Ok(out)
}

pub fn min_alpha(a: &MinAlphaArgs) -> Result<Output, CliError> {
    let model = a.model.model()?;
    let tol = a.tol.tolerances()?;
    check_x0s(&a.x0)?;
    if let Some(x) = a.x0.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
        return Err(CliError::Usage(format!("min-alpha needs 0 < x0 < 1, got {x}")));
    }
    let results =
        a.x0.iter()
            .map(|&x0| find_min_alpha(&model, x0, &tol).map_err(CliError::from))
            .collect::<Result<Vec<_>, _>>()?;
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(&mut buf);
            w.write_record(["x0", "interior", "alpha_star", "tau_star", "tau_at_zero", "dip"])?;
            for r in &results {
                let rec = match r {
                    MinSearch::Interior(m) => [
                        num(m.x0),
                        "true".into(),
                        num(m.alpha_star),
                        num(m.tau_star),
                        num(m.tau_at_zero),
                        num(m.dip),
                    ],
                    MinSearch::NoInteriorMinimum { x0, scan } => [
                        num(*x0),
                        "false".into(),
                        num(f64::NAN),
                        num(f64::NAN),
                        num(scan.first().map_or(f64::NAN, |p| p.1)),
                        num(f64::NAN),
                    ],
                };
                w.write_record(rec)?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &results)?;
            buf.push(b'\n');
        }
        Format::Svg => return Err(no_svg("min-alpha")),
    }
    Ok(Output::ok(buf))
}

pub fn sensitivity(a: &SensitivityArgs) -> Result<Output, CliError> {
    let model = a.model.model()?;
    let tol = a.tol.tolerances()?;
    check_x0s(&[a.x0])?;
    check_alpha(a.alpha)?;
    check_alpha(a.alpha.abs() + FD_STEP)?;
    let times = if a.t.is_empty() {
        let th = half_oscillation_time(&model, a.x0, a.alpha, &tol)?.tau_half;
        vec![1.0, 2.0, PI, th]
    } else {
        a.t.clone()
    };
    if let Some(t) = times.iter().find(|&&t| !(t > 0.0 && t.is_finite())) {
        return Err(CliError::Usage(format!("--t must be positive, got {t}")));
    }
    let rows = times
        .iter()
        .map(|&t| -> Result<Vec<f64>, CliError> {
            let s = sensitivity_at(&model, a.x0, a.alpha, t, &tol)?;
            let p = sensitivity_at(&model, a.x0, a.alpha + FD_STEP, t, &tol)?;
            let q = sensitivity_at(&model, a.x0, a.alpha - FD_STEP, t, &tol)?;
            let fd_x = (p.x - q.x) / (2.0 * FD_STEP);
            let fd_v = (p.v - q.v) / (2.0 * FD_STEP);
            Ok(vec![
                t,
                s.x,
                s.v,
                s.x_alpha,
                s.v_alpha,
                fd_x,
                fd_v,
                (s.x_alpha - fd_x).abs(),
                (s.v_alpha - fd_v).abs(),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let header = ["t", "x", "v", "X", "V", "FD_X", "FD_V", "err_X", "err_V"];
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => write_columns(&header, &rows, &mut buf)?,
        Format::Json => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| {
                    serde_json::Value::Object(
                        header
                            .iter()
                            .map(|h| h.to_string())
                            .zip(r.iter().map(|&v| v.into()))
                            .collect(),
                    )
                })
                .collect();
            serde_json::to_writer_pretty(&mut buf, &objs)?;
            buf.push(b'\n');
        }
        Format::Svg => return Err(no_svg("sensitivity")),
    }
    Ok(Output::ok(buf))
}

pub fn verify(a: &VerifyArgs) -> Result<Output, CliError> {
    let tol = a.tol.tolerances()?;
    let checks = run_suite(&tol);
    let mut buf = Vec::new();
    match a.out.format {
        Format::Csv => {
            for c in &checks {
                buf.extend_from_slice(c.line().as_bytes());
                buf.push(b'\n');
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut buf, &checks)?;
            buf.push(b'\n');
        }
        Format::Svg => return Err(no_svg("verify")),
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    Ok(Output {
        bytes: buf,
        failure: (!all_passed(&checks)).then(|| format!("{failed} of {} checks failed", checks.len())),
    })
}

pub fn plot(a: &PlotArgs) -> Result<Output, CliError> {
    let (series, reference, failure) = if let Some(path) = &a.input {
        let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut rows = crate::table::read_rows(file)?;
        rows.sort_by(|p, q| p.x0.total_cmp(&q.x0).then(p.alpha.total_cmp(&q.alpha)));
        (series_from_rows(&rows, ""), reference_from_rows(&rows), None)
    } else {
        let models = a.model.models()?;
        let tol = a.tol.tolerances()?;
        let x0s = if a.x0.is_empty() {
            FIGURE_AMPLITUDES.to_vec()
        } else {
            a.x0.clone()
        };
        check_x0s(&x0s)?;
        let alphas = a.alpha.values()?;
        let mut series = Vec::new();
        let mut all_rows = Vec::new();
        for m in &models {
            let table = sweep(m, &x0s, &alphas, &tol);
            let suffix = if models.len() > 1 {
                format!(" {}", m.label())
            } else {
                String::new()
            };
            series.extend(series_from_rows(&table.rows, &suffix));
            all_rows.extend(table.rows);
        }
        let linear = models.iter().all(|m| *m == NonlinearityModel::Linear);
        let reference = if linear { None } else { reference_from_rows(&all_rows) };
        (series, reference, failed_rows(&all_rows))
    };
    let svg = render(&series, reference.as_ref())?;
    Ok(Output {
        bytes: svg.into_bytes(),
        failure,
    })
}
