//! Command-line front end for `osc-time-core`.
//!
//! Exit codes: 0 on success, 1 on numerical or I/O failure, 2 on invalid
//! arguments. Data goes to `--out` or standard output, diagnostics to
//! standard error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod svg;
pub mod table;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::commands::Output;
use crate::error::CliError;

/// Environment variable capping the worker thread count.
pub const THREADS_VAR: &str = "OSC_TIME_THREADS";

fn init_threads() {
    let Ok(v) = std::env::var(THREADS_VAR) else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            // fails only if a pool already exists, e.g. on a second run() in-process
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring {THREADS_VAR}={v:?}, expected a positive integer"),
    }
}

fn write_output(bytes: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn dispatch(cmd: &Command) -> Result<(Output, Option<&Path>), CliError> {
    Ok(match cmd {
        Command::Simulate(a) => (commands::simulate(a)?, a.out.out.as_deref()),
        Command::Tau(a) => (commands::tau(a)?, a.out.out.as_deref()),
        Command::Sweep(a) => (commands::sweep_cmd(a)?, a.out.out.as_deref()),
        Command::MinAlpha(a) => (commands::min_alpha(a)?, a.out.out.as_deref()),
        Command::Sensitivity(a) => (commands::sensitivity(a)?, a.out.out.as_deref()),
        Command::Verify(a) => (commands::verify(a)?, a.out.out.as_deref()),
        Command::Plot(a) => (commands::plot(a)?, a.out.as_deref()),
    })
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_threads();
    let result = dispatch(&cli.command).and_then(|(output, path)| {
        write_output(&output.bytes, path)?;
        Ok(output.failure)
    });
    match result {
        Ok(None) => 0,
        Ok(Some(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
