//! CSV encoding of sweep rows.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so a
//! written table parses back to the same bits and re-encodes to the same
//! bytes.

use std::io::{Read, Write};

use osc_time_core::SweepRow;

use crate::error::CliError;

pub const HEADER: [&str; 6] = ["x0", "alpha", "tau_half", "tau", "x_hat0", "tau_linear"];

/// Shortest decimal that parses back to `v`, in exponent form for very
/// small or large magnitudes.
pub fn num(v: f64) -> String {
    let m = v.abs();
    if m == 0.0 || !m.is_finite() || (1e-5..1e16).contains(&m) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

pub fn write_rows<W: Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for r in rows {
        w.write_record([r.x0, r.alpha, r.tau_half, r.tau, r.x_hat0, r.tau_linear].map(num))?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_string(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_rows(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<SweepRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(HEADER) {
        return Err(CliError::Usage(format!(
            "unexpected CSV header {:?}, want {}",
            header.iter().collect::<Vec<_>>(),
            HEADER.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 6];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("row {}: not a number: {field:?}", i + 1)))?;
        }
        rows.push(SweepRow {
            x0: v[0],
            alpha: v[1],
            tau_half: v[2],
            tau: v[3],
            x_hat0: v[4],
            tau_linear: v[5],
            error: None,
        });
    }
    Ok(rows)
}

/// Writes generic numeric columns.
pub fn write_columns<W: Write>(header: &[&str], rows: &[Vec<f64>], out: W) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|&v| num(v)))?;
    }
    w.flush()?;
    Ok(())
}
