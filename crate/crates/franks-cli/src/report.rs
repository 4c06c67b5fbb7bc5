//! CSV assembly.
//!
//! One header plus one comma-separated row per check, floats at 17
//! significant digits. Runtimes are tracked per row but never written to
//! the CSV, keeping identical runs byte-identical.

use std::io::Write;

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub experiment: &'static str,
    /// Semicolon-joined parameter tuple (no commas).
    pub params: String,
    pub measured: f64,
    /// Predicted value or bound the measurement is held against.
    pub predicted: f64,
    pub pass: bool,
    pub runtime_ms: f64,
}

impl ReportRow {
    pub fn new(
        experiment: &'static str,
        params: impl Into<String>,
        measured: f64,
        predicted: f64,
        pass: bool,
    ) -> ReportRow {
        ReportRow {
            experiment,
            params: params.into(),
            measured,
            predicted,
            pass,
            runtime_ms: 0.0,
        }
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "experiment,params,measured,predicted,pass")?;
    for r in rows {
        debug_assert!(!r.params.contains(','), "params must not contain commas");
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{}",
            r.experiment, r.params, r.measured, r.predicted, r.pass
        )?;
    }
    Ok(())
}

pub fn all_pass(rows: &[ReportRow]) -> bool {
    rows.iter().all(|r| r.pass)
}
