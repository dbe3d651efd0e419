//! CSV and JSON writers.
//!
//! CSV reals carry 17 significant digits so they read back to the same
//! `f64`. JSON uses serde's shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::bench::compare::ComparisonReport;
use crate::bench::sweep::SweepResult;
use crate::error::Result;
use crate::model::SimTrace;
use crate::optimal::RankedScenario;

pub const TRACE_HEADER: [&str; 8] = ["t", "decision", "mu", "m", "u", "I", "U_cum", "T_acc"];
pub const REPORT_HEADER: [&str; 7] = [
    "benchmark_id",
    "criterion_id",
    "params",
    "total_time",
    "relative",
    "num_lb",
    "scenario",
];

/// `x` with 17 significant digits, positional for moderate exponents.
pub fn fmt_real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("exponent digits");
    if (-5..=16).contains(&exp) {
        format!("{x:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

pub fn write_trace_csv<W: Write>(out: W, trace: &SimTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_HEADER)?;
    for r in &trace.rows {
        w.write_record([
            r.t.to_string(),
            r.decision.to_string(),
            fmt_real(r.mu),
            fmt_real(r.m),
            fmt_real(r.u),
            fmt_real(r.imbalance),
            fmt_real(r.u_cum),
            fmt_real(r.t_acc),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_csv<W: Write>(out: W, report: &ComparisonReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPORT_HEADER)?;
    for r in &report.rows {
        w.write_record([
            r.benchmark_id.clone(),
            r.criterion_id.clone(),
            r.params.clone(),
            fmt_real(r.total_time),
            fmt_real(r.relative),
            r.num_lb.to_string(),
            r.scenario.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, sweep: &SweepResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([sweep.family.param(), "total_time", "num_lb"])?;
    for p in &sweep.points {
        w.write_record([fmt_real(p.value), fmt_real(p.total_time), p.num_lb.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Ranked scenarios, one per line, cheapest first.
pub fn write_ranked_csv<W: Write>(out: W, ranked: &[RankedScenario]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "total_time", "num_lb", "scenario"])?;
    for (k, r) in ranked.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            fmt_real(r.total_time),
            r.scenario.len().to_string(),
            r.scenario.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(mut out: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

/// Creates `path` and hands a buffered writer to `f`.
pub fn to_file<F>(path: &Path, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}
