use std::io::Write;
use std::path::Path;

use crate::optimizers::{RunTrace, TraceEvent, TraceRecord, UpdateReport};

/// Floats are written with 17 significant digits, enough to reparse the
/// exact bit pattern.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub const TRACE_HEADER: &str =
    "iter,grad_evals,optimality_gap,grad_norm_est,step_size,event,wall_time_s";

/// Writes one run trace as CSV.
pub fn emit_trace(trace: &RunTrace, path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{TRACE_HEADER}")?;
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            r.grad_evals,
            fmt_float(r.optimality_gap),
            fmt_float(r.grad_norm_est),
            fmt_float(r.step_size),
            r.event.as_str(),
            fmt_float(r.wall_time_s),
        )?;
    }
    out.flush()
}

#[derive(Debug, thiserror::Error)]
#[error("trace parse error on line {line}: {reason}")]
pub struct TraceParseError {
    pub line: usize,
    pub reason: String,
}

/// Parses a trace CSV back into records; inverse of [`emit_trace`].
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, TraceParseError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == TRACE_HEADER => {}
        other => {
            return Err(TraceParseError {
                line: 1,
                reason: format!("bad header: {other:?}"),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| TraceParseError {
            line: idx + 1,
            reason,
        };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(err(format!("expected 7 fields, got {}", fields.len())));
        }
        let parse_f = |s: &str| -> Result<f64, TraceParseError> {
            s.parse().map_err(|_| err(format!("bad float '{s}'")))
        };
        records.push(TraceRecord {
            iter: fields[0]
                .parse()
                .map_err(|_| err(format!("bad iter '{}'", fields[0])))?,
            grad_evals: fields[1]
                .parse()
                .map_err(|_| err(format!("bad grad_evals '{}'", fields[1])))?,
            optimality_gap: parse_f(fields[2])?,
            grad_norm_est: parse_f(fields[3])?,
            step_size: parse_f(fields[4])?,
            event: TraceEvent::parse(fields[5])
                .ok_or_else(|| err(format!("bad event '{}'", fields[5])))?,
            wall_time_s: parse_f(fields[6])?,
        });
    }
    Ok(records)
}

pub const MAP_DIAG_HEADER: &str =
    "update_index,at_iter,stage,newton_index,cg_iterations,grad_norm,value,step";

/// Writes the per-Newton-iteration solver diagnostics of every Hessian
/// update in one run.
pub fn emit_map_diag(updates: &[UpdateReport], path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{MAP_DIAG_HEADER}")?;
    for (update_index, update) in updates.iter().enumerate() {
        for rec in &update.diag {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                update_index,
                update.at_iter,
                rec.stage,
                rec.newton_index,
                rec.cg_iterations,
                fmt_float(rec.grad_norm),
                fmt_float(rec.value),
                fmt_float(rec.step),
            )?;
        }
    }
    out.flush()
}

/// One row of the experiment summary.
#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub method: String,
    pub seed: u64,
    pub iterations: u64,
    pub final_gap: f64,
    pub final_grad_evals: u64,
    pub total_grad_evals: u64,
    pub hessian_updates: usize,
    pub update_failures: usize,
    pub aborted_non_finite: bool,
}

pub const SUMMARY_HEADER: &str = "method,seed,iterations,final_gap,final_grad_evals,total_grad_evals,hessian_updates,update_failures,aborted";

pub fn emit_summary(rows: &[SummaryRow], path: &Path) -> std::io::Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.method,
            r.seed,
            r.iterations,
            fmt_float(r.final_gap),
            r.final_grad_evals,
            r.total_grad_evals,
            r.hessian_updates,
            r.update_failures,
            r.aborted_non_finite,
        )?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bitwise() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            f64::MIN_POSITIVE,
        ] {
            let s = fmt_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "{s}");
        }
    }

    #[test]
    fn empty_trace_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_trace(&RunTrace::default(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{TRACE_HEADER}\n"));
        assert!(parse_trace(&text).unwrap().is_empty());
    }

    #[test]
    fn trace_round_trips() {
        let trace = RunTrace {
            records: vec![
                TraceRecord {
                    iter: 1,
                    grad_evals: 10,
                    optimality_gap: 0.123456789,
                    grad_norm_est: 1.0 / 7.0,
                    step_size: 1e-3,
                    event: TraceEvent::None,
                    wall_time_s: 0.25,
                },
                TraceRecord {
                    iter: 2,
                    grad_evals: 30,
                    optimality_gap: 0.0123,
                    grad_norm_est: 2.0 / 13.0,
                    step_size: 1e-3,
                    event: TraceEvent::HessianUpdate,
                    wall_time_s: 0.5,
                },
            ],
            ..Default::default()
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        emit_trace(&trace, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let back = parse_trace(&text).unwrap();
        assert_eq!(back, trace.records);
    }
}
