//! Per-round trace files.
//!
//! Floats are written with 17 significant digits in scientific notation, so
//! reading a file back yields the same bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fastbelief_core::regret::TrajectoryTrace;

use crate::error::{CliError, CliResult};

pub const TRACE_HEADER: [&str; 10] = [
    "t",
    "loss",
    "cum_loss",
    "grad_inf_norm",
    "step_inf_norm",
    "alpha_t",
    "beta2_t",
    "cond4_min",
    "cond4_max",
    "gamma_min",
];

/// One row of a trace file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: u64,
    pub loss: f64,
    pub cum_loss: f64,
    pub grad_inf_norm: f64,
    pub step_inf_norm: f64,
    pub alpha_t: f64,
    pub beta2_t: f64,
    pub cond4_min: f64,
    pub cond4_max: f64,
    pub gamma_min: f64,
}

impl TraceRow {
    fn floats(&self) -> [f64; 9] {
        [
            self.loss,
            self.cum_loss,
            self.grad_inf_norm,
            self.step_inf_norm,
            self.alpha_t,
            self.beta2_t,
            self.cond4_min,
            self.cond4_max,
            self.gamma_min,
        ]
    }
}

pub fn rows_from_trace(trace: &TrajectoryTrace) -> Vec<TraceRow> {
    trace
        .records
        .iter()
        .map(|r| TraceRow {
            t: r.t,
            loss: r.loss,
            cum_loss: r.cum_loss,
            grad_inf_norm: r.grad_inf_norm,
            step_inf_norm: r.step_inf_norm,
            alpha_t: r.alpha_t,
            beta2_t: r.beta2_t,
            cond4_min: r.cond4_min,
            cond4_max: r.cond4_max,
            gamma_min: r.gamma_min,
        })
        .collect()
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn serialize(rows: &[TraceRow]) -> String {
    let mut out = String::with_capacity(64 + rows.len() * 220);
    out.push_str(&TRACE_HEADER.join(","));
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}", row.t);
        for v in row.floats() {
            out.push(',');
            out.push_str(&fmt_f64(v));
        }
        out.push('\n');
    }
    out
}

pub fn parse(text: &str, origin: &str) -> CliResult<Vec<TraceRow>> {
    let malformed = |line: usize, message: String| CliError::MalformedTrace { path: origin.to_string(), line, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == TRACE_HEADER.join(",") => {}
        Some((_, h)) => return Err(malformed(1, format!("unexpected header `{h}`"))),
        None => return Err(malformed(1, "file is empty".into())),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != TRACE_HEADER.len() {
            return Err(malformed(line_no, format!("expected {} fields, found {}", TRACE_HEADER.len(), fields.len())));
        }
        let t = fields[0]
            .parse::<u64>()
            .map_err(|_| malformed(line_no, format!("round `{}` is not an integer", fields[0])))?;
        let mut v = [0.0; 9];
        for (slot, (name, f)) in v.iter_mut().zip(TRACE_HEADER[1..].iter().zip(&fields[1..])) {
            *slot = f.parse::<f64>().map_err(|_| malformed(line_no, format!("{name} `{f}` is not a number")))?;
        }
        let expected = rows.len() as u64 + 1;
        if t != expected {
            return Err(malformed(line_no, format!("round {t} out of sequence, expected {expected}")));
        }
        rows.push(TraceRow {
            t,
            loss: v[0],
            cum_loss: v[1],
            grad_inf_norm: v[2],
            step_inf_norm: v[3],
            alpha_t: v[4],
            beta2_t: v[5],
            cond4_min: v[6],
            cond4_max: v[7],
            gamma_min: v[8],
        });
    }
    if rows.is_empty() {
        return Err(malformed(1, "no data rows".into()));
    }
    Ok(rows)
}

pub fn write(path: &Path, rows: &[TraceRow]) -> CliResult<()> {
    fs::write(path, serialize(rows)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> CliResult<Vec<TraceRow>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(t: u64, x: f64) -> TraceRow {
        TraceRow {
            t,
            loss: x,
            cum_loss: -x,
            grad_inf_norm: 0.1,
            step_inf_norm: 1e-300,
            alpha_t: 1.0 / 3.0,
            beta2_t: f64::MIN_POSITIVE,
            cond4_min: f64::NEG_INFINITY,
            cond4_max: f64::INFINITY,
            gamma_min: 0.0,
        }
    }

    #[test]
    fn header_is_exact() {
        let text = serialize(&[row(1, 2.0)]);
        assert!(text.starts_with("t,loss,cum_loss,grad_inf_norm,step_inf_norm,alpha_t,beta2_t,cond4_min,cond4_max,gamma_min\n"));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn special_values_round_trip() {
        let rows = vec![row(1, f64::MAX), row(2, -0.0), row(3, 5e-324)];
        let back = parse(&serialize(&rows), "mem").unwrap();
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.t, b.t);
            for (x, y) in a.floats().iter().zip(b.floats()) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(parse("", "mem").is_err());
        assert!(parse("t,loss\n1,2\n", "mem").is_err());
        let good = serialize(&[row(1, 1.0), row(2, 1.0)]);
        assert!(parse(&good.replace("\n2,", "\n3,"), "mem").is_err());
        assert!(parse(&good.replacen("1.0000000000000000e0", "one", 1), "mem").is_err());
        let header_only = format!("{}\n", TRACE_HEADER.join(","));
        assert!(parse(&header_only, "mem").is_err());
    }
}
