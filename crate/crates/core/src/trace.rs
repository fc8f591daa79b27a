//! Fixed-format trace files.
//!
//! One row per completed iteration, comma separated, after one header row.
//! Base columns, in this exact order: `k`, `proximity`, `d_1 … d_m`,
//! `norm_x`, `elapsed_ns`. Minimization traces append `alpha`, `phi`,
//! `snorm`, `zero_branch` (0/1). Floats are written in shortest
//! round-trip decimal form.
//!
//! `elapsed_ns` is written as 0 unless timings are requested: wall time is
//! the one nondeterministic field, and trace files are otherwise
//! byte-reproducible from the same configuration and seed.

use std::io::{self, BufRead, Write};

use crate::dsap::RunTrace;

/// Writes `trace` in the fixed column format.
pub fn write_trace<W: Write>(out: &mut W, trace: &RunTrace, with_timings: bool) -> io::Result<()> {
    let first = trace
        .records
        .first()
        .expect("a trace always carries the k = 0 record");
    let m = first.set_distances.len();
    let extended = first.step.is_some();

    let mut header = String::from("k,proximity");
    for i in 1..=m {
        header.push_str(&format!(",d_{i}"));
    }
    header.push_str(",norm_x,elapsed_ns");
    if extended {
        header.push_str(",alpha,phi,snorm,zero_branch");
    }
    writeln!(out, "{header}")?;

    for r in &trace.records {
        let mut row = format!("{},{}", r.k, r.proximity);
        for d in &r.set_distances {
            row.push_str(&format!(",{d}"));
        }
        let elapsed = if with_timings { r.elapsed.as_nanos() } else { 0 };
        row.push_str(&format!(",{},{}", r.x.norm(), elapsed));
        if let Some(s) = &r.step {
            row.push_str(&format!(
                ",{},{},{},{}",
                s.alpha,
                s.phi,
                s.subgrad_norm,
                u8::from(s.zero_branch)
            ));
        }
        writeln!(out, "{row}")?;
    }
    Ok(())
}

/// A trace file read back as named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceData {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TraceData {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// All values of one named column.
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column(name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Parses a trace file produced by [`write_trace`].
pub fn read_trace<R: BufRead>(input: R) -> io::Result<TraceData> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "empty trace file"))??;
    let columns: Vec<String> = header.split(',').map(str::to_owned).collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.parse::<f64>().map_err(|e| {
                    io::Error::new(
                        io::ErrorKind::InvalidData,
                        format!("row {}: bad field {f:?}: {e}", lineno + 2),
                    )
                })
            })
            .collect::<io::Result<_>>()?;
        if row.len() != columns.len() {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!(
                    "row {}: {} fields, header has {}",
                    lineno + 2,
                    row.len(),
                    columns.len()
                ),
            ));
        }
        rows.push(row);
    }
    Ok(TraceData { columns, rows })
}
