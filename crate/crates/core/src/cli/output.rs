//! Writers for the run artifacts. Floats use the shortest decimal that
//! parses back to the same value; lines end in `\n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::integrators::TraceRecord;

pub const TRACE_HEADER: &str = "t,energy,helicity,probe_linking";

/// Shortest round-trip decimal (`{:?}` on `f64`, which switches to
/// exponent notation for very large and very small magnitudes).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in records {
        let probe = r.probe_linking.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{}", fmt_f64(r.t), fmt_f64(r.energy), fmt_f64(r.helicity), probe);
    }
    out
}

pub fn state_csv(dim: usize, records: &[TraceRecord]) -> String {
    let mut out = String::from("t");
    for i in 0..dim {
        let _ = write!(out, ",x{i}");
    }
    out.push('\n');
    for r in records {
        out.push_str(&fmt_f64(r.t));
        for v in r.state.iter() {
            out.push(',');
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn json_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

pub fn write(dir: &Path, name: &str, text: &str) -> std::io::Result<()> {
    fs::write(dir.join(name), text)
}
