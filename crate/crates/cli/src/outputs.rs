//! Output helpers: every artifact starts with the provenance header, CSV
//! tables get a column header line, JSON summaries embed the provenance
//! object. Formatting uses Rust's shortest-roundtrip float display, so a
//! rerun with the same seed produces byte-identical files.

use crate::error::Result;
use crate::provenance::Provenance;
use serde_json::Value;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

/// Opens `name` under `dir` with the provenance comment and CSV header
/// already written.
pub fn csv_table(
    dir: &Path,
    name: &str,
    prov: &Provenance,
    header: &str,
) -> Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    writeln!(w, "# {}", prov.comment_line())?;
    writeln!(w, "{header}")?;
    Ok(w)
}

/// Writes a JSON summary with the provenance object injected at the top
/// level under "provenance".
pub fn json_summary(dir: &Path, name: &str, prov: &Provenance, mut value: Value) -> Result<PathBuf> {
    let obj = value
        .as_object_mut()
        .expect("summaries are json objects");
    obj.insert("provenance".to_string(), serde_json::to_value(prov).expect("provenance serializes"));
    let path = dir.join(name);
    let mut w = BufWriter::new(File::create(&path)?);
    serde_json::to_writer_pretty(&mut w, &value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

/// Splices a provenance comment into a plain PNM byte stream, right after
/// the magic line; comments there survive every plain-format parser.
pub fn pnm_with_provenance(mut body: Vec<u8>, prov: &Provenance) -> Vec<u8> {
    let at = body
        .iter()
        .position(|&b| b == b'\n')
        .map(|i| i + 1)
        .unwrap_or(body.len());
    let comment = format!("# {}\n", prov.comment_line());
    body.splice(at..at, comment.into_bytes());
    body
}

/// Caps a monotone trace at `cap` entries, keeping the first point, every
/// stride-th point, and always the final value. Returns (values, stride).
pub fn decimate_trace(trace: &[f64], cap: usize) -> (Vec<f64>, usize) {
    assert!(cap >= 2, "trace cap must keep at least the endpoints");
    if trace.len() <= cap {
        return (trace.to_vec(), 1);
    }
    let stride = trace.len().div_ceil(cap);
    let mut out: Vec<f64> = trace.iter().copied().step_by(stride).collect();
    if *out.last().unwrap() != trace[trace.len() - 1] || (trace.len() - 1) % stride != 0 {
        out.push(trace[trace.len() - 1]);
    }
    (out, stride)
}
