use relukan::Result;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

/// Schema version stamped into every metadata sidecar; bump when any column
/// layout changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Writes one CSV file: a header row, then rows of pre-formatted fields.
/// Floats are formatted with Display, which round-trips f64 exactly, so
/// identical runs produce byte-identical files.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// key=value sidecar describing a run; carries no timestamps or host info
/// so that re-runs are byte-identical.
pub struct Metadata {
    pairs: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str) -> Self {
        let mut m = Metadata { pairs: Vec::new() };
        m.push("command", command);
        m.push("schema", SCHEMA_VERSION);
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.pairs.push((key.to_string(), value.to_string()));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for (k, v) in &self.pairs {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Median as the exact middle element for odd counts, mean of the two middle
/// elements otherwise.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
