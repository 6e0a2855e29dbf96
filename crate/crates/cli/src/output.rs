//! CSV and JSON emission.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{json, Value};

/// Version of the JSON layout.
pub const SCHEMA: u32 = 1;

/// A command's result: one CSV table and the matching JSON body.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub json: Value,
}

impl Report {
    pub fn new(header: Vec<String>) -> Self {
        Report {
            header,
            rows: Vec::new(),
            json: Value::Null,
        }
    }

    pub fn csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().context("flushing CSV")
    }

    pub fn json_document(&self, command: &str) -> Result<Vec<u8>> {
        let doc = json!({ "schema": SCHEMA, "command": command, "result": self.json });
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    /// Writes to `out`, or stdout when absent.
    pub fn emit(&self, command: &str, as_json: bool, out: Option<&Path>) -> Result<()> {
        let bytes = if as_json { self.json_document(command)? } else { self.csv()? };
        match out {
            Some(path) => File::create(path)
                .and_then(|mut f| f.write_all(&bytes))
                .with_context(|| format!("cannot write {}", path.display())),
            None => {
                let mut stdout = io::stdout().lock();
                stdout.write_all(&bytes)?;
                Ok(stdout.flush()?)
            }
        }
    }
}

/// Shortest round-trip text of a float, in exponent form when tiny or huge.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_and_json_layout() {
        let mut r = Report::new(vec!["t".into(), "P".into()]);
        r.rows.push(vec![num(1.0), num(0.5)]);
        r.json = json!([{"t": 1.0}]);
        assert_eq!(String::from_utf8(r.csv().unwrap()).unwrap(), "t,P\n1,0.5\n");
        let doc: Value = serde_json::from_slice(&r.json_document("pressure").unwrap()).unwrap();
        assert_eq!(doc["schema"], 1);
        assert_eq!(doc["command"], "pressure");
        assert_eq!(num(8.5e-18), "8.5e-18");
        assert_eq!(num(-0.25), "-0.25");
        assert_eq!(num(0.0), "0");
    }
}
