//! Run manifests and the CSV / JSON file formats.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Provenance written into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub determinism: String,
    /// Every argument of the invocation, keyed by name.
    pub parameters: serde_json::Value,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            determinism: "deterministic: no random seed; identical arguments give identical data"
                .to_string(),
            parameters,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// JSON file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub manifest: RunManifest,
    pub data: T,
}

/// Full-precision float: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV table with `#` metadata lines.
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    results: Vec<(String, String)>,
}

impl Csv {
    pub fn new(header: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
            results: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    /// Summary value written as `# result.<key>: <value>`.
    pub fn result(&mut self, key: &str, value: impl Into<String>) {
        self.results.push((key.to_string(), value.into()));
    }

    pub fn render(&self, manifest: &RunManifest) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# command: {}", manifest.command);
        let _ = writeln!(out, "# version: {}", manifest.version);
        let _ = writeln!(out, "# determinism: {}", manifest.determinism);
        if let Some(map) = manifest.parameters.as_object() {
            for (k, v) in map {
                let _ = writeln!(out, "# param.{k}: {v}");
            }
        }
        let _ = writeln!(out, "# timestamp: {}", manifest.timestamp);
        for (k, v) in &self.results {
            let _ = writeln!(out, "# result.{k}: {v}");
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn write_file(path: &Path, contents: &str) -> std::io::Result<()> {
    std::fs::write(path, contents)
}

pub fn render_json<T: Serialize>(manifest: &RunManifest, data: &T) -> serde_json::Result<String> {
    let mut s = serde_json::to_string_pretty(&Document {
        manifest: manifest.clone(),
        data,
    })?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let manifest = RunManifest {
            command: "simulate".into(),
            version: "0".into(),
            determinism: "d".into(),
            parameters: serde_json::json!({"tol": 1e-12, "c": "0.3,0.4"}),
            timestamp: "T".into(),
        };
        let mut csv = Csv::new(["t", "p_1"]);
        csv.row(vec!["0".into(), num(0.1)]);
        csv.result("steps", "1");
        let text = csv.render(&manifest);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command: simulate");
        assert_eq!(lines[3], "# param.c: \"0.3,0.4\"");
        assert_eq!(lines[4], "# param.tol: 1e-12");
        assert_eq!(lines[5], "# timestamp: T");
        assert_eq!(lines[6], "# result.steps: 1");
        assert_eq!(lines[7], "t,p_1");
        assert_eq!(lines[8], "0,1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
