//! Tabular experiment output with a metadata envelope.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{Map, Value};

/// Bumped whenever the byte layout of either output format changes.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub format_version: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Scalar results, in insertion order.
    pub summary: Vec<(String, String)>,
}

impl ExperimentReport {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        ExperimentReport {
            metadata: Metadata {
                command: command.to_string(),
                parameters: BTreeMap::new(),
                seed: None,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                format_version: FORMAT_VERSION,
            },
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.metadata.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match columns");
        self.rows.push(row);
    }

    pub fn summarize(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// Metadata and summary go in leading `#` lines; the table follows.
    pub fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        out.push_str(&format!("# command: {}\n", m.command));
        out.push_str(&format!("# tool_version: {}\n", m.tool_version));
        out.push_str(&format!("# format_version: {}\n", m.format_version));
        if let Some(seed) = m.seed {
            out.push_str(&format!("# seed: {seed}\n"));
        }
        for (k, v) in &m.parameters {
            out.push_str(&format!("# param {k}: {v}\n"));
        }
        for (k, v) in &self.summary {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        push_csv_line(&mut out, &self.columns);
        for row in &self.rows {
            push_csv_line(&mut out, row);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(|v| Value::String(v.clone())))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let summary: Map<String, Value> = self
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        let doc = serde_json::json!({
            "metadata": self.metadata,
            "columns": self.columns,
            "rows": rows,
            "summary": summary,
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }
}

fn push_csv_line(out: &mut String, fields: &[String]) {
    let cells: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
    out.push_str(&cells.join(","));
    out.push('\n');
}

fn csv_field(f: &str) -> String {
    if f.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        let mut r = ExperimentReport::new("demo", &["k", "note"]);
        r.param("n", 3).param("alg", "lru");
        r.push_row(vec!["1".into(), "a,b".into()]);
        r.push_row(vec!["2".into(), "say \"hi\"".into()]);
        r.summarize("total", "7/2");
        r
    }

    #[test]
    fn csv_layout() {
        let text = sample().to_csv();
        let expected = format!(
            "# command: demo\n# tool_version: {}\n# format_version: 1\n\
             # param alg: lru\n# param n: 3\n# total: 7/2\n\
             k,note\n1,\"a,b\"\n2,\"say \"\"hi\"\"\"\n",
            env!("CARGO_PKG_VERSION")
        );
        assert_eq!(text, expected);
    }

    #[test]
    fn json_mirrors_csv() {
        let v: Value = serde_json::from_str(&sample().to_json()).unwrap();
        assert_eq!(v["metadata"]["command"], "demo");
        assert_eq!(v["rows"][0]["note"], "a,b");
        assert_eq!(v["summary"]["total"], "7/2");
        assert_eq!(v["columns"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn output_is_deterministic() {
        assert_eq!(sample().to_json(), sample().to_json());
        assert_eq!(sample().to_csv(), sample().to_csv());
    }
}
