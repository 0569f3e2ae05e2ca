//! Report structure and the CSV/JSON writers.

use std::path::{Path, PathBuf};

use abring_core::connection::HolonomyMatrix;
use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{Experiment, Format, ScenarioConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// One machine-checked claim.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl Assertion {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= tolerance,
            value,
            tolerance,
            detail: format!("{value:e} <= {tolerance:e}"),
        }
    }

    /// Passes when `value >= bound`.
    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value >= bound,
            value,
            tolerance: bound,
            detail: format!("{value} >= {bound}"),
        }
    }

    pub fn holds(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.to_string(), passed, value: if passed { 1.0 } else { 0.0 }, tolerance: 1.0, detail }
    }
}

/// A named table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Matrix entries as `row_k,col_k,re,im`.
    pub fn from_matrix(name: &str, m: &HolonomyMatrix) -> Self {
        let mut t = Table::new(name, &["row_k", "col_k", "re", "im"]);
        let w = m.window();
        for (r, kr) in w.indices().enumerate() {
            for (c, kc) in w.indices().enumerate() {
                let z = m.entries()[(r, c)];
                t.push(vec![kr.into(), kc.into(), z.re.into(), z.im.into()]);
            }
        }
        t
    }

    fn as_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|r| Value::Object(self.header.iter().cloned().zip(r.iter().cloned()).collect::<Map<_, _>>()))
            .collect();
        Value::Array(rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: Experiment,
    pub config: ScenarioConfig,
    pub summary: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(experiment: Experiment, config: &ScenarioConfig) -> Self {
        let mut config = config.clone();
        config.experiment = Some(experiment);
        Self { experiment, config, summary: Map::new(), assertions: Vec::new(), tables: Vec::new() }
    }

    pub fn note<V: Into<Value>>(&mut self, key: &str, value: V) {
        self.summary.insert(key.to_string(), value.into());
    }

    pub fn check(&mut self, assertion: Assertion) {
        self.assertions.push(assertion);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Writes the report into `dir` and returns the paths written.
    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let mut written = Vec::new();
        let mut series = Map::new();
        for table in &self.tables {
            if format.csv() {
                let path = dir.join(format!("{}.csv", table.name));
                write_csv(&path, table)?;
                series.insert(table.name.clone(), Value::String(format!("{}.csv", table.name)));
                written.push(path);
            } else {
                series.insert(table.name.clone(), table.as_json());
            }
        }
        if format.json() {
            let doc = serde_json::json!({
                "schema_version": SCHEMA_VERSION,
                "experiment": self.experiment.name(),
                "passed": self.passed(),
                "config": self.config,
                "summary": self.summary,
                "assertions": self.assertions,
                "series": series,
            });
            let path = dir.join("report.json");
            let text = serde_json::to_string_pretty(&doc)?;
            std::fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row.iter().map(cell))?;
    }
    w.flush()?;
    Ok(())
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}
