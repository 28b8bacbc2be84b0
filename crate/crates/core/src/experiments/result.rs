use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use super::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub name: String,
    pub value: String,
    pub unit: String,
}

/// A named CSV table, written as `series_<name>.csv` unless it is one of the
/// experiment's auxiliary files.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: String,
    pub rows: Vec<String>,
}

impl Table {
    pub fn series(name: &str, header: &str) -> Self {
        Self { file_name: format!("series_{name}.csv"), header: header.to_string(), rows: Vec::new() }
    }

    pub fn file(file_name: &str, header: &str) -> Self {
        Self { file_name: file_name.to_string(), header: header.to_string(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: String) {
        self.rows.push(row);
    }
}

/// A pass/fail acceptance check with a human-readable measurement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpResult {
    /// `exp1` .. `exp5`.
    pub id: String,
    pub metrics: Vec<Metric>,
    pub tables: Vec<Table>,
    pub gates: Vec<Gate>,
    /// Files written verbatim, keyed by file name.
    pub attachments: Vec<(String, String)>,
}

impl ExpResult {
    pub fn new(id: &str) -> Self {
        Self { id: id.to_string(), metrics: Vec::new(), tables: Vec::new(), gates: Vec::new(), attachments: Vec::new() }
    }

    pub fn metric(&mut self, name: &str, value: impl ToString, unit: &str) {
        self.metrics.push(Metric { name: name.to_string(), value: value.to_string(), unit: unit.to_string() });
    }

    pub fn gate(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.gates.push(Gate { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.gates.iter().all(|g| g.passed)
    }

    pub fn metric_value(&self, name: &str) -> Option<&str> {
        self.metrics.iter().find(|m| m.name == name).map(|m| m.value.as_str())
    }

    pub fn table(&self, file_name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.file_name == file_name)
    }

    /// Writes `metrics.csv`, every table and attachment into `dir`.
    pub fn write(&self, dir: &Path, config: &RunConfig) -> io::Result<()> {
        fs::create_dir_all(dir)?;
        let mut metrics = Table::file("metrics.csv", "metric,value,unit");
        for m in &self.metrics {
            metrics.push(format!("{},{},{}", m.name, m.value, m.unit));
        }
        for g in &self.gates {
            metrics.push(format!(
                "gate:{},{},{}",
                g.name,
                if g.passed { "pass" } else { "fail" },
                csv_field(&g.detail)
            ));
        }
        for t in std::iter::once(&metrics).chain(&self.tables) {
            fs::write(dir.join(&t.file_name), render_table(t, config))?;
        }
        for (name, body) in &self.attachments {
            fs::write(dir.join(name), body)?;
        }
        Ok(())
    }
}

/// `#`-prefixed lines naming the seed, config digest and gas schedule.
pub fn provenance_header(config: &RunConfig) -> String {
    format!("# seed={}\n# config_digest={}\n# gas_schedule={}\n", config.seed(), config.digest(), config.schedule)
}

pub fn render_table(t: &Table, config: &RunConfig) -> String {
    let mut out = provenance_header(config);
    let _ = writeln!(out, "{}", t.header);
    for r in &t.rows {
        let _ = writeln!(out, "{r}");
    }
    out
}

/// Quotes a value containing commas or quotes.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Fixed two-decimal percentage, so outputs never depend on float formatting
/// of long fractions.
pub fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}
