//! Tabular outputs rendered as CSV (with a commented config echo) or JSON.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{validate_config, ConfigError, Format, ScenarioConfig};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
const ECHO_MARKER: &str = "# config:";

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Table {
    /// File stem.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Table { name: name.into(), columns, rows: Vec::new(), notes: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    /// Numeric column by name; text cells become NaN.
    pub fn numbers(&self, name: &str) -> Option<Vec<f64>> {
        Some(
            self.column(name)?
                .into_iter()
                .map(|c| match c {
                    Cell::Num(v) => *v,
                    Cell::Text(_) => f64::NAN,
                })
                .collect(),
        )
    }

    /// Value for `key` in a two-column `quantity,value` table.
    pub fn lookup(&self, key: &str) -> Option<&Cell> {
        self.rows.iter().find(|r| matches!(&r[0], Cell::Text(k) if k == key)).map(|r| &r[1])
    }
}

/// Plain decimal with at least 15 significant digits.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).clamp(0, 340) as usize;
    format!("{v:.decimals$}")
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_number(*v),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

pub fn render_csv(table: &Table, cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("# adiatomo {VERSION}\n"));
    out.push_str(&format!("# scenario: {}\n", cfg.scenario));
    out.push_str(&format!("# seed: {}\n", cfg.simulation.seed));
    for n in &table.notes {
        out.push_str(&format!("# note: {n}\n"));
    }
    out.push_str(ECHO_MARKER);
    out.push('\n');
    for line in cfg.to_toml().lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str(&format!("# {line}\n"));
        }
    }
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        out.push_str(&row.iter().map(csv_field).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    version: &'a str,
    scenario: String,
    seed: u64,
    notes: &'a [String],
    config: &'a ScenarioConfig,
    columns: &'a [String],
    rows: &'a [Vec<Cell>],
}

pub fn render_json(table: &Table, cfg: &ScenarioConfig) -> String {
    let doc = JsonDoc {
        version: VERSION,
        scenario: cfg.scenario.to_string(),
        seed: cfg.simulation.seed,
        notes: &table.notes,
        config: cfg,
        columns: &table.columns,
        rows: &table.rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("output serializes to JSON");
    s.push('\n');
    s
}

pub fn render(table: &Table, cfg: &ScenarioConfig) -> (String, String) {
    match cfg.output.format {
        Format::Csv => (format!("{}.csv", table.name), render_csv(table, cfg)),
        Format::Json => (format!("{}.json", table.name), render_json(table, cfg)),
    }
}

/// Configuration echoed in the comment header of a CSV output.
pub fn parse_config_echo(csv: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut lines = csv.lines().skip_while(|l| *l != ECHO_MARKER);
    if lines.next().is_none() {
        return Err(ConfigError::Parse("no config echo in header".into()));
    }
    let text: Vec<&str> = lines
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')))
        .collect();
    validate_config(&text.join("\n"))
}

/// Data lines of a CSV output (column header and rows, no comments).
pub fn csv_body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

/// Write every table into `dir`, creating it if needed.
pub fn write_tables(dir: &Path, tables: &[Table], cfg: &ScenarioConfig) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    tables
        .iter()
        .map(|t| {
            let (name, body) = render(t, cfg);
            let path = dir.join(name);
            fs::write(&path, body)?;
            Ok(path)
        })
        .collect()
}
