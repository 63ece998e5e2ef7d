use std::fmt::Write as _;

use serde_json::{Map, Value};

/// One output value.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Text(x.to_string())
    }
}

/// Fixed notation with `precision` decimals, switching to scientific
/// notation (same number of mantissa decimals) below `1e-3` so that small
/// quantities keep their digits. Ties round half to even; a rounded zero
/// never carries a minus sign.
pub fn format_number(x: f64, precision: usize) -> String {
    if !x.is_finite() {
        return String::new();
    }
    let s = if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.precision$e}")
    } else {
        format!("{x:.precision$}")
    };
    match s.strip_prefix('-') {
        Some(rest) if rest.chars().all(|c| c == '0' || c == '.') => rest.to_string(),
        _ => s,
    }
}

/// A command result, ready to render.
#[derive(Debug, Clone)]
pub enum Report {
    /// A single object with named fields (one CSV row).
    Record(Vec<(String, Cell)>),
    /// Rows under a fixed header, followed by `key=value` summary lines.
    Table {
        header: Vec<&'static str>,
        rows: Vec<Vec<Cell>>,
        summary: Vec<(String, Cell)>,
    },
    /// Free text for CSV mode, an object for JSON mode.
    Lines { text: Vec<String>, json: Value },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn csv_cell(c: &Cell, precision: usize) -> String {
    match c {
        Cell::Num(x) => format_number(*x, precision),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn plain_cell(c: &Cell, precision: usize) -> String {
    match c {
        Cell::Num(x) => format_number(*x, precision),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(c: &Cell, precision: usize) -> Value {
    match c {
        Cell::Num(x) => format_number(*x, precision)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Empty => Value::Null,
    }
}

fn json_object(fields: &[(String, Cell)], precision: usize) -> Map<String, Value> {
    fields
        .iter()
        .map(|(k, v)| (k.clone(), json_cell(v, precision)))
        .collect()
}

impl Report {
    pub fn render(&self, format: Format, precision: usize) -> String {
        match format {
            Format::Csv => self.render_csv(precision),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json(precision)).expect("plain JSON values");
                s.push('\n');
                s
            }
        }
    }

    fn render_csv(&self, precision: usize) -> String {
        let mut out = String::new();
        match self {
            Report::Record(fields) => {
                let keys: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
                let vals: Vec<String> = fields.iter().map(|(_, v)| csv_cell(v, precision)).collect();
                writeln!(out, "{}", keys.join(",")).unwrap();
                writeln!(out, "{}", vals.join(",")).unwrap();
            }
            Report::Table { header, rows, summary } => {
                writeln!(out, "{}", header.join(",")).unwrap();
                for row in rows {
                    let vals: Vec<String> = row.iter().map(|c| csv_cell(c, precision)).collect();
                    writeln!(out, "{}", vals.join(",")).unwrap();
                }
                for (k, v) in summary {
                    writeln!(out, "{k}={}", plain_cell(v, precision)).unwrap();
                }
            }
            Report::Lines { text, .. } => {
                for line in text {
                    writeln!(out, "{line}").unwrap();
                }
            }
        }
        out
    }

    fn to_json(&self, precision: usize) -> Value {
        match self {
            Report::Record(fields) => Value::Object(json_object(fields, precision)),
            Report::Table { header, rows, summary } => {
                let rows: Vec<Value> = rows
                    .iter()
                    .map(|row| {
                        Value::Object(
                            header
                                .iter()
                                .zip(row)
                                .map(|(k, v)| (k.to_string(), json_cell(v, precision)))
                                .collect(),
                        )
                    })
                    .collect();
                let mut obj = Map::new();
                obj.insert("rows".into(), Value::Array(rows));
                if !summary.is_empty() {
                    obj.insert("summary".into(), Value::Object(json_object(summary, precision)));
                }
                Value::Object(obj)
            }
            Report::Lines { json, .. } => json.clone(),
        }
    }
}
