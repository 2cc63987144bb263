//! Rendering of command results as JSON or CSV.

use serde::Serialize;
use serde_json::{Map, Value};

use crate::numerics::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// One CSV cell.
#[derive(Debug, Clone)]
pub enum Cell {
    Int(i64),
    Text(String),
    Num(Scalar),
}

impl Cell {
    fn render(&self, decimals: Option<usize>) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Text(t) => quote(t),
            Cell::Num(s) => match decimals {
                Some(d) => s.to_decimal(d),
                None => match s {
                    Scalar::Exact(r) => crate::numerics::rational_string(r),
                    Scalar::Big(b) => b.to_decimal_string(),
                    Scalar::Machine(x) => x.to_string(),
                },
            },
        }
    }
}

impl From<Scalar> for Cell {
    fn from(s: Scalar) -> Self {
        Cell::Num(s)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn quote(t: &str) -> String {
    if t.contains([',', '"', '\n']) {
        format!("\"{}\"", t.replace('"', "\"\""))
    } else {
        t.to_string()
    }
}

/// A header row and data rows.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    /// CSV with LF line endings.
    pub fn to_csv(&self, decimals: Option<usize>) -> String {
        let mut out = self.header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(|c| c.render(decimals)).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }
}

/// Plot data: columns `x,value`, one row per grid point.
pub fn emit_plot_data(points: &[(Scalar, Scalar)], decimals: Option<usize>) -> String {
    let mut t = Table::new(&["x", "value"]);
    for (x, v) in points {
        t.push(vec![Cell::Num(x.clone()), Cell::Num(v.clone())]);
    }
    t.to_csv(decimals)
}

/// What a command produced: JSON fields, a CSV view, and whether a closed
/// form disagreed with its reference.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub fields: Map<String, Value>,
    pub table: Table,
    pub discrepancy: bool,
}

impl Report {
    pub fn new(table: Table) -> Self {
        Report { fields: Map::new(), table, discrepancy: false }
    }

    pub fn set<V: Serialize>(&mut self, key: &str, value: V) {
        let v = serde_json::to_value(value).expect("report values serialize");
        self.fields.insert(key.to_string(), v);
    }

    pub fn flag(&mut self, mismatch: bool) {
        self.discrepancy |= mismatch;
    }

    pub fn status(&self) -> &'static str {
        if self.discrepancy {
            "formula-discrepancy"
        } else {
            "ok"
        }
    }
}
