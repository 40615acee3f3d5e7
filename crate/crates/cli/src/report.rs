//! Report rendering: `#`-headed column tables or a JSON document.

use serde_json::{json, Map, Value};

use crate::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u128),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:.10e}"),
            Cell::Bool(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // u128 may exceed JSON's safe integer range
            Cell::Int(v) => u64::try_from(*v).map_or_else(|_| Value::String(v.to_string()), Value::from),
            Cell::Float(v) => json!(v),
            Cell::Bool(v) => json!(v),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u128)
    }
}

impl From<u128> for Cell {
    fn from(v: u128) -> Self {
        Cell::Int(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
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

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub command: String,
    pub header: Vec<(String, Cell)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Report {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Self::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Cell>) {
        self.header.push((key.to_string(), value.into()));
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    /// True unless some `pass` column or header entry is false.
    pub fn all_pass(&self) -> bool {
        let header_ok = self.header.iter().all(|(k, v)| !(k == "pass" && *v == Cell::Bool(false)));
        let col = self.columns.iter().position(|c| c == "pass");
        header_ok && col.is_none_or(|i| self.rows.iter().all(|r| r[i] != Cell::Bool(false)))
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table(),
            Format::Doc => {
                let mut doc = Map::new();
                doc.insert("command".into(), json!(self.command));
                for (k, v) in &self.header {
                    doc.insert(k.clone(), v.json());
                }
                if !self.columns.is_empty() {
                    let rows: Vec<Value> = self
                        .rows
                        .iter()
                        .map(|r| Value::Object(self.columns.iter().cloned().zip(r.iter().map(Cell::json)).collect()))
                        .collect();
                    doc.insert("rows".into(), Value::Array(rows));
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("finite JSON");
                s.push('\n');
                s
            }
        }
    }

    fn table(&self) -> String {
        let mut out = format!("# {}\n", self.command);
        for (k, v) in &self.header {
            out.push_str(&format!("# {k} = {}\n", v.text()));
        }
        if self.columns.is_empty() {
            return out;
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| cells.iter().map(|r| r[i].len()).chain([self.columns[i].len()]).max().unwrap())
            .collect();
        let line = |items: Vec<&str>| {
            let padded: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        out.push_str("# ");
        out.push_str(&line(self.columns.iter().map(String::as_str).collect()));
        for r in &cells {
            out.push_str("  ");
            out.push_str(&line(r.iter().map(String::as_str).collect()));
        }
        out
    }
}
