use std::io::Write;

use serde_json::{json, Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format!("{x:.16e}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) if x.is_finite() => json!(x),
            Cell::Float(_) | Cell::Empty => Value::Null,
            Cell::Int(n) => json!(n),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Rows in input order; the last column is always `error`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Self {
        debug_assert_eq!(columns.last(), Some(&"error"));
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// Appends a full row; `values` excludes the error column.
    pub fn push(&mut self, values: Vec<Cell>) {
        assert_eq!(values.len() + 1, self.columns.len());
        let mut row = values;
        row.push(Cell::Empty);
        self.rows.push(row);
    }

    /// Row carrying only the leading key cells and the error message.
    pub fn push_error(&mut self, key: Vec<Cell>, message: String) {
        let mut row = key;
        row.resize(self.columns.len() - 1, Cell::Empty);
        row.push(Cell::Text(message));
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn json_rows(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Writes the table as CSV, or as JSON with a metadata header.
pub fn emit<W: Write>(table: &Table, format: Format, metadata: Value, mut out: W) -> std::io::Result<()> {
    match format {
        Format::Csv => table.write_csv(&mut out).map_err(std::io::Error::other),
        Format::Json => {
            let doc = json!({ "metadata": metadata, "rows": table.json_rows() });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COLS: &[&str] = &["a", "x", "error"];

    #[test]
    fn csv_layout() {
        let mut t = Table::new(COLS);
        t.push(vec![0.8.into(), (1.0f64 / 3.0).into()]);
        t.push_error(vec![0.9.into()], "bad, input".into());
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "a,x,error");
        assert_eq!(lines[1], "8.0000000000000004e-1,3.3333333333333331e-1,");
        assert_eq!(lines[2], "9.0000000000000002e-1,,\"bad, input\"");
    }

    #[test]
    fn json_layout() {
        let mut t = Table::new(COLS);
        t.push(vec![0.8.into(), f64::NAN.into()]);
        let mut buf = Vec::new();
        emit(&t, Format::Json, json!({"version": "x"}), &mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["rows"][0]["a"], json!(0.8));
        assert!(v["rows"][0]["x"].is_null());
        assert_eq!(v["metadata"]["version"], "x");
    }
}
