use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::Format;
use crate::error::CliResult;

pub const SCHEMA: &str = "binsplit/1";

/// One table cell. Rationals print as decimals in CSV and as `num/den` in JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Rational { text: String, value: f64 },
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) | Cell::Rational { value: v, .. } => format_float(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => Value::from(*v),
            Cell::Rational { text, .. } => Value::from(text.clone()),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Shortest decimal that parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        x.to_string()
    }
}

/// A command's output: a fixed-column table plus run metadata.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    meta: Map<String, Value>,
}

impl Report {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Self {
            command,
            columns: columns.to_vec(),
            rows: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Attach a top-level JSON field such as `p`, `seed`, `tolerances`,
    /// `truncation` or `summary`.
    pub fn meta(&mut self, key: &str, value: impl Serialize) -> CliResult<()> {
        self.meta
            .insert(key.to_owned(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn meta_value(&self, key: &str) -> Option<&Value> {
        self.meta.get(key)
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    pub fn to_json(&self) -> Value {
        let mut top = Map::new();
        top.insert("schema".into(), SCHEMA.into());
        top.insert("command".into(), self.command.into());
        for (k, v) in &self.meta {
            top.insert(k.clone(), v.clone());
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .zip(r)
                        .map(|(c, v)| ((*c).to_owned(), v.json()))
                        .collect(),
                )
            })
            .collect();
        top.insert("rows".into(), Value::Array(rows));
        Value::Object(top)
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> CliResult<()> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                w.flush()?;
            }
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [
            0.6,
            0.1 + 0.2,
            1.0,
            1e-300,
            5.545_353_308_025_27e-1,
            123456.789,
        ] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(0.6), "0.6");
        assert_eq!(format_float(1.0), "1.0");
    }

    #[test]
    fn csv_and_json_shapes() {
        let mut r = Report::new("exact", &["n", "k", "probability"]);
        r.push(vec![
            2usize.into(),
            1usize.into(),
            Cell::Rational {
                text: "3/5".into(),
                value: 0.6,
            },
        ]);
        r.push(vec![
            2usize.into(),
            2usize.into(),
            Cell::Text("a,\"b\"".into()),
        ]);
        r.meta("p", "1/3").unwrap();
        let mut buf = Vec::new();
        r.write(Format::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,k,probability\n2,1,0.6\n2,2,\"a,\"\"b\"\"\"\n"
        );
        let j = r.to_json();
        assert_eq!(j["schema"], "binsplit/1");
        assert_eq!(j["p"], "1/3");
        assert_eq!(j["rows"][0]["probability"], "3/5");
        assert_eq!(j["rows"][1]["k"], 2);
    }
}
