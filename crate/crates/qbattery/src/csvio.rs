//! CSV output shared by the CLI and the sweep engine.
//!
//! Numbers are written with 17 significant digits so a double survives a
//! round trip through the text file exactly; golden-file comparisons can
//! therefore be byte-equal across runs.

use std::io::{self, Write};

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

/// A rectangular table destined for one CSV file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Append a row; panics on column-count mismatch (a programming error).
    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let mut first = true;
            for cell in row {
                if !first {
                    write!(w, ",")?;
                }
                first = false;
                match cell {
                    Value::Num(x) => write!(w, "{}", format_full(*x))?,
                    Value::Text(s) => write!(w, "{s}")?,
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Format with 17 significant digits (round-trip exact for f64).
pub fn format_full(x: f64) -> String {
    format!("{x:.16e}")
}
