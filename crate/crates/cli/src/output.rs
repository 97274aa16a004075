//! JSON-lines and CSV record emission.
//!
//! Reals are written with 17 significant digits so that every value
//! round-trips exactly; absent values are `null` in JSON and empty in CSV.

use std::io::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy)]
pub enum Value {
    Real(Option<f64>),
    Count(u64),
    Flag(Option<bool>),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Self::Real(Some(v))
    }
}

impl From<Option<f64>> for Value {
    fn from(v: Option<f64>) -> Self {
        Self::Real(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Self::Count(v as u64)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Self::Count(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Self::Flag(Some(v))
    }
}

impl From<Option<bool>> for Value {
    fn from(v: Option<bool>) -> Self {
        Self::Flag(v)
    }
}

pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn render(value: Value, null: &str) -> String {
    match value {
        Value::Real(Some(v)) if v.is_finite() => format_real(v),
        Value::Count(n) => n.to_string(),
        Value::Flag(Some(b)) => b.to_string(),
        _ => null.to_string(),
    }
}

pub struct RecordWriter<'a> {
    out: &'a mut dyn Write,
    format: OutputFormat,
    header_written: bool,
}

impl<'a> RecordWriter<'a> {
    pub fn new(out: &'a mut dyn Write, format: OutputFormat) -> Self {
        Self {
            out,
            format,
            header_written: false,
        }
    }

    /// Writes one record. In CSV mode the first record fixes the header.
    pub fn write(&mut self, fields: &[(&str, Value)]) -> std::io::Result<()> {
        match self.format {
            OutputFormat::Json => {
                let body: Vec<String> = fields
                    .iter()
                    .map(|(k, v)| format!("\"{k}\":{}", render(*v, "null")))
                    .collect();
                writeln!(self.out, "{{{}}}", body.join(","))
            }
            OutputFormat::Csv => {
                if !self.header_written {
                    let names: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
                    writeln!(self.out, "{}", names.join(","))?;
                    self.header_written = true;
                }
                let row: Vec<String> = fields.iter().map(|(_, v)| render(*v, "")).collect();
                writeln!(self.out, "{}", row.join(","))
            }
        }
    }
}
