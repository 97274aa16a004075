//! Sample files: UTF-8 CSV with header `k,phi,y`, one sample per row.

use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use csv::{Reader, ReaderBuilder, StringRecord, Trim};
use rdwo::Sample;

use crate::error::CliError;

const HEADER: [&str; 3] = ["k", "phi", "y"];

/// Row-by-row reader that rejects malformed rows and repeated indices.
pub struct SampleReader {
    path: String,
    reader: Reader<File>,
    record: StringRecord,
    seen: HashSet<u64>,
}

impl SampleReader {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let display = path.display().to_string();
        let file = File::open(path).map_err(|e| CliError::File {
            path: display.clone(),
            message: e.to_string(),
        })?;
        let mut reader = ReaderBuilder::new()
            .has_headers(true)
            .trim(Trim::All)
            .from_reader(file);
        let header = reader.headers().map_err(|e| CliError::File {
            path: display.clone(),
            message: e.to_string(),
        })?;
        // A completely empty file carries no header and no samples.
        if !header.is_empty() && header.iter().ne(HEADER) {
            return Err(CliError::Row {
                path: display,
                line: 1,
                message: format!(
                    "expected header `k,phi,y`, found `{}`",
                    header.iter().collect::<Vec<_>>().join(",")
                ),
            });
        }
        Ok(Self {
            path: display,
            reader,
            record: StringRecord::new(),
            seen: HashSet::new(),
        })
    }

    fn row_error(&self, line: u64, message: String) -> CliError {
        CliError::Row {
            path: self.path.clone(),
            line,
            message,
        }
    }

    pub fn next_sample(&mut self) -> Result<Option<Sample>, CliError> {
        match self.reader.read_record(&mut self.record) {
            Ok(false) => return Ok(None),
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(self.row_error(line, e.to_string()));
            }
        }
        let line = self.record.position().map_or(0, |p| p.line());
        let field = |i: usize| self.record.get(i).unwrap_or("");
        let index = field(0)
            .parse::<u64>()
            .map_err(|_| self.row_error(line, format!("bad index `{}`", field(0))))?;
        let phi = field(1)
            .parse::<f64>()
            .map_err(|_| self.row_error(line, format!("bad phi `{}`", field(1))))?;
        let y = field(2)
            .parse::<f64>()
            .map_err(|_| self.row_error(line, format!("bad y `{}`", field(2))))?;
        let sample = Sample::new(index, phi, y).map_err(|e| self.row_error(line, e.to_string()))?;
        if !self.seen.insert(index) {
            return Err(self.row_error(line, format!("duplicate index {index}")));
        }
        Ok(Some(sample))
    }
}

pub fn read_samples(path: &Path) -> Result<Vec<Sample>, CliError> {
    let mut reader = SampleReader::open(path)?;
    let mut out = Vec::new();
    while let Some(s) = reader.next_sample()? {
        out.push(s);
    }
    Ok(out)
}
