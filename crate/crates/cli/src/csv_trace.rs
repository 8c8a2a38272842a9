//! In-memory CSV tables with the fixed numeric format used by every output.

use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// One table: a header and rows of preformatted cells.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTrace {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// A cell value. Integers such as site labels are written without an exponent.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.into())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl CsvTrace {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        if row.len() != self.header.len() {
            return Err(CliError::RaggedRow { expected: self.header.len(), found: row.len() });
        }
        self.rows.push(row.iter().map(Cell::render).collect());
        Ok(())
    }

    pub fn push_nums(&mut self, row: &[f64]) -> Result<(), CliError> {
        self.push(row.iter().map(|&x| Cell::Num(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Comma separated, LF terminated, header first.
    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::Csv { path: "<memory>".into(), source: e };
        w.write_record(&self.header).map_err(wrap)?;
        for row in &self.rows {
            w.write_record(row).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| CliError::Csv { path: "<memory>".into(), source: e.into_error().into() })
    }

    /// Writes the table, creating parent directories as needed.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e| CliError::Io { path: path.to_path_buf(), source: e };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io)?;
        }
        fs::write(path, self.to_bytes()?).map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_f64(-2.5), "-2.5000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn header_always_written_with_lf() {
        let t = CsvTrace::new(&["t", "epsilon"]);
        assert_eq!(t.to_bytes().unwrap(), b"t,epsilon\n");
        let mut t = t;
        t.push(vec![Cell::Num(1.0), Cell::Int(3)]).unwrap();
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "t,epsilon\n1.0000000000000000e0,3\n");
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = CsvTrace::new(&["a", "b"]);
        assert!(matches!(t.push_nums(&[1.0]), Err(CliError::RaggedRow { expected: 2, found: 1 })));
    }
}
