//! Flat numeric tables on disk.
//!
//! Two formats carry the same [`Table`]:
//!
//! - CSV with a header row;
//! - JSON `{"config": …, "columns": […], "rows": [[…], …]}`.
//!
//! Numbers are written in scientific notation with 17 significant digits,
//! which round-trips every `f64` exactly. Wavefunctions use the columns
//! `x, re, im, density`.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::grid::{Grid, GridError, WaveFunction};

pub const WAVEFUNCTION_COLUMNS: [&str; 4] = ["x", "re", "im", "density"];

/// Relative tolerance on grid spacing when reading sample positions back.
const SPACING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("row {row} has {got} fields, header has {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("row {row}, column {column}: cannot parse {text:?} as a number")]
    BadNumber { row: usize, column: String, text: String },
    #[error("JSON cannot represent the non-finite value in row {row}, column {column}")]
    NonFinite { row: usize, column: String },
    #[error("expected columns {expected:?}, found {found:?}")]
    Columns { expected: Vec<String>, found: Vec<String> },
    #[error("sample positions are not uniformly spaced (row {0})")]
    NonUniform(usize),
    #[error("density column disagrees with re² + im² at row {0}")]
    DensityMismatch(usize),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Named numeric columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    /// Appends a row.
    ///
    /// # Panics
    /// If the row length differs from the column count.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row length must match the column count");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// 17 significant digits.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), IoError> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(&table.columns)?;
    for row in &table.rows {
        writer.write_record(row.iter().map(|&v| format_number(v)))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Table, IoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let columns: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut table = Table::new(columns);
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != table.columns.len() {
            return Err(IoError::RaggedRow { row, expected: table.columns.len(), got: record.len() });
        }
        let values = record
            .iter()
            .zip(&table.columns)
            .map(|(text, column)| parse_number(text, row, column))
            .collect::<Result<Vec<_>, _>>()?;
        table.rows.push(values);
    }
    Ok(table)
}

fn parse_number(text: &str, row: usize, column: &str) -> Result<f64, IoError> {
    text.trim().parse().map_err(|_| IoError::BadNumber { row, column: column.to_string(), text: text.to_string() })
}

#[derive(Serialize)]
struct JsonOut<'a, C: Serialize> {
    config: &'a C,
    columns: &'a [String],
    rows: Vec<Vec<Box<RawValue>>>,
}

#[derive(Deserialize)]
struct JsonIn {
    #[serde(default)]
    config: serde_json::Value,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Writes `table` with `config` recorded alongside it. Non-finite values
/// are rejected since JSON has no spelling for them.
pub fn write_json<W: Write, C: Serialize>(table: &Table, config: &C, mut out: W) -> Result<(), IoError> {
    let mut rows = Vec::with_capacity(table.rows.len());
    for (r, row) in table.rows.iter().enumerate() {
        let mut cells = Vec::with_capacity(row.len());
        for (&v, column) in row.iter().zip(&table.columns) {
            if !v.is_finite() {
                return Err(IoError::NonFinite { row: r, column: column.clone() });
            }
            cells.push(RawValue::from_string(format_number(v))?);
        }
        rows.push(cells);
    }
    serde_json::to_writer(&mut out, &JsonOut { config, columns: &table.columns, rows })?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Returns the table and whatever was stored under `config` (`null` if absent).
pub fn read_json<R: Read>(input: R) -> Result<(Table, serde_json::Value), IoError> {
    let parsed: JsonIn = serde_json::from_reader(input)?;
    for (row, values) in parsed.rows.iter().enumerate() {
        if values.len() != parsed.columns.len() {
            return Err(IoError::RaggedRow { row, expected: parsed.columns.len(), got: values.len() });
        }
    }
    Ok((Table { columns: parsed.columns, rows: parsed.rows }, parsed.config))
}

pub fn write_table<W: Write, C: Serialize>(table: &Table, config: &C, format: Format, out: W) -> Result<(), IoError> {
    match format {
        Format::Csv => write_csv(table, out),
        Format::Json => write_json(table, config, out),
    }
}

pub fn read_table<R: Read>(input: R, format: Format) -> Result<Table, IoError> {
    match format {
        Format::Csv => read_csv(input),
        Format::Json => Ok(read_json(input)?.0),
    }
}

pub fn wavefunction_table(psi: &WaveFunction) -> Table {
    let mut table = Table::new(WAVEFUNCTION_COLUMNS);
    for (x, v) in psi.grid().points().zip(psi.samples()) {
        table.rows.push(vec![x, v.re, v.im, v.norm_sqr()]);
    }
    table
}

/// Rebuilds a wavefunction from `x, re, im, density` columns. The grid is
/// recovered from the first sample and the spacing; the density column
/// must agree with the amplitudes.
pub fn wavefunction_from_table(table: &Table) -> Result<WaveFunction, IoError> {
    if table.columns.iter().map(String::as_str).ne(WAVEFUNCTION_COLUMNS) {
        return Err(IoError::Columns {
            expected: WAVEFUNCTION_COLUMNS.iter().map(|s| s.to_string()).collect(),
            found: table.columns.clone(),
        });
    }
    let n = table.rows.len();
    if n < 2 {
        return Err(GridError::InvalidSize(n).into());
    }
    let x_first = table.rows[0][0];
    let dx = (table.rows[n - 1][0] - x_first) / (n - 1) as f64;
    if !(dx.is_finite() && dx > 0.0) {
        return Err(IoError::NonUniform(1));
    }
    let grid = Grid::new(x_first, x_first + n as f64 * dx, n)?;
    let mut samples = Vec::with_capacity(n);
    for (j, row) in table.rows.iter().enumerate() {
        let expected_x = x_first + j as f64 * dx;
        if !((row[0] - expected_x).abs() <= SPACING_TOLERANCE * dx) {
            return Err(IoError::NonUniform(j));
        }
        let v = Complex64::new(row[1], row[2]);
        let density = v.norm_sqr();
        if !((row[3] - density).abs() <= 1e-12 * density.max(1.0)) {
            return Err(IoError::DensityMismatch(j));
        }
        samples.push(v);
    }
    Ok(WaveFunction::new(grid, samples)?)
}

pub fn read_wavefunction<R: Read>(input: R, format: Format) -> Result<WaveFunction, IoError> {
    wavefunction_from_table(&read_table(input, format)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_state() -> WaveFunction {
        let grid = Grid::new(-6.0, 6.0, 64).unwrap();
        WaveFunction::from_fn(grid, |x| Complex64::from_polar((-x * x / 2.0).exp(), 0.3 * x + 0.1))
    }

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, -0.0, 1.0, 1.0 / 3.0, std::f64::consts::PI, 1e-300, -2.5e300, f64::MIN_POSITIVE] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            let mantissa = s.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let psi = sample_state();
        let mut buf = Vec::new();
        write_csv(&wavefunction_table(&psi), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,re,im,density\n"));
        let back = read_wavefunction(buf.as_slice(), Format::Csv).unwrap();
        assert_eq!(back.samples(), psi.samples());
        assert!((back.norm() - psi.norm()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_keeps_config() {
        let psi = sample_state();
        let config = serde_json::json!({"grid_n": 64, "note": "test"});
        let mut buf = Vec::new();
        write_json(&wavefunction_table(&psi), &config, &mut buf).unwrap();
        let (table, cfg) = read_json(buf.as_slice()).unwrap();
        assert_eq!(cfg, config);
        let back = wavefunction_from_table(&table).unwrap();
        assert_eq!(back.samples(), psi.samples());
        assert_eq!(back.grid().len(), 64);
    }

    #[test]
    fn json_rejects_non_finite() {
        let mut table = Table::new(["a"]);
        table.push(vec![f64::NAN]);
        assert!(matches!(write_json(&table, &(), Vec::new()), Err(IoError::NonFinite { .. })));
    }

    #[test]
    fn malformed_inputs_are_errors() {
        assert!(matches!(read_csv("a,b\n1,2,3\n".as_bytes()), Err(IoError::RaggedRow { .. })));
        assert!(matches!(read_csv("a\nfoo\n".as_bytes()), Err(IoError::BadNumber { .. })));
        assert!(read_json("{\"columns\":[\"a\"],\"rows\":[[1,2]]}".as_bytes()).is_err());
        assert!(read_json("[]".as_bytes()).is_err());

        let mut table = wavefunction_table(&sample_state());
        table.rows[5][0] += 0.01;
        assert!(matches!(wavefunction_from_table(&table), Err(IoError::NonUniform(5))));
        let mut table = wavefunction_table(&sample_state());
        table.rows[7][3] *= 2.0;
        assert!(matches!(wavefunction_from_table(&table), Err(IoError::DensityMismatch(7))));
        let table = Table::new(["x", "y"]);
        assert!(matches!(wavefunction_from_table(&table), Err(IoError::Columns { .. })));
    }
}
