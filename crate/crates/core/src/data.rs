//! Datasets, standardization and CSV ingestion.
//!
//! Responses are centered and predictor columns are centered and scaled to
//! unit sample variance (denominator `n − 1`). The intercept is carried by
//! the stored means, never by an explicit column.

use std::path::Path;

use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{BcrError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub feature_names: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats {
    pub x_mean: Vec<f64>,
    pub x_scale: Vec<f64>,
    pub y_mean: f64,
    /// Columns with no variability; their scale is pinned to 1.
    pub constant_columns: Vec<usize>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        Self::with_names(x, y, None)
    }

    pub fn with_names(
        x: DMatrix<f64>,
        y: DVector<f64>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(BcrError::DimensionMismatch {
                what: "design rows vs response length",
                expected: y.len(),
                found: x.nrows(),
            });
        }
        if y.len() < 2 {
            return Err(BcrError::InvalidData(format!(
                "need at least 2 observations, got {}",
                y.len()
            )));
        }
        if x.ncols() == 0 {
            return Err(BcrError::InvalidData("no predictor columns".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(BcrError::InvalidData("NaN or infinite entry".into()));
        }
        if let Some(names) = &feature_names {
            if names.len() != x.ncols() {
                return Err(BcrError::DimensionMismatch {
                    what: "feature names vs predictor columns",
                    expected: x.ncols(),
                    found: names.len(),
                });
            }
        }
        Ok(Self {
            x,
            y,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Centers `y` and standardizes the columns of `X`.
pub fn standardize(d: &Dataset) -> (Dataset, StandardizationStats) {
    let n = d.n();
    let nf = n as f64;
    let p = d.p();
    let mut x = d.x.clone();
    let mut x_mean = Vec::with_capacity(p);
    let mut x_scale = Vec::with_capacity(p);
    let mut constant_columns = Vec::new();
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let mean = col.iter().sum::<f64>() / nf;
        let ss: f64 = col.iter().map(|v| (v - mean).powi(2)).sum();
        let sd = (ss / (nf - 1.0)).sqrt();
        let scale = if sd > 1e-12 * (1.0 + mean.abs()) {
            sd
        } else {
            constant_columns.push(j);
            1.0
        };
        col.iter_mut().for_each(|v| *v = (*v - mean) / scale);
        x_mean.push(mean);
        x_scale.push(scale);
    }
    if !constant_columns.is_empty() {
        warn!(
            "{} constant predictor column(s) zeroed: {:?}",
            constant_columns.len(),
            constant_columns
        );
    }
    let y_mean = d.y.mean();
    let y = d.y.map(|v| v - y_mean);
    let stats = StandardizationStats {
        x_mean,
        x_scale,
        y_mean,
        constant_columns,
    };
    let out = Dataset {
        x,
        y,
        feature_names: d.feature_names.clone(),
    };
    (out, stats)
}

/// `(x − x_mean) / x_scale`, elementwise.
pub fn apply_transform(stats: &StandardizationStats, x_new: &[f64]) -> Result<Vec<f64>> {
    stats.transform(x_new)
}

impl StandardizationStats {
    pub fn p(&self) -> usize {
        self.x_mean.len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.p() {
            return Err(BcrError::DimensionMismatch {
                what: "predictor vector vs standardization stats",
                expected: self.p(),
                found: len,
            });
        }
        Ok(())
    }

    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        Ok(x.iter()
            .zip(self.x_mean.iter().zip(&self.x_scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn inverse_transform(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z.len())?;
        Ok(z.iter()
            .zip(self.x_mean.iter().zip(&self.x_scale))
            .map(|(v, (m, s))| v * s + m)
            .collect())
    }

    /// Standardizes every row of an `n × p` design.
    pub fn transform_matrix(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_len(x.ncols())?;
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.x_mean[j], self.x_scale[j]);
            col.iter_mut().for_each(|v| *v = (*v - m) / s);
        }
        Ok(out)
    }

    /// Maps a prediction on the centered scale back to the response scale.
    pub fn uncenter(&self, y_centered: f64) -> f64 {
        y_centered + self.y_mean
    }
}

/// How the response column is located in a CSV file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResponseColumn {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for ResponseColumn {
    type Err = std::convert::Infallible;

    /// All-digit selectors are column indices; anything else is a name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ResponseColumn::Index(i),
            Err(_) => ResponseColumn::Name(s.to_string()),
        })
    }
}

impl std::fmt::Display for ResponseColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResponseColumn::Name(n) => write!(f, "{n:?}"),
            ResponseColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self { has_header: true }
    }
}

/// A numeric table read from CSV. Row numbers in errors are 1-based file
/// lines; column numbers are 1-based fields.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub header: Option<Vec<String>>,
    pub rows: usize,
    pub cols: usize,
    /// Row-major cells.
    pub cells: Vec<f64>,
}

impl NumericTable {
    pub fn column_index(&self, sel: &ResponseColumn) -> Result<usize> {
        match sel {
            ResponseColumn::Index(i) if *i < self.cols => Ok(*i),
            ResponseColumn::Index(_) => Err(BcrError::MissingResponse(sel.to_string())),
            ResponseColumn::Name(name) => self
                .header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == name))
                .ok_or_else(|| BcrError::MissingResponse(sel.to_string())),
        }
    }

    /// Splits off column `drop` (if any), returning the remaining columns as
    /// a matrix, the dropped column, and the remaining column names.
    pub fn split(&self, drop: Option<usize>) -> (DMatrix<f64>, Option<DVector<f64>>, Option<Vec<String>>) {
        let keep: Vec<usize> = (0..self.cols).filter(|c| Some(*c) != drop).collect();
        let x = DMatrix::from_fn(self.rows, keep.len(), |i, j| self.cells[i * self.cols + keep[j]]);
        let y = drop.map(|c| DVector::from_fn(self.rows, |i, _| self.cells[i * self.cols + c]));
        let names = self
            .header
            .as_ref()
            .map(|h| keep.iter().map(|&c| h[c].clone()).collect());
        (x, y, names)
    }
}

/// Reads a fully numeric CSV.
pub fn read_numeric_csv(path: impl AsRef<Path>, opts: CsvOptions) -> Result<NumericTable> {
    let file = std::fs::File::open(path.as_ref())?;
    read_numeric_csv_from(file, opts)
}

pub fn read_numeric_csv_from<R: std::io::Read>(reader: R, opts: CsvOptions) -> Result<NumericTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut cells = Vec::new();
    let mut cols = 0usize;
    let mut rows = 0usize;
    for (line_idx, rec) in rdr.records().enumerate() {
        let line = line_idx + 1;
        let rec = rec.map_err(|e| {
            let (row, column) = match e.kind() {
                csv::ErrorKind::UnequalLengths { pos, .. } => {
                    (pos.as_ref().map_or(line, |p| p.line() as usize), 0)
                }
                _ => (line, 0),
            };
            BcrError::Parse {
                row,
                column,
                message: e.to_string(),
            }
        })?;
        if line == 1 && opts.has_header {
            header = Some(rec.iter().map(str::to_string).collect::<Vec<_>>());
            cols = rec.len();
            continue;
        }
        if cols == 0 {
            cols = rec.len();
        }
        for (c, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| BcrError::NonNumericCell {
                row: line,
                column: c + 1,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(BcrError::NonNumericCell {
                    row: line,
                    column: c + 1,
                    value: field.to_string(),
                });
            }
            cells.push(v);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(BcrError::Parse {
            row: 1,
            column: 0,
            message: "no data rows".into(),
        });
    }
    Ok(NumericTable {
        header,
        rows,
        cols,
        cells,
    })
}

/// Loads a dataset, extracting `response` and keeping every other column as
/// a predictor in file order.
pub fn load_csv(
    path: impl AsRef<Path>,
    response: &ResponseColumn,
    opts: CsvOptions,
) -> Result<Dataset> {
    let table = read_numeric_csv(path, opts)?;
    dataset_from_table(&table, response)
}

pub fn dataset_from_table(table: &NumericTable, response: &ResponseColumn) -> Result<Dataset> {
    let yc = table.column_index(response)?;
    let (x, y, names) = table.split(Some(yc));
    Dataset::with_names(x, y.expect("response column requested"), names)
}
