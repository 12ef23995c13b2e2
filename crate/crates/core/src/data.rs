//! Observation store and tabular ingestion.
//!
//! Rows are append-only: an index handed out by [`DataStore::append`] stays
//! valid for the life of the store, and everything downstream (tree leaves,
//! particles) refers to observations by that index.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An owned covariate vector.
pub type Covariates = Vec<f64>;

/// A single response: a real value or a class index in `0..C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Response {
    Real(f64),
    Class(usize),
}

impl Response {
    pub fn as_real(self) -> Option<f64> {
        match self {
            Response::Real(y) => Some(y),
            Response::Class(_) => None,
        }
    }

    pub fn as_class(self) -> Option<usize> {
        match self {
            Response::Class(c) => Some(c),
            Response::Real(_) => None,
        }
    }

    /// Numeric view used in traces: the real value or the class index.
    pub fn to_f64(self) -> f64 {
        match self {
            Response::Real(y) => y,
            Response::Class(c) => c as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResponseKind {
    Real,
    Class { classes: usize },
}

/// Append-only table of `(x, y)` rows with a fixed input dimension and
/// response kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataStore {
    dim: usize,
    kind: ResponseKind,
    // row-major, `dim` values per row
    x: Vec<f64>,
    y: Vec<Response>,
}

impl DataStore {
    pub fn new(dim: usize, kind: ResponseKind) -> Self {
        Self { dim, kind, x: Vec::new(), y: Vec::new() }
    }

    pub fn real(dim: usize) -> Self {
        Self::new(dim, ResponseKind::Real)
    }

    pub fn classes(dim: usize, classes: usize) -> Self {
        Self::new(dim, ResponseKind::Class { classes })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ResponseKind {
        self.kind
    }

    /// Number of classes for a categorical store.
    pub fn num_classes(&self) -> Option<usize> {
        match self.kind {
            ResponseKind::Class { classes } => Some(classes),
            ResponseKind::Real => None,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn y(&self, i: usize) -> Response {
        self.y[i]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], Response)> + '_ {
        self.x.chunks_exact(self.dim.max(1)).zip(self.y.iter().copied())
    }

    /// Check a row against the store's contract without inserting it.
    pub fn validate(&self, x: &[f64], y: Response) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: x.len() });
        }
        if let Some(&v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "covariate", value: v });
        }
        match (self.kind, y) {
            (ResponseKind::Real, Response::Real(v)) => {
                if !v.is_finite() {
                    return Err(Error::NonFinite { what: "response", value: v });
                }
            }
            (ResponseKind::Class { classes }, Response::Class(c)) => {
                if c >= classes {
                    return Err(Error::ClassOutOfRange { label: c, classes });
                }
            }
            (kind, y) => {
                return Err(Error::ResponseKind(format!("store holds {kind:?}, got {y:?}")));
            }
        }
        Ok(())
    }

    /// Append a row and return its index.
    pub fn append(&mut self, x: &[f64], y: Response) -> Result<usize> {
        self.validate(x, y)?;
        self.x.extend_from_slice(x);
        self.y.push(y);
        Ok(self.y.len() - 1)
    }

    /// A new store holding the rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> DataStore {
        let mut out = DataStore::new(self.dim, self.kind);
        for &i in indices {
            out.x.extend_from_slice(self.x(i));
            out.y.push(self.y[i]);
        }
        out
    }

    /// The first `n` rows.
    pub fn prefix(&self, n: usize) -> DataStore {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.select(&idx)
    }

    /// Order-sensitive fingerprint of the rows `0..n`.
    pub fn fingerprint(&self, n: usize) -> u64 {
        let mut bytes = Vec::with_capacity(n * (self.dim + 1) * 8);
        for i in 0..n {
            for v in self.x(i) {
                bytes.extend_from_slice(&v.to_bits().to_le_bytes());
            }
            bytes.extend_from_slice(&self.y[i].to_f64().to_bits().to_le_bytes());
        }
        crate::rng::fnv1a(&bytes)
    }

    /// Serialize as CSV with the given covariate names and response name.
    pub fn write_csv<W: Write>(&self, out: W, names: &[String], response: &str) -> Result<()> {
        if names.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: names.len() });
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = names.to_vec();
        header.push(response.to_string());
        w.write_record(&header)?;
        for (x, y) in self.rows() {
            let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            rec.push(match y {
                Response::Real(v) => v.to_string(),
                Response::Class(c) => c.to_string(),
            });
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Io { path: "<writer>".into(), source: e })?;
        Ok(())
    }
}

/// Which column is the response, and whether it holds class labels.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub response: String,
    pub class: bool,
}

impl CsvSchema {
    pub fn real(response: &str) -> Self {
        Self { response: response.to_string(), class: false }
    }

    pub fn class(response: &str) -> Self {
        Self { response: response.to_string(), class: true }
    }
}

/// A CSV file read as strings, before any numeric interpretation.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            rows.push(rec.iter().map(|c| c.trim().to_string()).collect());
        }
        Ok(Self { headers, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let table = Self::from_reader(file)?;
        if table.headers.is_empty() || table.rows.is_empty() {
            return Err(Error::EmptyFile { path: path.to_path_buf() });
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    fn cell_f64(&self, row: usize, col: usize) -> Result<f64> {
        let cell = &self.rows[row][col];
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Parse {
                // 1-based data row, header excluded
                row: row + 1,
                column: self.headers[col].clone(),
                cell: cell.clone(),
            }),
        }
    }

    fn cell_class(&self, row: usize, col: usize) -> Result<usize> {
        let cell = &self.rows[row][col];
        cell.parse::<usize>().map_err(|_| {
            Error::ResponseKind(format!(
                "row {}, column '{}': class label '{}' is not a non-negative integer",
                row + 1,
                self.headers[col],
                cell
            ))
        })
    }

    /// Interpret the table as covariates plus one response column.
    pub fn into_store(&self, schema: &CsvSchema) -> Result<(DataStore, Vec<String>)> {
        if self.rows.is_empty() {
            return Err(Error::EmptyFile { path: "<table>".into() });
        }
        let ycol = self.column(&schema.response)?;
        let xcols: Vec<usize> = (0..self.headers.len()).filter(|&c| c != ycol).collect();
        let names = xcols.iter().map(|&c| self.headers[c].clone()).collect();
        let kind = if schema.class {
            let mut max = 0;
            for r in 0..self.rows.len() {
                max = max.max(self.cell_class(r, ycol)?);
            }
            ResponseKind::Class { classes: max + 1 }
        } else {
            ResponseKind::Real
        };
        let mut store = DataStore::new(xcols.len(), kind);
        let mut x = vec![0.0; xcols.len()];
        for r in 0..self.rows.len() {
            for (k, &c) in xcols.iter().enumerate() {
                x[k] = self.cell_f64(r, c)?;
            }
            let y = if schema.class {
                Response::Class(self.cell_class(r, ycol)?)
            } else {
                Response::Real(self.cell_f64(r, ycol)?)
            };
            store.append(&x, y)?;
        }
        Ok((store, names))
    }
}

/// Read a CSV file with a header row into a store. Returns the covariate
/// column names alongside.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<(DataStore, Vec<String>)> {
    Table::read(path)?.into_store(schema)
}

/// One output column of [`one_hot_encode`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedColumn {
    pub source: String,
    /// `Some(label)` for an indicator column, `None` for a pass-through.
    pub label: Option<String>,
}

impl EncodedColumn {
    pub fn name(&self) -> String {
        match &self.label {
            Some(l) => format!("{}={}", self.source, l),
            None => self.source.clone(),
        }
    }
}

/// Expand categorical columns into 0/1 indicator columns.
///
/// Each listed column with `k` distinct labels becomes `k` indicator columns
/// (labels in sorted order). Listed columns whose values are already exactly
/// `0`/`1` are kept as a single column. Unlisted covariates must be numeric
/// and pass through.
pub fn one_hot_encode(
    table: &Table,
    categorical: &[&str],
    schema: &CsvSchema,
) -> Result<(DataStore, Vec<EncodedColumn>)> {
    let ycol = table.column(&schema.response)?;
    let mut cat_cols = Vec::with_capacity(categorical.len());
    for name in categorical {
        cat_cols.push(table.column(name)?);
    }

    enum Plan {
        Numeric(usize),
        Indicators(usize, BTreeMap<String, usize>),
    }

    let mut plans = Vec::new();
    let mut mapping = Vec::new();
    for c in (0..table.headers.len()).filter(|&c| c != ycol) {
        let name = &table.headers[c];
        if !cat_cols.contains(&c) {
            plans.push(Plan::Numeric(c));
            mapping.push(EncodedColumn { source: name.clone(), label: None });
            continue;
        }
        let mut labels = BTreeMap::new();
        for (r, row) in table.rows.iter().enumerate() {
            if row[c].is_empty() {
                return Err(Error::Parse { row: r + 1, column: name.clone(), cell: String::new() });
            }
            labels.entry(row[c].clone()).or_insert(0usize);
        }
        let binary = labels
            .keys()
            .all(|l| matches!(l.parse::<f64>(), Ok(v) if v == 0.0 || v == 1.0));
        if binary {
            plans.push(Plan::Numeric(c));
            mapping.push(EncodedColumn { source: name.clone(), label: None });
        } else {
            for (k, (label, slot)) in labels.iter_mut().enumerate() {
                *slot = k;
                mapping.push(EncodedColumn { source: name.clone(), label: Some(label.clone()) });
            }
            plans.push(Plan::Indicators(c, labels));
        }
    }

    let kind = if schema.class {
        let mut max = 0;
        for r in 0..table.rows.len() {
            max = max.max(table.cell_class(r, ycol)?);
        }
        ResponseKind::Class { classes: max + 1 }
    } else {
        ResponseKind::Real
    };
    let mut store = DataStore::new(mapping.len(), kind);
    let mut x = Vec::with_capacity(mapping.len());
    for r in 0..table.rows.len() {
        x.clear();
        for plan in &plans {
            match plan {
                Plan::Numeric(c) => x.push(table.cell_f64(r, *c)?),
                Plan::Indicators(c, labels) => {
                    let hot = labels[&table.rows[r][*c]];
                    x.extend((0..labels.len()).map(|k| if k == hot { 1.0 } else { 0.0 }));
                }
            }
        }
        let y = if schema.class {
            Response::Class(table.cell_class(r, ycol)?)
        } else {
            Response::Real(table.cell_f64(r, ycol)?)
        };
        store.append(&x, y)?;
    }
    Ok((store, mapping))
}
