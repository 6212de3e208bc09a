//! Validated `(t, T)` samples and the symmetry transforms used to reduce
//! every fitting problem to a canonical orientation.

use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use crate::error::{FitError, Result};
use crate::scalar::Scalar;

/// Discrete data `(t_i, T_i)` with strictly increasing, finite abscissae.
///
/// Datasets are immutable once built; every transform returns a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    t: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Builds a dataset from already ordered columns.
    pub fn new(t: Vec<T>, values: Vec<T>) -> Result<Self> {
        if t.len() != values.len() {
            return Err(FitError::LengthMismatch {
                t: t.len(),
                y: values.len(),
            });
        }
        if t.len() < 2 {
            return Err(FitError::TooFewRows {
                found: t.len(),
                required: 2,
            });
        }
        for (i, (x, y)) in t.iter().zip(&values).enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(FitError::NonFinite { index: i });
            }
        }
        for i in 1..t.len() {
            if t[i] == t[i - 1] {
                return Err(FitError::DuplicateAbscissa {
                    value: t[i].to_f64().unwrap_or(f64::NAN),
                });
            }
            if t[i] < t[i - 1] {
                return Err(FitError::NotIncreasing { index: i });
            }
        }
        Ok(Dataset { t, values })
    }

    /// Builds a dataset from rows in any order. Rows are sorted by abscissa;
    /// repeated abscissae are rejected.
    pub fn from_pairs(mut rows: Vec<(T, T)>) -> Result<Self> {
        if let Some(i) = rows
            .iter()
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(FitError::NonFinite { index: i });
        }
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
        let (t, values) = rows.into_iter().unzip();
        Self::new(t, values)
    }

    /// Parses two-column text: comma or whitespace separated, with an
    /// optional header line recognised by a non-numeric first row.
    pub fn parse(text: &str) -> Result<Self> {
        let rows = parse_rows::<T>(text, 2)?;
        let pairs: Vec<(T, T)> = rows.into_iter().map(|r| (r[0], r[1])).collect();
        if pairs.len() < 2 {
            return Err(FitError::TooFewRows {
                found: pairs.len(),
                required: 2,
            });
        }
        Self::from_pairs(pairs)
    }

    pub fn from_reader<R: Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::parse(&text)
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Comma separated text that [`Dataset::parse`] reads back unchanged.
    pub fn to_delimited(&self) -> String {
        let mut out = String::from("t,value\n");
        for (x, y) in self.t.iter().zip(&self.values) {
            let _ = writeln!(out, "{x},{y}");
        }
        out
    }

    pub fn t(&self) -> &[T] {
        &self.t
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Distance between the last and first abscissa.
    pub fn span(&self) -> T {
        self.t[self.len() - 1] - self.t[0]
    }

    pub(crate) fn require_len(&self, min: usize) -> Result<()> {
        if self.len() < min {
            return Err(FitError::TooFewRows {
                found: self.len(),
                required: min,
            });
        }
        Ok(())
    }

    /// `((-t_n, ..., -t_1), (T_n, ..., T_1))`.
    pub fn reflect_t(&self) -> Self {
        Dataset {
            t: self.t.iter().rev().map(|&x| -x).collect(),
            values: self.values.iter().rev().copied().collect(),
        }
    }

    /// `(t, -T)`.
    pub fn negate_values(&self) -> Self {
        Dataset {
            t: self.t.clone(),
            values: self.values.iter().map(|&y| -y).collect(),
        }
    }

    /// Both reflections: `((-t_n, ..., -t_1), (-T_n, ..., -T_1))`.
    pub fn reflect_both(&self) -> Self {
        self.reflect_t().negate_values()
    }

    /// Sub-dataset on the given increasing indices.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.t[i]).collect(),
            indices.iter().map(|&i| self.values[i]).collect(),
        )
    }
}

/// Parses a single-column series (first column of every row), as used for
/// autoregressive time series input.
pub fn parse_series<T: Scalar>(text: &str) -> Result<Vec<T>> {
    Ok(parse_rows::<T>(text, 1)?.into_iter().map(|r| r[0]).collect())
}

pub fn load_series<T: Scalar, P: AsRef<Path>>(path: P) -> Result<Vec<T>> {
    parse_series(&std::fs::read_to_string(path)?)
}

/// Writes a series one value per line, readable by [`parse_series`].
pub fn series_to_delimited<T: Scalar>(series: &[T]) -> String {
    let mut out = String::from("x\n");
    for x in series {
        let _ = writeln!(out, "{x}");
    }
    out
}

fn parse_rows<T: Scalar>(text: &str, columns: usize) -> Result<Vec<Vec<T>>> {
    let mut rows = Vec::new();
    let mut first = true;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|c| !c.is_empty())
            .collect();
        let parsed: std::result::Result<Vec<T>, _> = cells.iter().map(|c| c.parse::<T>()).collect();
        match parsed {
            Ok(vals) => {
                if vals.len() < columns {
                    return Err(FitError::Parse {
                        line: lineno + 1,
                        message: format!("expected {columns} columns, found {}", vals.len()),
                    });
                }
                if let Some(pos) = vals.iter().position(|v| !v.is_finite()) {
                    return Err(FitError::Parse {
                        line: lineno + 1,
                        message: format!("non-finite value in column {}", pos + 1),
                    });
                }
                rows.push(vals[..columns].to_vec());
            }
            // A non-numeric first row is a header.
            Err(_) if first => {}
            Err(_) => {
                return Err(FitError::Parse {
                    line: lineno + 1,
                    message: format!("non-numeric cell in `{line}`"),
                })
            }
        }
        first = false;
    }
    Ok(rows)
}
