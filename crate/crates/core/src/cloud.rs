//! Point clouds and label fields, with plain CSV interchange.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};
use std::path::Path;

/// n points in R^d, stored flat in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyInput("point cloud"));
        }
        let dim = rows[0].len();
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
            coords.extend_from_slice(r);
        }
        Self::from_flat(dim, coords)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("point dimension must be at least 1"));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "coordinate buffer length {} is not a positive multiple of dim {}",
                coords.len(),
                dim
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("coordinates must be finite"));
        }
        Ok(PointCloud { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Reads one point per row, d comma-separated columns. A single header
    /// row, blank lines and '#' comments are tolerated.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut saw_data = false;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                t.split(',').map(|c| c.trim().parse::<f64>()).collect();
            match parsed {
                Ok(row) => {
                    saw_data = true;
                    rows.push(row);
                }
                Err(e) => {
                    if saw_data || !rows.is_empty() {
                        return Err(Error::Parse { line: lineno + 1, msg: e.to_string() });
                    }
                    // header row: ignore
                    saw_data = true;
                }
            }
        }
        PointCloud::from_rows(&rows)
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for p in self.iter() {
            let cols: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

/// Real-valued labels aligned with a point cloud by index.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelField {
    values: Vec<f64>,
}

impl LabelField {
    pub fn new(values: Vec<f64>) -> Self {
        LabelField { values }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        LabelField { values: vec![value; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut values = Vec::new();
        let mut first = true;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            match t.parse::<f64>() {
                Ok(v) => values.push(v),
                Err(e) => {
                    if first && values.is_empty() {
                        first = false; // header
                        continue;
                    }
                    return Err(Error::Parse { line: lineno + 1, msg: e.to_string() });
                }
            }
            first = false;
        }
        if values.is_empty() {
            return Err(Error::EmptyInput("label field"));
        }
        Ok(LabelField { values })
    }

    pub fn read_csv_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }
}
