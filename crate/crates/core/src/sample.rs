//! Row-major sample matrices with labelled columns and CSV round-tripping.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Result, VineError};
use crate::scalar::Real;

/// `n x d` observations with column labels. Copula-scale samples live in
/// `(0,1)^d`; the regression example stores real-scale columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix<R: Real> {
    labels: Vec<String>,
    data: Vec<R>,
    n: usize,
    d: usize,
}

impl<R: Real> SampleMatrix<R> {
    /// Empty matrix with default labels `u1..ud`.
    pub fn with_dim(d: usize) -> Self {
        Self::with_labels((1..=d).map(|j| format!("u{j}")).collect())
    }

    pub fn with_labels(labels: Vec<String>) -> Self {
        let d = labels.len();
        Self {
            labels,
            data: Vec::new(),
            n: 0,
            d,
        }
    }

    pub fn from_rows(labels: Vec<String>, rows: &[Vec<R>]) -> Result<Self> {
        let mut m = Self::with_labels(labels);
        for row in rows {
            m.push_row(row)?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[R]) -> Result<()> {
        if row.len() != self.d {
            return Err(VineError::DimensionMismatch {
                expected: self.d,
                got: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.n += 1;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn get(&self, i: usize, j: usize) -> R {
        self.data[i * self.d + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.d + j] = v;
    }

    /// Copy of column `j` (0-based).
    pub fn column(&self, j: usize) -> Vec<R> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Copy of the column for 1-based variable index `var`.
    pub fn column_of_var(&self, var: usize) -> Vec<R> {
        self.column(var - 1)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[R]> {
        self.data.chunks(self.d)
    }

    /// Writes `label1,...,labeld` then one row per observation. Values use
    /// the shortest representation that round-trips in double precision;
    /// lines end with LF.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.labels.join(","))?;
        for row in self.rows() {
            let mut first = true;
            for v in row {
                if first {
                    first = false;
                } else {
                    write!(w, ",")?;
                }
                write!(w, "{}", v.as_f64())?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_csv<B: BufRead>(reader: B) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| VineError::Parse("empty CSV: missing header".into()))??;
        let labels: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
        if labels.is_empty() || labels.iter().any(|l| l.is_empty()) {
            return Err(VineError::Parse("malformed CSV header".into()));
        }
        let mut m = Self::with_labels(labels);
        let mut row = Vec::with_capacity(m.d);
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            row.clear();
            for field in line.split(',') {
                let v: f64 = field.trim().parse().map_err(|_| {
                    VineError::Parse(format!(
                        "line {}: cannot parse '{}' as a number",
                        lineno + 2,
                        field
                    ))
                })?;
                row.push(R::of(v));
            }
            if row.len() != m.d {
                return Err(VineError::Parse(format!(
                    "line {}: expected {} fields, got {}",
                    lineno + 2,
                    m.d,
                    row.len()
                )));
            }
            m.push_row(&row)?;
        }
        Ok(m)
    }

    pub fn write_csv_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn read_csv_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip_preserves_values() {
        let mut m: SampleMatrix<f64> = SampleMatrix::with_dim(3);
        m.push_row(&[0.1234567890123456, 1e-10, 0.999999999]).unwrap();
        m.push_row(&[0.5, 0.25, 1.0 / 3.0]).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let back = SampleMatrix::<f64>::read_csv(&buf[..]).unwrap();
        assert_eq!(m, back);
        assert_eq!(back.labels(), &["u1", "u2", "u3"]);
    }

    #[test]
    fn empty_matrix_has_header_only() {
        let m: SampleMatrix<f64> = SampleMatrix::with_dim(2);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "u1,u2\n");
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let mut m: SampleMatrix<f64> = SampleMatrix::with_dim(2);
        assert!(m.push_row(&[0.1]).is_err());
    }

    #[test]
    fn parse_error_reports_line() {
        let text = "u1,u2\n0.1,0.2\nx,0.3\n";
        let err = SampleMatrix::<f64>::read_csv(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }
}
