//! Row-major matrix of replications by sites.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// `n` replications of a `d`-site vector, stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    d: usize,
    data: Vec<f64>,
}

impl Observations {
    /// `data` holds whole rows of length `d`.
    pub fn new(d: usize, data: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::data("observations need at least one site"));
        }
        if !data.len().is_multiple_of(d) {
            return Err(Error::data(format!("{} values do not fill rows of {d}", data.len())));
        }
        Ok(Observations { d, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or_else(|| Error::data("no observations"))?;
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::data(format!("row {} has {} values, expected {d}", i + 1, r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(d, data)
    }

    /// Number of replications.
    pub fn n(&self) -> usize {
        self.data.len() / self.d
    }

    /// Number of sites.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Reads a CSV with header `site_1,..,site_d`.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let d = loop {
            let (_, line) = lines.next().ok_or_else(|| Error::data("observation file is empty"))?;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let names: Vec<&str> = line.split(',').map(str::trim).collect();
            for (j, name) in names.iter().enumerate() {
                if *name != format!("site_{}", j + 1) {
                    return Err(Error::data(format!("unexpected column '{name}', expected site_{}", j + 1)));
                }
            }
            break names.len();
        };
        let mut data = Vec::new();
        for (n, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let before = data.len();
            for field in line.split(',') {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| Error::data(format!("line {}: '{}': {e}", n + 1, field.trim())))?;
                if !v.is_finite() {
                    return Err(Error::data(format!("line {}: non-finite value", n + 1)));
                }
                data.push(v);
            }
            if data.len() - before != d {
                return Err(Error::data(format!("line {}: expected {d} values", n + 1)));
            }
        }
        if data.is_empty() {
            return Err(Error::data("observation file has no rows"));
        }
        Self::new(d, data)
    }

    /// Writes the matrix with 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header: Vec<String> = (1..=self.d).map(|j| format!("site_{j}")).collect();
        writeln!(w, "{}", header.join(","))?;
        let mut line = String::new();
        for r in self.rows() {
            line.clear();
            for (j, v) in r.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{v:.16e}"));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}
