//! Observation locations on the line or in the plane.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// An ordered set of sites sharing one dimension.
///
/// Coordinates are stored as `[x, y]`; `y` is zero for one-dimensional sets.
/// Construction does not insist on distinct points so that degenerate
/// configurations can still be fed to the numerical integrals; callers that
/// need distinct sites use [`SiteSet::require_distinct`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSet {
    dim: usize,
    points: Vec<[f64; 2]>,
}

impl SiteSet {
    pub fn new_1d(xs: &[f64]) -> Result<Self> {
        Self::from_points(1, xs.iter().map(|&x| [x, 0.0]).collect())
    }

    pub fn new_2d(points: &[[f64; 2]]) -> Result<Self> {
        Self::from_points(2, points.to_vec())
    }

    /// Builds a set from rows of length `dim`.
    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        let mut points = Vec::with_capacity(rows.len());
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            points.push(if dim == 1 { [r[0], 0.0] } else { [r[0], r[1]] });
        }
        Self::from_points(dim, points)
    }

    fn from_points(dim: usize, points: Vec<[f64; 2]>) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::domain(format!("site dimension {dim} is not 1 or 2")));
        }
        if points.is_empty() {
            return Err(Error::domain("site set is empty"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("site coordinates must be finite"));
        }
        Ok(SiteSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        self.points[i]
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Coordinates of site `i` as a slice of length `dim`.
    pub fn coords(&self, i: usize) -> &[f64] {
        &self.points[i][..self.dim]
    }

    /// Displacement `t_m - t_j`, of length `dim`.
    pub fn displacement(&self, j: usize, m: usize) -> Vec<f64> {
        (0..self.dim).map(|k| self.points[m][k] - self.points[j][k]).collect()
    }

    pub fn distance(&self, j: usize, m: usize) -> f64 {
        let dx = self.points[m][0] - self.points[j][0];
        let dy = self.points[m][1] - self.points[j][1];
        dx.hypot(dy)
    }

    /// `max - min` of the coordinates of a one-dimensional set.
    pub fn range(&self) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::domain("range is defined for sites on the line only"));
        }
        let (lo, hi) = self
            .points
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])));
        Ok(hi - lo)
    }

    /// Smallest distance between two sites; infinite for a single site.
    pub fn min_distance(&self) -> f64 {
        self.pairs().map(|(j, m)| self.distance(j, m)).fold(f64::INFINITY, f64::min)
    }

    /// All index pairs `(j, m)` with `j < m`, in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let d = self.points.len();
        (0..d).flat_map(move |j| (j + 1..d).map(move |m| (j, m)))
    }

    pub fn require_distinct(&self) -> Result<()> {
        for (j, m) in self.pairs() {
            if self.points[j] == self.points[m] {
                return Err(Error::domain(format!("sites {} and {} coincide", j + 1, m + 1)));
            }
        }
        Ok(())
    }

    /// Reads a CSV with header `index,x` or `index,x,y`.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let dim = loop {
            let (_, line) = lines.next().ok_or_else(|| Error::data("sites file is empty"))?;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            break match cols.as_slice() {
                ["index", "x"] => 1,
                ["index", "x", "y"] => 2,
                _ => return Err(Error::data(format!("unexpected sites header '{line}'"))),
            };
        };
        let mut rows = Vec::new();
        for (n, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != dim + 1 {
                return Err(Error::data(format!("sites line {}: expected {} columns", n + 1, dim + 1)));
            }
            let row = cols[1..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::data(format!("sites line {}: {e}", n + 1)))?;
            rows.push(row);
        }
        Self::from_rows(dim, &rows).map_err(|e| match e {
            Error::Domain(m) => Error::Data(m),
            other => other,
        })
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        if self.dim == 1 {
            writeln!(w, "index,x")?;
        } else {
            writeln!(w, "index,x,y")?;
        }
        for (i, p) in self.points.iter().enumerate() {
            if self.dim == 1 {
                writeln!(w, "{},{:.16e}", i + 1, p[0])?;
            } else {
                writeln!(w, "{},{:.16e},{:.16e}", i + 1, p[0], p[1])?;
            }
        }
        Ok(())
    }
}
