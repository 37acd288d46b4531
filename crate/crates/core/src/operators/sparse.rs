//! Upper-triangle coordinate storage for real symmetric matrices.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::SHTree;

use super::{LaplacianKind, LinearOperator};

/// A real symmetric matrix stored as its upper triangle, sorted by
/// `(row, col)` with no duplicates.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymmetric {
    dimension: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymmetric {
    /// Accepts entries in any order and any triangle; `(i, j)` and `(j, i)`
    /// are the same entry and may only appear once.
    pub fn from_entries(dimension: usize, entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut entries: Vec<_> = entries
            .into_iter()
            .map(|(r, c, v)| if r <= c { (r, c, v) } else { (c, r, v) })
            .collect();
        entries.sort_by_key(|&(r, c, _)| (r, c));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::InvalidSparse(format!(
                    "duplicate entry ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        if let Some(&(r, c, v)) = entries
            .iter()
            .find(|&&(_, c, v)| c >= dimension || !v.is_finite())
        {
            return Err(Error::InvalidSparse(if c >= dimension {
                format!("entry ({r}, {c}) outside dimension {dimension}")
            } else {
                format!("non-finite value {v} at ({r}, {c})")
            }));
        }
        Ok(SparseSymmetric { dimension, entries })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Upper-triangle entries `(row, col, value)` with `row <= col`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Value at `(i, j)`, by binary search.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries
            .binary_search_by_key(&key, |&(r, c, _)| (r, c))
            .map(|k| self.entries[k].2)
            .unwrap_or(0.0)
    }

    /// Coordinate text: `row col value` per line, zero-based, upper triangle.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::with_capacity(self.entries.len() * 16);
        for &(r, c, v) in &self.entries {
            let _ = writeln!(out, "{r} {c} {v}");
        }
        out
    }

    /// Parses [`Self::to_coordinate_text`] output. The format carries no
    /// dimension; without `dimension` the smallest one that fits is used.
    pub fn from_coordinate_text(text: &str, dimension: Option<usize>) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let mut fields = line.split_whitespace();
            let (Some(r), Some(c), Some(v), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(err("expected `row col value`".into()));
            };
            let r: usize = r.parse().map_err(|_| err(format!("bad row `{r}`")))?;
            let c: usize = c.parse().map_err(|_| err(format!("bad column `{c}`")))?;
            let v: f64 = v.parse().map_err(|_| err(format!("bad value `{v}`")))?;
            entries.push((r, c, v));
        }
        let needed = entries
            .iter()
            .map(|&(r, c, _)| r.max(c).checked_add(1))
            .try_fold(0, |acc, n| n.map(|n| acc.max(n)))
            .ok_or_else(|| Error::InvalidSparse("index out of range".into()))?;
        SparseSymmetric::from_entries(dimension.unwrap_or(needed), entries)
    }

    /// Dense copy, for small matrices.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.dimension, self.dimension);
        for &(r, c, v) in &self.entries {
            m[(r, c)] = v;
            m[(c, r)] = v;
        }
        m
    }
}

impl LinearOperator for SparseSymmetric {
    fn dim(&self) -> usize {
        self.dimension
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
            if r != c {
                y[c] += v * x[r];
            }
        }
    }
}

/// Symmetric product `M v`.
pub fn matvec(m: &SparseSymmetric, v: &[f64]) -> Result<Vec<f64>> {
    m.apply(v)
}

/// Laplacian of the truncated tree. Vertices on the cut sphere keep only the
/// edge to their parent, and the graph Laplacian diagonal uses that truncated
/// degree.
pub fn assemble(tree: &SHTree, kind: LaplacianKind) -> SparseSymmetric {
    let n = tree.vertex_count();
    let mut entries = Vec::with_capacity(2 * n);
    let mut next_child = 1;
    for v in 0..n {
        if kind == LaplacianKind::GraphLaplacian {
            entries.push((v, v, -(tree.truncated_degree(v) as f64)));
        }
        while next_child < n && tree.parent(next_child) == Some(v) {
            entries.push((v, next_child, 1.0));
            next_child += 1;
        }
    }
    SparseSymmetric {
        dimension: n,
        entries,
    }
}
