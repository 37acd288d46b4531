use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{kappa, TreeSpec};

use super::{LaplacianKind, LinearOperator};

/// Coefficients of a half-line Jacobi matrix, indexed from 1.
///
/// `a(j)` couples rows `j` and `j + 1`. Sources that are longer than any
/// practical truncation (the level generators) report `rows() == None`.
pub trait JacobiSource: Sync {
    fn a(&self, j: usize) -> f64;
    fn b(&self, j: usize) -> f64;
    fn rows(&self) -> Option<usize>;
}

/// A finite truncation: `N` diagonal entries and `N - 1` off-diagonals.
#[derive(Clone, Debug, PartialEq)]
pub struct JacobiMatrix {
    off_diagonal: Vec<f64>,
    diagonal: Vec<f64>,
}

impl JacobiMatrix {
    pub fn new(off_diagonal: Vec<f64>, diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::InvalidJacobi("empty diagonal".into()));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::InvalidJacobi(format!(
                "{} off-diagonal entries for {} rows",
                off_diagonal.len(),
                diagonal.len()
            )));
        }
        if let Some((j, a)) = off_diagonal
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.is_finite() && **a > 0.0))
        {
            return Err(Error::InvalidJacobi(format!(
                "a({}) = {a} is not positive",
                j + 1
            )));
        }
        if let Some((j, b)) = diagonal.iter().enumerate().find(|(_, b)| !b.is_finite()) {
            return Err(Error::InvalidJacobi(format!(
                "b({}) = {b} is not finite",
                j + 1
            )));
        }
        Ok(JacobiMatrix {
            off_diagonal,
            diagonal,
        })
    }

    /// `a ≡ 1`, `b ≡ 0`.
    pub fn free(n: usize) -> Self {
        assert!(n >= 1, "a Jacobi matrix has at least one row");
        JacobiMatrix {
            off_diagonal: vec![1.0; n - 1],
            diagonal: vec![0.0; n],
        }
    }

    /// Materializes the first `n` rows of `source`.
    pub fn truncate<S: JacobiSource + ?Sized>(source: &S, n: usize) -> Result<Self> {
        if let Some(rows) = source.rows() {
            if n > rows {
                return Err(Error::DepthExceedsLength {
                    depth: n,
                    length: rows,
                });
            }
        }
        JacobiMatrix::new(
            (1..n).map(|j| source.a(j)).collect(),
            (1..=n).map(|j| source.b(j)).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.len();
        let mut m = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diagonal[i];
        }
        for (i, &a) in self.off_diagonal.iter().enumerate() {
            m[(i, i + 1)] = a;
            m[(i + 1, i)] = a;
        }
        m
    }

    /// CSV with header `j,a,b`; the last row leaves `a` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(32 * self.len());
        out.push_str("j,a,b\n");
        for (i, b) in self.diagonal.iter().enumerate() {
            match self.off_diagonal.get(i) {
                Some(a) => writeln!(out, "{},{a},{b}", i + 1),
                None => writeln!(out, "{},,{b}", i + 1),
            }
            .expect("writing to a String");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "j,a,b")) => {}
            _ => {
                return Err(Error::Parse {
                    line: 1,
                    message: "expected header `j,a,b`".into(),
                })
            }
        }
        let mut off = Vec::new();
        let mut diag = Vec::new();
        let mut open_end = false;
        for (i, line) in lines {
            let err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            if line.is_empty() {
                continue;
            }
            if open_end {
                return Err(err("row after the final row (empty `a`)".into()));
            }
            let fields: Vec<&str> = line.split(',').collect();
            let [j, a, b] = fields[..] else {
                return Err(err("expected three fields".into()));
            };
            let j: usize = j.parse().map_err(|_| err(format!("bad index `{j}`")))?;
            if j != diag.len() + 1 {
                return Err(err(format!("expected row {}, found {j}", diag.len() + 1)));
            }
            let b: f64 = b.parse().map_err(|_| err(format!("bad b `{b}`")))?;
            diag.push(b);
            if a.is_empty() {
                open_end = true;
            } else {
                off.push(a.parse().map_err(|_| err(format!("bad a `{a}`")))?);
            }
        }
        if !open_end {
            return Err(Error::Parse {
                line: diag.len() + 1,
                message: "missing final row with empty `a`".into(),
            });
        }
        JacobiMatrix::new(off, diag)
    }
}

impl JacobiSource for JacobiMatrix {
    /// Past the stored truncation `a` reads as 1, matching `a(0) = 1`.
    fn a(&self, j: usize) -> f64 {
        match j {
            0 => 1.0,
            _ => self.off_diagonal.get(j - 1).copied().unwrap_or(1.0),
        }
    }

    fn b(&self, j: usize) -> f64 {
        self.diagonal[j - 1]
    }

    fn rows(&self) -> Option<usize> {
        Some(self.diagonal.len())
    }
}

impl LinearOperator for JacobiMatrix {
    fn dim(&self) -> usize {
        self.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut s = self.diagonal[i] * x[i];
            if i > 0 {
                s += self.off_diagonal[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.off_diagonal[i] * x[i + 1];
            }
            y[i] = s;
        }
    }
}

/// The half-line block `J_n` of a spec, evaluated on demand.
///
/// Beyond the last branch of a finite prefix the coefficients are those of
/// the free matrix, so the generator has no natural end.
#[derive(Clone, Debug)]
pub struct LevelJacobi {
    /// `(R_m - R_n, k_m)` for every `m > n`, increasing.
    barriers: Vec<(usize, u64)>,
    kind: LaplacianKind,
    root_diagonal: Option<f64>,
}

impl LevelJacobi {
    pub fn barriers(&self) -> &[(usize, u64)] {
        &self.barriers
    }

    fn barrier(&self, j: usize) -> Option<u64> {
        self.barriers
            .binary_search_by_key(&j, |&(p, _)| p)
            .ok()
            .map(|i| self.barriers[i].1)
    }
}

impl JacobiSource for LevelJacobi {
    fn a(&self, j: usize) -> f64 {
        match self.barrier(j) {
            Some(k) => (k as f64).sqrt(),
            None => 1.0,
        }
    }

    fn b(&self, j: usize) -> f64 {
        match self.kind {
            LaplacianKind::Adjacency => 0.0,
            LaplacianKind::GraphLaplacian => match (j, self.root_diagonal) {
                (1, Some(d)) => d,
                _ => -(self.barrier(j).unwrap_or(1) as f64 + 1.0),
            },
        }
    }

    fn rows(&self) -> Option<usize> {
        None
    }
}

/// Coefficient generator for the level-`n` block.
///
/// Off-diagonals are `√k_m` at `j = R_m - R_n` for `m > n` and 1 elsewhere.
/// For the graph Laplacian the diagonal is `-(κ_{R_n + j - 1} + 1)`, except
/// that the root row of level 0 has `-κ_0`.
pub fn jacobi_source(spec: &TreeSpec, n: usize, kind: LaplacianKind) -> Result<LevelJacobi> {
    let base = spec.level_radius(n)?;
    let mut barriers = Vec::with_capacity(spec.branch_levels() - n);
    for m in n + 1..=spec.branch_levels() {
        let offset = spec.level_radius(m)? - base;
        let offset = usize::try_from(offset).map_err(|_| Error::Overflow {
            what: "barrier position",
        })?;
        barriers.push((offset, spec.factors()[m - 1]));
    }
    Ok(LevelJacobi {
        barriers,
        kind,
        root_diagonal: (n == 0).then(|| -(kappa(spec, 0) as f64)),
    })
}

/// First `length` rows of `J_n`.
pub fn jacobi_level(
    spec: &TreeSpec,
    n: usize,
    length: usize,
    kind: LaplacianKind,
) -> Result<JacobiMatrix> {
    if length == 0 {
        return Err(Error::InvalidJacobi(
            "truncation length must be at least 1".into(),
        ));
    }
    JacobiMatrix::truncate(&jacobi_source(spec, n, kind)?, length)
}

/// The level-`n` block of the tree truncated at `depth`: `depth - R_n + 1`
/// rows of `J_n`. For the graph Laplacian the last row carries the degree of
/// a cut-sphere vertex, which has lost its forward edges.
pub fn jacobi_block(
    spec: &TreeSpec,
    n: usize,
    depth: usize,
    kind: LaplacianKind,
) -> Result<JacobiMatrix> {
    let radius = spec.level_radius(n)?;
    if radius > depth as u64 {
        return Err(Error::LevelOutOfRange {
            level: n,
            available: (0..=spec.branch_levels())
                .take_while(|&m| spec.level_radius(m).is_ok_and(|r| r <= depth as u64))
                .count(),
        });
    }
    let length = depth - radius as usize + 1;
    let mut block = jacobi_level(spec, n, length, kind)?;
    if kind == LaplacianKind::GraphLaplacian {
        let last = block.diagonal.last_mut().expect("nonempty block");
        *last = if depth == 0 { 0.0 } else { -1.0 };
    }
    Ok(block)
}

/// Removes the first `m` rows and columns.
pub fn strip(j: &JacobiMatrix, m: usize) -> Result<JacobiMatrix> {
    if m >= j.len() {
        return Err(Error::StripTooLong {
            strip: m,
            length: j.len(),
        });
    }
    Ok(JacobiMatrix {
        off_diagonal: j.off_diagonal[m..].to_vec(),
        diagonal: j.diagonal[m..].to_vec(),
    })
}
