//! Eigenvalues of symmetric matrices supported on a rooted tree, computed on
//! the tree itself without any block decomposition.
//!
//! Gaussian elimination of `A - x` from the leaves towards the root produces
//! no fill-in; by Sylvester's law of inertia the number of negative pivots is
//! the number of eigenvalues below `x`. Bisection on that count gives the full
//! spectrum.

use crate::error::{Error, Result};
use crate::operators::SparseSymmetric;

use super::eig::bisect;

struct TreePattern {
    diagonal: Vec<f64>,
    /// `(parent, weight)` for every vertex but the root; parents precede children.
    parent: Vec<(usize, f64)>,
}

fn tree_pattern(m: &SparseSymmetric) -> Result<TreePattern> {
    let n = m.dimension();
    let mut diagonal = vec![0.0; n];
    let mut parent = vec![(usize::MAX, 0.0); n];
    for &(r, c, v) in m.entries() {
        if r == c {
            diagonal[r] = v;
        } else if parent[c].0 != usize::MAX {
            return Err(Error::InvalidSparse(format!(
                "vertex {c} has two earlier neighbors; not a BFS-ordered tree"
            )));
        } else {
            parent[c] = (r, v);
        }
    }
    if let Some(v) = (1..n).find(|&v| parent[v].0 == usize::MAX) {
        return Err(Error::InvalidSparse(format!("vertex {v} has no parent")));
    }
    Ok(TreePattern { diagonal, parent })
}

impl TreePattern {
    fn count_below(&self, x: f64, pivmin: f64, pivots: &mut [f64]) -> usize {
        for (p, &d) in pivots.iter_mut().zip(&self.diagonal) {
            *p = d - x;
        }
        let mut count = 0;
        for v in (0..pivots.len()).rev() {
            let mut q = pivots[v];
            // an exact zero pivot is an eigenvalue at x; nudging it negative
            // counts it below x and decouples v from its parent
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
            if v > 0 {
                let (p, w) = self.parent[v];
                pivots[p] -= w * w / q;
            }
        }
        count
    }
}

/// Number of eigenvalues of `m` strictly below `x`; `m` must have the pattern
/// of a tree whose parents have smaller indices than their children.
pub fn tree_inertia_below(m: &SparseSymmetric, x: f64) -> Result<usize> {
    let t = tree_pattern(m)?;
    let mut pivots = vec![0.0; m.dimension()];
    Ok(t.count_below(x, pivmin(&t), &mut pivots))
}

fn pivmin(t: &TreePattern) -> f64 {
    let scale = t.parent.iter().fold(1.0f64, |s, &(_, w)| s.max(w * w));
    f64::MIN_POSITIVE * scale
}

/// All eigenvalues, ascending.
pub fn tree_eigenvalues(m: &SparseSymmetric) -> Result<Vec<f64>> {
    let t = tree_pattern(m)?;
    let n = m.dimension();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut radius = vec![0.0f64; n];
    for v in 1..n {
        let (p, w) = t.parent[v];
        radius[v] += w.abs();
        radius[p] += w.abs();
    }
    let lo = (0..n)
        .map(|v| t.diagonal[v] - radius[v])
        .fold(f64::INFINITY, f64::min);
    let hi = (0..n)
        .map(|v| t.diagonal[v] + radius[v])
        .fold(f64::NEG_INFINITY, f64::max);
    let norm = lo.abs().max(hi.abs()).max(1.0);
    let tol = 8.0 * f64::EPSILON * norm;
    let pm = pivmin(&t);
    let scratch = std::cell::RefCell::new(vec![0.0; n]);
    let count = |x: f64| t.count_below(x, pm, &mut scratch.borrow_mut());
    let mut out = Vec::with_capacity(n);
    bisect(&count, lo - tol, hi + tol, 0, n, tol, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_tree, TreeSpec};
    use crate::operators::{assemble, LaplacianKind};

    #[test]
    fn star_spectrum() {
        let t = build_tree(&TreeSpec::new(vec![1], vec![2]).unwrap(), 2).unwrap();
        let e = tree_eigenvalues(&assemble(&t, LaplacianKind::Adjacency)).unwrap();
        let s3 = 3f64.sqrt();
        let want = [-s3, 0.0, 0.0, s3];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-13, "{e:?}");
        }
    }

    #[test]
    fn matches_dense_on_small_trees() {
        let spec = TreeSpec::new(vec![1, 2, 4], vec![3, 2, 2]).unwrap();
        for kind in [LaplacianKind::Adjacency, LaplacianKind::GraphLaplacian] {
            let t = build_tree(&spec, 6).unwrap();
            let m = assemble(&t, kind);
            let e = tree_eigenvalues(&m).unwrap();
            let mut dense = m.to_dense().symmetric_eigenvalues().as_slice().to_vec();
            dense.sort_by(f64::total_cmp);
            assert_eq!(e.len(), dense.len());
            for (a, b) in e.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn rejects_non_tree() {
        let m =
            SparseSymmetric::from_entries(3, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]).unwrap();
        assert!(tree_eigenvalues(&m).is_err());
        let m = SparseSymmetric::from_entries(3, vec![(0, 1, 1.0)]).unwrap();
        assert!(tree_inertia_below(&m, 0.0).is_err());
    }
}
