//! Block decomposition of the truncated tree Laplacian.
//!
//! The Hilbert space of a depth-`D` tree splits into sectors indexed by level
//! `n` (with `R_n <= D`). Sector `n` carries `M_n` identical copies of the
//! Jacobi block `J_n` truncated to `D - R_n + 1` rows. The basis realizing the
//! split is written down in closed form: a zero-sum seed vector on each group
//! of siblings at sphere `R_n`, spread uniformly over the forward subtrees and
//! renormalized sphere by sphere.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{build_tree, sphere_size, vertex_count, SHTree, TreeSpec};
use crate::operators::{assemble, jacobi_block, LaplacianKind, SparseSymmetric};
use crate::spectral::{eig_tridiag, tree_eigenvalues};

/// Largest tree for which [`verify_equivalence`] runs the dense conjugation.
pub const DENSE_CONJUGATION_LIMIT: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LevelRecord {
    pub n: usize,
    #[serde(rename = "Rn")]
    pub radius: u64,
    #[serde(rename = "Mn")]
    pub multiplicity: u64,
    #[serde(rename = "len")]
    pub block_length: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionPlan {
    pub depth: u64,
    pub levels: Vec<LevelRecord>,
}

impl DecompositionPlan {
    /// `Σ M_n · len_n`, checked.
    pub fn total_dimension(&self) -> Result<u64> {
        self.levels.iter().try_fold(0u64, |acc, l| {
            l.multiplicity
                .checked_mul(l.block_length)
                .and_then(|d| acc.checked_add(d))
                .ok_or(Error::Overflow {
                    what: "plan dimension",
                })
        })
    }
}

/// Levels with `R_n <= depth`, with `M_0 = 1` and `M_n = α_{n-1}(k_n - 1)`.
pub fn plan(spec: &TreeSpec, depth: u64) -> Result<DecompositionPlan> {
    let mut levels = vec![LevelRecord {
        n: 0,
        radius: 0,
        multiplicity: 1,
        block_length: depth + 1,
    }];
    let mut alpha: u64 = 1;
    for n in 1..=spec.branch_levels() {
        let radius = spec.level_radius(n)?;
        if radius > depth {
            break;
        }
        let k = spec.factors()[n - 1];
        let multiplicity = alpha.checked_mul(k - 1).ok_or(Error::Overflow {
            what: "multiplicity",
        })?;
        alpha = alpha
            .checked_mul(k)
            .ok_or(Error::Overflow { what: "alpha_n" })?;
        levels.push(LevelRecord {
            n,
            radius,
            multiplicity,
            block_length: depth - radius + 1,
        });
    }
    Ok(DecompositionPlan { depth, levels })
}

/// Helmert rows: `k - 1` orthonormal vectors in `R^k`, each orthogonal to the
/// all-ones vector. Row `t` (1-based) is `t` copies of `1/√(t(t+1))`, then
/// `-t/√(t(t+1))`, then zeros.
pub fn sibling_block_basis(k: usize) -> Vec<Vec<f64>> {
    assert!(k >= 2, "sibling groups have at least two vertices");
    (1..k)
        .map(|t| {
            let norm = ((t * (t + 1)) as f64).sqrt();
            let mut row = vec![0.0; k];
            row[..t].iter_mut().for_each(|x| *x = 1.0 / norm);
            row[t] = -(t as f64) / norm;
            row
        })
        .collect()
}

/// One basis vector, tagged by sector, copy and sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisRow {
    pub level: usize,
    /// 1-based copy index `j ∈ 1..=M_n`.
    pub copy: u64,
    pub radius: usize,
    /// `(vertex, coefficient)`, vertices increasing.
    pub entries: Vec<(usize, f64)>,
}

/// Rows ordered by `(level, copy, radius)`, so the conjugated operator is
/// block diagonal with one Jacobi block per `(level, copy)`.
#[derive(Clone, Debug)]
pub struct OrthogonalBasis {
    pub rows: Vec<BasisRow>,
    pub dimension: usize,
}

impl OrthogonalBasis {
    /// For each vertex, the rows touching it: `(row index, coefficient)`.
    fn columns(&self) -> Vec<Vec<(usize, f64)>> {
        let mut cols = vec![Vec::new(); self.dimension];
        for (i, row) in self.rows.iter().enumerate() {
            for &(v, c) in &row.entries {
                cols[v].push((i, c));
            }
        }
        cols
    }

    /// `max |⟨row_i, row_j⟩ - δ_ij|` over all pairs.
    pub fn orthonormality_residual(&self) -> f64 {
        let cols = self.columns();
        (0..self.rows.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0f64; self.rows.len()], Vec::<usize>::new()),
                |(acc, touched), i| {
                    for &(v, c) in &self.rows[i].entries {
                        for &(j, cj) in &cols[v] {
                            if acc[j] == 0.0 {
                                touched.push(j);
                            }
                            acc[j] += c * cj;
                        }
                    }
                    let mut worst = if touched.contains(&i) { 0.0f64 } else { 1.0 };
                    for &j in touched.iter() {
                        let target = if i == j { 1.0 } else { 0.0 };
                        worst = worst.max((acc[j] - target).abs());
                        acc[j] = 0.0;
                    }
                    touched.clear();
                    worst
                },
            )
            .reduce(|| 0.0, f64::max)
    }

    /// Rows that touch a vertex off their own sphere, or a sphere inside `R_n`.
    pub fn support_violations(&self, tree: &SHTree) -> usize {
        let spec = tree.spec();
        self.rows
            .iter()
            .filter(|row| {
                let inner = spec
                    .level_radius(row.level)
                    .map_or(true, |r| row.radius < r as usize);
                inner
                    || row
                        .entries
                        .iter()
                        .any(|&(v, _)| tree.radius(v) != row.radius)
            })
            .count()
    }

    /// Maximum `|Σ_{l in group} a^l|` over the seed rows (`radius == R_n`)
    /// of every level `n >= 1`, summed per sibling group at sphere `R_n`.
    pub fn seed_group_sum_residual(&self, tree: &SHTree) -> f64 {
        let spec = tree.spec();
        let mut worst = 0.0f64;
        for row in &self.rows {
            if row.level == 0 {
                continue;
            }
            let seed = spec.level_radius(row.level).unwrap() as usize;
            if row.radius != seed {
                continue;
            }
            let mut sums = std::collections::BTreeMap::<usize, f64>::new();
            for &(v, c) in &row.entries {
                *sums.entry(tree.parent(v).unwrap()).or_default() += c;
            }
            worst = sums.values().fold(worst, |w, s| w.max(s.abs()));
        }
        worst
    }
}

/// Closed-form orthonormal basis of `ℓ²` of the depth-`depth` tree.
pub fn build_basis(spec: &TreeSpec, depth: usize) -> Result<OrthogonalBasis> {
    basis_for_tree(&build_tree(spec, depth)?)
}

pub fn basis_for_tree(tree: &SHTree) -> Result<OrthogonalBasis> {
    let spec = tree.spec();
    let depth = tree.depth();
    let layout = plan(spec, depth as u64)?;
    let mut rows = Vec::with_capacity(tree.vertex_count());

    for r in 0..=depth {
        let sphere = tree.sphere(r);
        let c = 1.0 / (sphere.len() as f64).sqrt();
        rows.push(BasisRow {
            level: 0,
            copy: 1,
            radius: r,
            entries: sphere.map(|v| (v, c)).collect(),
        });
    }

    for record in &layout.levels[1..] {
        let n = record.n;
        let seed = record.radius as usize;
        let k = spec.factors()[n - 1] as usize;
        let groups = sphere_size(spec, seed as u64 - 1)? as usize;
        let alpha = groups * k;
        let helmert = sibling_block_basis(k);
        for group in 0..groups {
            for (t, h) in helmert.iter().enumerate() {
                let copy = (group * (k - 1) + t + 1) as u64;
                for r in seed..=depth {
                    let sphere = tree.sphere(r);
                    // descendants of each seed vertex on sphere r
                    let per_subtree = sphere.len() / alpha;
                    let rho = (per_subtree as f64).sqrt();
                    let mut entries = Vec::with_capacity((t + 2) * per_subtree);
                    for (i, &coef) in h.iter().enumerate() {
                        if coef == 0.0 {
                            continue;
                        }
                        let l = group * k + i;
                        let start = sphere.start + l * per_subtree;
                        entries.extend((start..start + per_subtree).map(|v| (v, coef / rho)));
                    }
                    rows.push(BasisRow {
                        level: n,
                        copy,
                        radius: r,
                        entries,
                    });
                }
            }
        }
    }
    debug_assert_eq!(rows.len(), tree.vertex_count());
    Ok(OrthogonalBasis {
        rows,
        dimension: tree.vertex_count(),
    })
}

/// `U M Uᵀ` in basis order, dense.
pub fn conjugate(basis: &OrthogonalBasis, m: &SparseSymmetric) -> Result<DMatrix<f64>> {
    if m.dimension() != basis.dimension {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension,
            found: m.dimension(),
        });
    }
    let dim = basis.dimension;
    let size = basis.rows.len();
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    for &(r, c, v) in m.entries() {
        adjacency[r].push((c, v));
        if r != c {
            adjacency[c].push((r, v));
        }
    }
    let cols = basis.columns();
    let rows: Vec<Vec<f64>> = (0..size)
        .into_par_iter()
        .map_init(
            || (vec![0.0f64; dim], Vec::<usize>::new()),
            |(y, touched), i| {
                for &(v, c) in &basis.rows[i].entries {
                    for &(w, val) in &adjacency[v] {
                        if y[w] == 0.0 {
                            touched.push(w);
                        }
                        y[w] += c * val;
                    }
                }
                let mut out = vec![0.0; size];
                for &w in touched.iter() {
                    for &(j, cj) in &cols[w] {
                        out[j] += y[w] * cj;
                    }
                    y[w] = 0.0;
                }
                touched.clear();
                out
            },
        )
        .collect();
    // symmetric, so rows double as columns
    Ok(DMatrix::from_fn(size, size, |i, j| rows[j][i]))
}

/// Outcome of [`verify_equivalence`]. Residuals that need the dense
/// conjugation are `None` above [`DENSE_CONJUGATION_LIMIT`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    #[serde(rename = "dimension_identity")]
    pub dimension_identity_holds: bool,
    #[serde(rename = "orthonormality_residual")]
    pub max_orthonormality_residual: f64,
    #[serde(rename = "offblock_residual")]
    pub max_offblock_residual: Option<f64>,
    /// Largest deviation of a diagonal block from its Jacobi matrix.
    #[serde(rename = "block_residual")]
    pub max_block_residual: Option<f64>,
    #[serde(rename = "eig_multiset_distance")]
    pub eigenvalue_multiset_distance: f64,
    pub levels: Vec<LevelRecord>,
}

impl EquivalenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Splits a conjugated matrix into the off-block residual and the largest
/// deviation of each diagonal block from `blocks[level]`.
fn block_residuals(
    conj: &DMatrix<f64>,
    layout: &DecompositionPlan,
    blocks: &[DMatrix<f64>],
) -> (f64, f64) {
    // start offset of every (level, copy) block
    let mut starts = Vec::new();
    let mut owner = Vec::new();
    let mut offset = 0;
    for (li, record) in layout.levels.iter().enumerate() {
        let len = record.block_length as usize;
        for _ in 0..record.multiplicity {
            starts.push((offset, li));
            owner.extend(std::iter::repeat_n(starts.len() - 1, len));
            offset += len;
        }
    }
    let size = conj.nrows();
    let (off, diag) = (0..size)
        .into_par_iter()
        .map(|j| {
            let mut off = 0.0f64;
            let mut diag = 0.0f64;
            for i in 0..size {
                let x = conj[(i, j)];
                if owner[i] == owner[j] {
                    let (start, li) = starts[owner[i]];
                    diag = diag.max((x - blocks[li][(i - start, j - start)]).abs());
                } else {
                    off = off.max(x.abs());
                }
            }
            (off, diag)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    (off, diag)
}

/// `sup_i |x_i - y_i|` after sorting both; `∞` if the lengths differ.
pub fn multiset_distance(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() {
        return f64::INFINITY;
    }
    let mut x = x.to_vec();
    let mut y = y.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    x.iter()
        .zip(&y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Checks the block decomposition of the depth-`depth` tree two ways: by
/// conjugating with the explicit basis, and by comparing the tree spectrum
/// (computed directly on the tree) with the multiplicity-weighted block
/// spectra.
pub fn verify_equivalence(
    spec: &TreeSpec,
    depth: usize,
    kind: LaplacianKind,
) -> Result<EquivalenceReport> {
    let layout = plan(spec, depth as u64)?;
    let dimension_identity_holds = layout.total_dimension()? == vertex_count(spec, depth as u64)?;
    let tree = build_tree(spec, depth)?;
    let matrix = assemble(&tree, kind);
    let basis = basis_for_tree(&tree)?;
    let blocks: Vec<_> = layout
        .levels
        .iter()
        .map(|l| jacobi_block(spec, l.n, depth, kind))
        .collect::<Result<_>>()?;

    let max_orthonormality_residual = basis.orthonormality_residual();
    let (max_offblock_residual, max_block_residual) =
        if tree.vertex_count() <= DENSE_CONJUGATION_LIMIT {
            let conj = conjugate(&basis, &matrix)?;
            let dense: Vec<_> = blocks.iter().map(|b| b.to_dense()).collect();
            let (off, diag) = block_residuals(&conj, &layout, &dense);
            (Some(off), Some(diag))
        } else {
            (None, None)
        };

    let tree_spectrum = tree_eigenvalues(&matrix)?;
    let mut block_spectrum = Vec::with_capacity(tree.vertex_count());
    let spectra: Vec<_> = blocks.par_iter().map(eig_tridiag).collect();
    for (record, measure) in layout.levels.iter().zip(spectra) {
        for _ in 0..record.multiplicity {
            block_spectrum.extend(measure.atoms.iter().map(|&(e, _)| e));
        }
    }

    Ok(EquivalenceReport {
        dimension_identity_holds,
        max_orthonormality_residual,
        max_offblock_residual,
        max_block_residual,
        eigenvalue_multiset_distance: multiset_distance(&tree_spectrum, &block_spectrum),
        levels: layout.levels,
    })
}
