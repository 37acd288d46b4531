//! Dense linear algebra as an independent reference for the sparse routes.

mod common;

use nalgebra::DMatrix;
use sts_core::decomp::{basis_for_tree, plan, verify_equivalence};
use sts_core::model::{build_tree, TreeSpec};
use sts_core::operators::{assemble, jacobi_block, jacobi_level, LaplacianKind};
use sts_core::spectral::{eig_tridiag, tree_eigenvalues, tridiag_eigenvalues_bisection};

const KINDS: [LaplacianKind; 2] = [LaplacianKind::Adjacency, LaplacianKind::GraphLaplacian];

fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn max_gap(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn dense_conjugation_is_block_diagonal() {
    let mut r = common::rng(17);
    for _ in 0..20 {
        let (spec, depth) = common::small_case(&mut r, 600);
        let tree = build_tree(&spec, depth).unwrap();
        let basis = basis_for_tree(&tree).unwrap();
        let n = tree.vertex_count();
        let mut u = DMatrix::zeros(n, n);
        for (i, row) in basis.rows.iter().enumerate() {
            for &(v, c) in &row.entries {
                u[(i, v)] = c;
            }
        }
        assert!((&u * u.transpose() - DMatrix::identity(n, n)).amax() < 1e-10);
        let layout = plan(&spec, depth as u64).unwrap();
        for kind in KINDS {
            let c = &u * assemble(&tree, kind).to_dense() * u.transpose();
            let mut expected = DMatrix::zeros(n, n);
            let mut at = 0;
            for level in &layout.levels {
                let block = jacobi_block(&spec, level.n, depth, kind)
                    .unwrap()
                    .to_dense();
                let len = block.nrows();
                for _ in 0..level.multiplicity {
                    expected.view_mut((at, at), (len, len)).copy_from(&block);
                    at += len;
                }
            }
            assert_eq!(at, n);
            assert!(
                (c - expected).amax() < 1e-10,
                "{spec} depth {depth} {kind:?}"
            );
        }
    }
}

#[test]
fn adjacency_blocks_match_infinite_volume_levels() {
    let mut r = common::rng(18);
    for _ in 0..50 {
        let (spec, depth) = common::small_case(&mut r, 2000);
        for level in plan(&spec, depth as u64).unwrap().levels {
            let len = level.block_length as usize;
            assert_eq!(
                jacobi_block(&spec, level.n, depth, LaplacianKind::Adjacency).unwrap(),
                jacobi_level(&spec, level.n, len, LaplacianKind::Adjacency).unwrap()
            );
            let cut = jacobi_block(&spec, level.n, depth, LaplacianKind::GraphLaplacian).unwrap();
            let open = jacobi_level(&spec, level.n, len, LaplacianKind::GraphLaplacian).unwrap();
            assert_eq!(cut.off_diagonal(), open.off_diagonal());
            assert_eq!(cut.diagonal()[..len - 1], open.diagonal()[..len - 1]);
        }
    }
}

#[test]
fn tree_spectrum_against_dense() {
    let mut r = common::rng(19);
    for _ in 0..20 {
        let (spec, depth) = common::small_case(&mut r, 800);
        let tree = build_tree(&spec, depth).unwrap();
        for kind in KINDS {
            let m = assemble(&tree, kind);
            let dense = sorted_eigenvalues(m.to_dense());
            assert!(max_gap(&tree_eigenvalues(&m).unwrap(), &dense) < 1e-9);
            let report = verify_equivalence(&spec, depth, kind).unwrap();
            assert!(report.eigenvalue_multiset_distance < 1e-9);
        }
    }
}

#[test]
fn tridiagonal_solvers_against_dense() {
    let mut r = common::rng(20);
    for _ in 0..20 {
        let spec = common::random_spec(&mut r, 4, 60, 9);
        for kind in KINDS {
            let j = jacobi_level(&spec, 0, 150, kind).unwrap();
            let dense = sorted_eigenvalues(j.to_dense());
            let ql = eig_tridiag(&j).eigenvalues();
            let bisection = tridiag_eigenvalues_bisection(&j, 1e-13);
            assert!(max_gap(&ql, &dense) < 1e-10);
            assert!(max_gap(&bisection, &dense) < 1e-10);
        }
    }
}

#[test]
fn weights_are_first_eigenvector_components() {
    let spec = TreeSpec::new(vec![2, 5, 9], vec![3, 2, 4]).unwrap();
    let j = jacobi_level(&spec, 0, 40, LaplacianKind::GraphLaplacian).unwrap();
    let eig = j.to_dense().symmetric_eigen();
    let mut dense: Vec<(f64, f64)> = eig
        .eigenvalues
        .iter()
        .zip(eig.eigenvectors.row(0).iter())
        .map(|(&e, &v)| (e, v * v))
        .collect();
    dense.sort_by(|a, b| a.0.total_cmp(&b.0));
    let measure = eig_tridiag(&j);
    for ((e1, w1), (e2, w2)) in measure.atoms.iter().zip(&dense) {
        assert!((e1 - e2).abs() < 1e-10 && (w1 - w2).abs() < 1e-10);
    }
}
