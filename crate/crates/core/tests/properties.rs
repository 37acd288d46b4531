use num_complex::Complex64;
use proptest::prelude::*;
use sts_core::config::{parse_spec_file, render_spec_file};
use sts_core::decomp::plan;
use sts_core::model::{
    build_tree, kappa, preset, sphere_size, vertex_count, PresetParams, TreeSpec,
};
use sts_core::operators::{
    assemble, jacobi_level, strip, JacobiMatrix, JacobiSource, LaplacianKind, SparseSymmetric,
};
use sts_core::spectral::{
    eig_tridiag, m_function, moments, simon_stolz_sum, transfer_product, SpectralMeasure,
};

fn spec_strategy(max_levels: usize, max_gap: u64, max_k: u64) -> impl Strategy<Value = TreeSpec> {
    prop::collection::vec((1..=max_gap, 2..=max_k), 1..=max_levels).prop_map(|steps| {
        let mut position = 0;
        let (positions, factors) = steps
            .into_iter()
            .map(|(gap, k)| {
                position += gap;
                (position, k)
            })
            .unzip();
        TreeSpec::new(positions, factors).unwrap()
    })
}

/// Specs with a depth keeping the tree under `max_vertices`.
fn tree_strategy(max_vertices: u64) -> impl Strategy<Value = (TreeSpec, usize)> {
    (spec_strategy(4, 3, 4), 0..=10u64).prop_map(move |(spec, mut depth)| {
        while vertex_count(&spec, depth).unwrap() > max_vertices {
            depth -= 1;
        }
        (spec, depth as usize)
    })
}

fn kind_strategy() -> impl Strategy<Value = LaplacianKind> {
    prop_oneof![
        Just(LaplacianKind::Adjacency),
        Just(LaplacianKind::GraphLaplacian)
    ]
}

fn jacobi_strategy(max_len: usize) -> impl Strategy<Value = JacobiMatrix> {
    (1..=max_len).prop_flat_map(|n| {
        (
            prop::collection::vec(0.5..2.0f64, n - 1),
            prop::collection::vec(-2.0..2.0f64, n),
        )
            .prop_map(|(a, b)| JacobiMatrix::new(a, b).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn sphere_sizes_multiply_by_kappa(spec in spec_strategy(5, 6, 6), depth in 0..40u64) {
        let mut total = 0;
        for r in 0..=depth {
            let s = sphere_size(&spec, r).unwrap();
            total += s;
            prop_assert_eq!(sphere_size(&spec, r + 1).unwrap(), s * kappa(&spec, r));
        }
        prop_assert_eq!(vertex_count(&spec, depth).unwrap(), total);
    }

    #[test]
    fn tree_topology((spec, depth) in tree_strategy(3000)) {
        let tree = build_tree(&spec, depth).unwrap();
        let mut children = vec![0u64; tree.vertex_count()];
        for v in 1..tree.vertex_count() {
            let p = tree.parent(v).unwrap();
            prop_assert_eq!(tree.radius(p) + 1, tree.radius(v));
            children[p] += 1;
        }
        for (v, &c) in children.iter().enumerate() {
            let r = tree.radius(v);
            let expected = if r < depth { kappa(&spec, r as u64) } else { 0 };
            prop_assert_eq!(c, expected);
        }
    }

    #[test]
    fn adjacency_has_unit_tree_edges((spec, depth) in tree_strategy(3000)) {
        let tree = build_tree(&spec, depth).unwrap();
        let a = assemble(&tree, LaplacianKind::Adjacency);
        prop_assert_eq!(a.entries().len(), tree.vertex_count() - 1);
        prop_assert!(a.entries().iter().all(|&(r, c, v)| r < c && v == 1.0));
    }

    #[test]
    fn graph_laplacian_is_adjacency_minus_degree((spec, depth) in tree_strategy(500)) {
        let tree = build_tree(&spec, depth).unwrap();
        let a = assemble(&tree, LaplacianKind::Adjacency).to_dense();
        let l = assemble(&tree, LaplacianKind::GraphLaplacian).to_dense();
        for i in 0..tree.vertex_count() {
            let degree: f64 = a.row(i).iter().sum();
            for j in 0..tree.vertex_count() {
                let expected = a[(i, j)] - if i == j { degree } else { 0.0 };
                prop_assert_eq!(l[(i, j)], expected);
            }
        }
    }

    #[test]
    fn dimension_identity(spec in spec_strategy(6, 30, 5), depth in 0..300u64) {
        let layout = plan(&spec, depth).unwrap();
        prop_assert_eq!(layout.total_dimension().unwrap(), vertex_count(&spec, depth).unwrap());
    }

    #[test]
    fn level_stripping(spec in spec_strategy(4, 8, 6), length in 1..60usize, kind in kind_strategy()) {
        let levels = spec.branch_levels();
        for n2 in 0..=levels {
            for n1 in n2 + 1..=levels {
                let shift = (spec.level_radius(n1).unwrap() - spec.level_radius(n2).unwrap()) as usize;
                let outer = jacobi_level(&spec, n2, length + shift, kind).unwrap();
                prop_assert_eq!(strip(&outer, shift).unwrap(), jacobi_level(&spec, n1, length, kind).unwrap());
            }
        }
    }

    #[test]
    fn barrier_positions(spec in spec_strategy(4, 8, 6), length in 1..60usize) {
        let levels = spec.branch_levels();
        for n in 0..=levels {
            let j = jacobi_level(&spec, n, length, LaplacianKind::Adjacency).unwrap();
            let rn = spec.level_radius(n).unwrap() as usize;
            let mut expected = std::collections::BTreeMap::new();
            for m in n + 1..=levels {
                let offset = spec.level_radius(m).unwrap() as usize - rn;
                if offset < length {
                    expected.insert(offset, (spec.factors()[m - 1] as f64).sqrt());
                }
            }
            for (i, &a) in j.off_diagonal().iter().enumerate() {
                prop_assert_eq!(a, expected.get(&(i + 1)).copied().unwrap_or(1.0));
            }
        }
    }

    #[test]
    fn measure_is_normalized_and_matches_moments(j in jacobi_strategy(500)) {
        let measure = eig_tridiag(&j);
        prop_assert!((measure.total_weight() - 1.0).abs() < 1e-10);
        prop_assert!(measure.atoms.iter().all(|&(_, w)| w >= 0.0));
        let mut e1 = vec![0.0; j.len()];
        e1[0] = 1.0;
        let direct = moments(&j, &e1, 12).unwrap();
        for (p, &m) in direct.iter().enumerate() {
            let from_measure = measure.moment(p as u32);
            prop_assert!((from_measure - m).abs() <= 1e-8 * m.abs().max(1.0), "p={} {} {}", p, from_measure, m);
        }
    }

    #[test]
    fn herglotz_and_stripping_recursion(j in jacobi_strategy(200), re in -3.0..3.0f64, im in 1e-3..3.0f64) {
        prop_assume!(j.len() >= 2);
        for z in [Complex64::new(re, im), Complex64::i(), Complex64::new(1.0, 1.0), Complex64::new(-0.5, 0.1)] {
            let m = m_function(&j, z, j.len()).unwrap();
            prop_assert!(m.im > 0.0);
            let tail = m_function(&strip(&j, 1).unwrap(), z, j.len() - 1).unwrap();
            let a = j.a(1);
            let rhs = 1.0 / (j.b(1) - z - a * a * tail);
            prop_assert!((m - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn transfer_determinant(j in jacobi_strategy(300), energy in -2.5..2.5f64) {
        // floating point resolves det only while ‖T‖² / |det| stays moderate
        for n in 1..=j.len() {
            let state = transfer_product(&j, energy, n);
            if 2.0 * state.log_norm() - state.log_det_expected > 13.0 {
                break;
            }
            prop_assert!(state.determinant_residual() < 1e-9, "n={} {}", n, state.determinant_residual());
        }
    }

    #[test]
    fn simon_stolz_monotone(spec in spec_strategy(4, 50, 6), energy in -2.0..2.0f64) {
        let j = jacobi_level(&spec, 0, 2000, LaplacianKind::Adjacency).unwrap();
        let sums = simon_stolz_sum(&j, energy, 2000);
        prop_assert!(sums.windows(2).all(|w| w[1].sum >= w[0].sum));
    }

    #[test]
    fn jacobi_csv_round_trip(j in jacobi_strategy(50)) {
        let text = j.to_csv();
        let parsed = JacobiMatrix::from_csv(&text).unwrap();
        prop_assert_eq!(&parsed, &j);
        prop_assert_eq!(parsed.to_csv(), text);
    }

    #[test]
    fn measure_csv_round_trip(j in jacobi_strategy(50)) {
        let text = eig_tridiag(&j).to_csv();
        prop_assert_eq!(SpectralMeasure::from_csv(&text).unwrap().to_csv(), text);
    }

    #[test]
    fn sparse_text_round_trip((spec, depth) in tree_strategy(300), kind in kind_strategy()) {
        let m = assemble(&build_tree(&spec, depth).unwrap(), kind);
        let text = m.to_coordinate_text();
        let parsed = SparseSymmetric::from_coordinate_text(&text, Some(m.dimension())).unwrap();
        prop_assert_eq!(&parsed, &m);
    }

    #[test]
    fn spec_file_round_trip(spec in spec_strategy(6, 100, 9), depth in prop::option::of(0..100usize)) {
        let text = render_spec_file(&spec, depth);
        let file = parse_spec_file(&text).unwrap();
        prop_assert_eq!(file.spec.positions(), spec.positions());
        prop_assert_eq!(file.spec.factors(), spec.factors());
        prop_assert_eq!(file.depth, depth);
    }
}

#[test]
fn free_transfer_is_bounded() {
    let j = JacobiMatrix::free(100_001);
    for energy in [-1.5, -0.5, 0.0, 0.5, 1.5] {
        let sums = simon_stolz_sum(&j, energy, 100_000);
        let sup = sums
            .iter()
            .map(|p| p.log_norm)
            .fold(f64::MIN, f64::max)
            .exp();
        assert!(sup < 10.0, "E={energy}: {sup}");
    }
}

#[test]
fn sparse_transfer_determinant() {
    let spec = preset(
        "unbounded_k",
        &[("levels".to_string(), "5".to_string())]
            .into_iter()
            .collect(),
    )
    .unwrap();
    let j = jacobi_level(&spec, 0, 20_000, LaplacianKind::Adjacency).unwrap();
    for energy in [-1.1, 0.3, 0.7] {
        let state = transfer_product(&j, energy, 20_000);
        assert!(2.0 * state.log_norm() - state.log_det_expected < 13.0);
        assert!(
            state.determinant_residual() < 1e-9,
            "{}",
            state.determinant_residual()
        );
    }
}

#[test]
fn preset_families() {
    let params = |pairs: &[(&str, &str)]| -> PresetParams {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    };
    let bounded = preset("bounded_k", &params(&[("k0", "3"), ("levels", "8")])).unwrap();
    assert!(bounded.factors().iter().all(|&k| k == 3));
    for beta in ["1", "1.5", "2", "2.5"] {
        let spec = preset("jl_beta", &params(&[("beta", beta), ("levels", "2")])).unwrap();
        let b: f64 = beta.parse().unwrap();
        for (&l, &k) in spec.positions().iter().zip(spec.factors()) {
            assert_eq!(k, (l as f64).powf(b).floor() as u64);
        }
    }
}
