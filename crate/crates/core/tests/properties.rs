use netflow_core::clustering::{
    adjusted_rand_index, similarity_matrix, spectral_cluster, top_eigenvectors,
};
use netflow_core::flow::{nld_distance, pairwise_distance_matrix};
use netflow_core::generators::{sample_sbm_stream, SbmParams};
use netflow_core::graph::{frobenius_laplacian_distance, hamming_distance};
use netflow_core::spectral::{eigendecompose, heat_kernel, heat_kernel_series_oracle};
use netflow_core::{Graph, Matrix, Metric, TimeGrid};
use proptest::prelude::*;

fn sbm(seed: u64, stream: u64) -> Graph {
    let params = SbmParams::two_block(8, 7, 0.6, 0.5, 0.1).unwrap();
    sample_sbm_stream(&params, seed, stream)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heat_kernel_is_stochastic_and_matches_series(seed in any::<u64>(), t in 0.0f64..20.0) {
        let g = sbm(seed, 0);
        let l = g.laplacian();
        let s = eigendecompose(&l).unwrap();
        let h = heat_kernel(&s, t).unwrap();
        let m = h.matrix();
        for i in 0..m.rows() {
            prop_assert!((m.row(i).iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
        prop_assert!(m.symmetry_error() < 1e-12);
        prop_assert!(m.as_slice().iter().all(|&x| x > -1e-12));
        let series = heat_kernel_series_oracle(&l, t, 1e-18).unwrap();
        prop_assert!(m.max_abs_diff(series.matrix()) < 1e-9);
    }

    #[test]
    fn heat_kernel_semigroup(seed in any::<u64>(), a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let s = eigendecompose(&sbm(seed, 0).laplacian()).unwrap();
        let product = heat_kernel(&s, a).unwrap().matrix().matmul(heat_kernel(&s, b).unwrap().matrix()).unwrap();
        prop_assert!(product.max_abs_diff(heat_kernel(&s, a + b).unwrap().matrix()) < 1e-10);
    }

    #[test]
    fn edit_distances_are_metrics(seed in any::<u64>()) {
        let g: Vec<Graph> = (0..3).map(|s| sbm(seed, s)).collect();
        for i in 0..3 {
            prop_assert_eq!(hamming_distance(&g[i], &g[i]).unwrap(), 0);
            prop_assert_eq!(frobenius_laplacian_distance(&g[i], &g[i]).unwrap(), 0.0);
            for j in 0..3 {
                prop_assert_eq!(hamming_distance(&g[i], &g[j]).unwrap(), hamming_distance(&g[j], &g[i]).unwrap());
                for k in 0..3 {
                    let h = |a: usize, b: usize| hamming_distance(&g[a], &g[b]).unwrap();
                    prop_assert!(h(i, k) <= h(i, j) + h(j, k));
                    let f = |a: usize, b: usize| frobenius_laplacian_distance(&g[a], &g[b]).unwrap();
                    prop_assert!(f(i, k) <= f(i, j) + f(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn remove_then_add_is_identity(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let g = sbm(seed, 0);
        let edges: Vec<_> = g.edges().collect();
        prop_assume!(!edges.is_empty());
        let (u, v) = edges[pick.index(edges.len())];
        let removed = g.remove_edge(u, v).unwrap();
        prop_assert_eq!(hamming_distance(&g, &removed).unwrap(), 1);
        prop_assert_eq!(removed.add_edge(v, u).unwrap(), g);
    }

    #[test]
    fn nld_is_symmetric_and_vanishes_on_self(seed in any::<u64>()) {
        let grid = TimeGrid::new(10.0, 200).unwrap();
        let (a, b) = (sbm(seed, 0), sbm(seed, 1));
        let ab = nld_distance(&a, &b, &grid).unwrap();
        let ba = nld_distance(&b, &a, &grid).unwrap();
        prop_assert_eq!(ab.total, ba.total);
        prop_assert_eq!(nld_distance(&a, &a, &grid).unwrap().total, 0.0);
        let per_node: f64 = ab.per_node.iter().sum();
        prop_assert!((per_node - ab.total).abs() <= 1e-9 * ab.total.max(1.0));
    }

    #[test]
    fn ari_symmetric_and_label_invariant(
        a in prop::collection::vec(0usize..3, 12),
        b in prop::collection::vec(0usize..3, 12),
    ) {
        let ab = adjusted_rand_index(&a, &b).unwrap();
        prop_assert!((ab - adjusted_rand_index(&b, &a).unwrap()).abs() < 1e-12);
        let relabeled: Vec<usize> = a.iter().map(|&x| (x + 1) % 3).collect();
        prop_assert!((ab - adjusted_rand_index(&relabeled, &b).unwrap()).abs() < 1e-12);
        prop_assert!((adjusted_rand_index(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!(ab <= 1.0 + 1e-12);
    }

    #[test]
    fn similarity_decreases_with_distance(values in prop::collection::vec(0.0f64..10.0, 10)) {
        let mut m = Matrix::zeros(5, 5);
        let mut it = values.iter();
        for i in 0..5 {
            for j in i + 1..5 {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let labels = (0..5).map(|i| i.to_string()).collect();
        let d = netflow_core::DistanceMatrix::new(labels, m, Metric::Nld).unwrap();
        let Ok(s) = similarity_matrix(&d) else { return Ok(()) };
        let pairs: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        for &(i, j) in &pairs {
            for &(k, l) in &pairs {
                if d.get(i, j) < d.get(k, l) {
                    prop_assert!(s.matrix()[(i, j)] > s.matrix()[(k, l)]);
                }
            }
        }
    }
}

/// Shifting a matrix by a multiple of the identity keeps its eigenvectors
/// but sends the eigensolver down a different rotation sequence.
#[test]
fn spectral_embedding_ignores_solver_sign_choices() {
    let grid = TimeGrid::new(4.0, 200).unwrap();
    for seed in 0..10 {
        let graphs: Vec<Graph> = (0..12).map(|s| sbm(seed, s)).collect();
        let labels: Vec<String> = (0..12).map(|i| format!("G{i}")).collect();
        let d = pairwise_distance_matrix(&graphs, &labels, Metric::Nld, Some(&grid)).unwrap();
        let s = similarity_matrix(&d).unwrap();
        let base = top_eigenvectors(s.matrix(), 2).unwrap();
        for shift in [0.5, 3.0, -2.0] {
            let shifted = s.matrix().add(&Matrix::identity(12).scale(shift)).unwrap();
            let v = top_eigenvectors(&shifted, 2).unwrap();
            assert!(v.max_abs_diff(&base) < 1e-8, "seed {seed} shift {shift}");
        }
        for c in 0..2 {
            let col = base.column(c);
            let big = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(big > 0.0);
        }
        let a = spectral_cluster(&s, 2, seed).unwrap();
        assert_eq!(a.labels.len(), 12);
    }
}
