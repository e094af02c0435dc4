use netflow::formats::{
    load_bundle, load_distance_matrix, load_graph, parse_clusters_csv, save_bundle, save_distance_matrix,
    save_graph, GraphFormat,
};
use netflow_core::flow::pairwise_distance_matrix;
use netflow_core::generators::{bridge_deletion_scenario, sample_sbm, SbmParams};
use netflow_core::{Metric, TimeGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graph_files_round_trip(seed in any::<u64>(), p_in in 0.0f64..1.0, p_out in 0.0f64..0.3) {
        let params = SbmParams::two_block(10, 10, p_in, p_in, p_out).unwrap();
        let g = sample_sbm(&params, seed);
        let dir = tempfile::tempdir().unwrap();
        for (name, format) in [("g.csv", GraphFormat::Csv), ("g.tsv", GraphFormat::Tsv), ("g.txt", GraphFormat::Tsv)] {
            let path = dir.path().join(name);
            save_graph(&g, &path, format).unwrap();
            prop_assert_eq!(&load_graph(&path, GraphFormat::Auto).unwrap(), &g);
        }
    }

    #[test]
    fn matrix_files_round_trip(values in prop::collection::vec(0.0f64..1e6, 6)) {
        // upper triangle of a 4x4 matrix
        let mut m = netflow_core::Matrix::zeros(4, 4);
        let mut it = values.iter();
        for i in 0..4 {
            for j in i + 1..4 {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let labels: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let d = netflow_core::DistanceMatrix::new(labels, m, Metric::Gdd).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        save_distance_matrix(&d, &path).unwrap();
        prop_assert_eq!(load_distance_matrix(&path).unwrap(), d);
    }
}

#[test]
fn bundle_directory_round_trip() {
    let bundle = bridge_deletion_scenario(&netflow_core::generators::bridge_deletion_params(), 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let written = save_bundle(&bundle, dir.path()).unwrap();
    assert_eq!(written.len(), bundle.len() + 1);
    let back = load_bundle(dir.path()).unwrap();
    assert_eq!(back.graphs, bundle.graphs);
    assert_eq!(back.labels, bundle.labels);
    assert_eq!(back.ground_truth, bundle.ground_truth);
    assert_eq!(back.block_sizes, bundle.block_sizes);
}

#[test]
fn computed_matrix_survives_the_file() {
    let bundle = bridge_deletion_scenario(&netflow_core::generators::bridge_deletion_params(), 1).unwrap();
    let grid = TimeGrid::new(5.0, 100).unwrap();
    let d = pairwise_distance_matrix(&bundle.graphs, &bundle.labels, Metric::Nld, Some(&grid)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nld.csv");
    save_distance_matrix(&d, &path).unwrap();
    let back = load_distance_matrix(&path).unwrap();
    assert_eq!(back.matrix().as_slice(), d.matrix().as_slice());
}

#[test]
fn missing_file_is_io_error() {
    let err = load_graph(std::path::Path::new("/nonexistent/g.csv"), GraphFormat::Auto).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn malformed_cluster_file() {
    let p = std::path::Path::new("c.csv");
    assert!(parse_clusters_csv("label_id,graph_label,cluster\n1,G1,0\n", p).is_err());
    assert!(parse_clusters_csv("id,label\n", p).is_err());
}
