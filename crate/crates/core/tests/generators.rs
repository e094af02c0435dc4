use netflow_core::generators::{
    bridge_deletion_params, bridge_deletion_scenario, sample_sbm, two_sbm_scenario, SbmParams,
};
use netflow_core::graph::hamming_distance;

#[test]
fn sbm_mean_edge_count() {
    // 2 * 45 within-block pairs at 0.8 and 100 cross pairs at 0.05
    let params = SbmParams::two_block(10, 10, 0.8, 0.8, 0.05).unwrap();
    let expected = 0.8 * 45.0 * 2.0 + 0.05 * 100.0;
    let variance = 90.0 * 0.8 * 0.2 + 100.0 * 0.05 * 0.95;
    let draws = 1000;
    let mean = (0..draws).map(|s| sample_sbm(&params, s).edge_count() as f64).sum::<f64>() / draws as f64;
    let standard_error = (variance / draws as f64).sqrt();
    assert!((mean - expected).abs() < 3.0 * standard_error, "mean {mean}, expected {expected}");
}

#[test]
fn second_sbm_has_twice_the_bridges() {
    let (mut first, mut second) = (0usize, 0usize);
    for seed in 0..200 {
        let b = two_sbm_scenario(seed).unwrap();
        first += (0..10).map(|i| b.inter_block_edges(i)).sum::<usize>();
        second += (10..20).map(|i| b.inter_block_edges(i)).sum::<usize>();
    }
    let ratio = second as f64 / first as f64;
    assert!((ratio - 2.0).abs() < 0.15, "ratio {ratio}");
}

#[test]
fn bridge_children_differ_from_parent_by_one_edge() {
    for seed in 0..30 {
        let b = bridge_deletion_scenario(&bridge_deletion_params(), seed).unwrap();
        assert_eq!(b.len(), 7);
        assert_eq!(b.ground_truth, vec![0, 1, 0, 0, 0, 1, 0]);
        let parent = &b.graphs[0];
        assert!(parent.is_connected());
        assert_eq!(b.inter_block_edges(0), 2);
        for (i, child) in b.graphs.iter().enumerate().skip(1) {
            assert_eq!(hamming_distance(parent, child).unwrap(), 1);
            assert!(child.is_connected() == (b.ground_truth[i] == 0) || b.inter_block_edges(i) == 1);
        }
    }
}
