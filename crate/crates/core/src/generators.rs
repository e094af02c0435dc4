//! Stochastic block models and the experiment scenarios built on them.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{input, Error, Result};
use crate::flow::default_labels;
use crate::graph::Graph;
use crate::rng::SeededStream;

/// Resampling budget for [`bridge_deletion_scenario`].
pub const DEFAULT_RESAMPLE_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    block_sizes: Vec<usize>,
    link_probs: Vec<Vec<f64>>,
    block_of: Vec<usize>,
}

impl SbmParams {
    pub fn new(block_sizes: Vec<usize>, link_probs: Vec<Vec<f64>>) -> Result<Self> {
        let k = block_sizes.len();
        if k == 0 {
            return Err(input("need at least one block"));
        }
        if block_sizes.contains(&0) {
            return Err(input("block sizes must be positive"));
        }
        if link_probs.len() != k || link_probs.iter().any(|r| r.len() != k) {
            return Err(input(format!("link probabilities must be {k}x{k}")));
        }
        for a in 0..k {
            for b in 0..k {
                let p = link_probs[a][b];
                if !(0.0..=1.0).contains(&p) {
                    return Err(input(format!("probability {p} at ({a},{b}) outside [0,1]")));
                }
                if p != link_probs[b][a] {
                    return Err(input("link probabilities must be symmetric"));
                }
            }
        }
        let block_of = block_assignment(&block_sizes);
        Ok(Self {
            block_sizes,
            link_probs,
            block_of,
        })
    }

    /// Two blocks with within-block probabilities `p11`, `p22` and
    /// between-block probability `p12`.
    pub fn two_block(n1: usize, n2: usize, p11: f64, p22: f64, p12: f64) -> Result<Self> {
        Self::new(vec![n1, n2], vec![vec![p11, p12], vec![p12, p22]])
    }

    pub fn n(&self) -> usize {
        self.block_of.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn link_prob(&self, a: usize, b: usize) -> f64 {
        self.link_probs[a][b]
    }

    pub fn block_of(&self, node: usize) -> usize {
        self.block_of[node]
    }
}

/// Block index of every node for consecutive blocks of the given sizes.
pub fn block_assignment(block_sizes: &[usize]) -> Vec<usize> {
    block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| core::iter::repeat_n(b, size))
        .collect()
}

/// One SBM draw from stream `stream` of `seed`.
///
/// Pairs `(i, j)`, `i < j`, are visited row-major over the upper triangle and
/// each consumes exactly one uniform variate; the edge is present when the
/// variate is below the pair's block probability.
pub fn sample_sbm_stream(params: &SbmParams, seed: u64, stream: u64) -> Graph {
    let n = params.n();
    let mut rng = SeededStream::new(seed, stream);
    let mut adjacency = vec![0u8; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let p = params.link_prob(params.block_of(i), params.block_of(j));
            if rng.uniform() < p {
                adjacency[i * n + j] = 1;
                adjacency[j * n + i] = 1;
            }
        }
    }
    Graph::from_adjacency(n, adjacency).expect("SBM draw is a valid graph")
}

pub fn sample_sbm(params: &SbmParams, seed: u64) -> Graph {
    sample_sbm_stream(params, seed, 0)
}

/// Ordered graphs with labels and the cluster each one should fall in.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioBundle {
    pub graphs: Vec<Graph>,
    pub labels: Vec<String>,
    pub ground_truth: Vec<usize>,
    pub block_sizes: Vec<usize>,
}

impl ScenarioBundle {
    pub fn new(
        graphs: Vec<Graph>,
        labels: Vec<String>,
        ground_truth: Vec<usize>,
        block_sizes: Vec<usize>,
    ) -> Result<Self> {
        if graphs.is_empty() {
            return Err(input("bundle has no graphs"));
        }
        let n = graphs[0].n();
        if graphs.iter().any(|g| g.n() != n) {
            return Err(input("bundle graphs must share node count"));
        }
        if labels.len() != graphs.len() || ground_truth.len() != graphs.len() {
            return Err(input("labels and ground truth must match graph count"));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(input(format!("duplicate label '{l}'")));
            }
        }
        if block_sizes.iter().sum::<usize>() != n {
            return Err(input("block sizes do not cover the node set"));
        }
        Ok(Self {
            graphs,
            labels,
            ground_truth,
            block_sizes,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.graphs[0].n()
    }

    /// Number of edges joining different blocks in graph `index`.
    pub fn inter_block_edges(&self, index: usize) -> usize {
        let blocks = block_assignment(&self.block_sizes);
        self.graphs[index]
            .edges()
            .filter(|&(u, v)| blocks[u] != blocks[v])
            .count()
    }
}

/// Parameters of the one-edge-deletion experiment: two blocks of ten nodes,
/// within-block probabilities 0.75 and 0.6, between-block 0.04.
pub fn bridge_deletion_params() -> SbmParams {
    SbmParams::two_block(10, 10, 0.75, 0.6, 0.04).expect("valid parameters")
}

/// Whether removing `(u, v)` disconnects `u` from `v` inside the subgraph
/// induced by their common block.
fn is_cut_edge_within(g: &Graph, blocks: &[usize], u: usize, v: usize) -> bool {
    let block = blocks[u];
    let n = g.n();
    let mut seen = vec![false; n];
    let mut stack = vec![u];
    seen[u] = true;
    while let Some(x) = stack.pop() {
        for y in g.neighbors(x) {
            if blocks[y] != block || seen[y] || (x == u && y == v) || (x == v && y == u) {
                continue;
            }
            if y == v {
                return false;
            }
            seen[y] = true;
            stack.push(y);
        }
    }
    true
}

struct DeletionPlan {
    bridges: [(usize, usize); 2],
    within: [(usize, usize); 4],
}

fn plan_deletions(g: &Graph, blocks: &[usize]) -> Option<DeletionPlan> {
    let bridges: Vec<(usize, usize)> = g.edges().filter(|&(u, v)| blocks[u] != blocks[v]).collect();
    if bridges.len() != 2 || !g.is_connected() {
        return None;
    }
    let mut used = vec![false; g.n()];
    for &(u, v) in &bridges {
        if used[u] || used[v] {
            return None;
        }
        used[u] = true;
        used[v] = true;
    }
    let mut within = Vec::with_capacity(4);
    for (u, v) in g.edges() {
        if within.len() == 4 {
            break;
        }
        if blocks[u] != blocks[v] || used[u] || used[v] || is_cut_edge_within(g, blocks, u, v) {
            continue;
        }
        used[u] = true;
        used[v] = true;
        within.push((u, v));
    }
    if within.len() < 4 {
        return None;
    }
    Some(DeletionPlan {
        bridges: [bridges[0], bridges[1]],
        within: [within[0], within[1], within[2], within[3]],
    })
}

/// Parent graph with two bridges plus six single-edge deletions.
///
/// Draws parents from successive streams of `seed` until one is connected,
/// has exactly two inter-block edges and admits four within-block edges that
/// are not cut edges of their block. All six removed edges are pairwise
/// node-disjoint, and the within-block ones are the lexicographically first
/// that qualify. Order: `G1` parent, `G2` and `G6` minus a bridge,
/// `G3`, `G4`, `G5`, `G7` minus a within-block edge.
pub fn bridge_deletion_scenario(params: &SbmParams, seed: u64) -> Result<ScenarioBundle> {
    bridge_deletion_scenario_with_budget(params, seed, DEFAULT_RESAMPLE_BUDGET)
}

pub fn bridge_deletion_scenario_with_budget(
    params: &SbmParams,
    seed: u64,
    budget: usize,
) -> Result<ScenarioBundle> {
    if params.block_sizes().len() != 2 {
        return Err(input("bridge deletion needs exactly two blocks"));
    }
    let blocks = block_assignment(params.block_sizes());
    for attempt in 0..budget {
        let parent = sample_sbm_stream(params, seed, attempt as u64);
        let Some(plan) = plan_deletions(&parent, &blocks) else {
            continue;
        };
        let [b0, b1] = plan.bridges;
        let [w0, w1, w2, w3] = plan.within;
        let graphs = [None, Some(b0), Some(w0), Some(w1), Some(w2), Some(b1), Some(w3)]
            .into_iter()
            .map(|edit| match edit {
                None => Ok(parent.clone()),
                Some((u, v)) => parent.remove_edge(u, v),
            })
            .collect::<Result<Vec<_>>>()?;
        return ScenarioBundle::new(
            graphs,
            default_labels(7),
            vec![0, 1, 0, 0, 0, 1, 0],
            params.block_sizes().to_vec(),
        );
    }
    Err(Error::Scenario(format!(
        "no parent with two disjoint bridges found in {budget} draws"
    )))
}

/// Adds the same inter-block edges to every graph of a bundle.
pub fn add_bridges_variant(bundle: &ScenarioBundle, new_bridges: &[(usize, usize)]) -> Result<ScenarioBundle> {
    let blocks = block_assignment(&bundle.block_sizes);
    for &(u, v) in new_bridges {
        if u >= blocks.len() || v >= blocks.len() {
            return Err(input(format!("bridge ({u},{v}) out of range")));
        }
        if blocks[u] == blocks[v] {
            return Err(input(format!("({u},{v}) does not join two blocks")));
        }
    }
    let graphs = bundle
        .graphs
        .iter()
        .map(|g| {
            new_bridges
                .iter()
                .try_fold(g.clone(), |acc, &(u, v)| acc.add_edge(u, v))
        })
        .collect::<Result<Vec<_>>>()?;
    ScenarioBundle::new(
        graphs,
        bundle.labels.clone(),
        bundle.ground_truth.clone(),
        bundle.block_sizes.clone(),
    )
}

/// Twenty graphs on two blocks of ten with fixed bridges.
///
/// Within-block edges are drawn with probability `p`, one stream per graph.
/// Graphs 1-10 share the bridges `(k, 10 + k)` for `k < 5`, graphs 11-20 the
/// bridges for `k < 10`.
pub fn fixed_bridge_scenario(p: f64, seed: u64) -> Result<ScenarioBundle> {
    if !(0.0..=1.0).contains(&p) {
        return Err(input(format!("probability {p} outside [0,1]")));
    }
    const HALF: usize = 10;
    let n = 2 * HALF;
    let blocks = block_assignment(&[HALF, HALF]);
    let mut graphs = Vec::with_capacity(20);
    for index in 0..20 {
        let bridge_count = if index < 10 { 5 } else { 10 };
        let mut rng = SeededStream::new(seed, index as u64);
        let mut adjacency = vec![0u8; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let edge = if blocks[i] == blocks[j] {
                    rng.uniform() < p
                } else {
                    j == i + HALF && i < bridge_count
                };
                if edge {
                    adjacency[i * n + j] = 1;
                    adjacency[j * n + i] = 1;
                }
            }
        }
        graphs.push(Graph::from_adjacency(n, adjacency)?);
    }
    let truth = (0..20).map(|i| usize::from(i >= 10)).collect();
    ScenarioBundle::new(graphs, default_labels(20), truth, vec![HALF, HALF])
}

/// Ten draws from SBM(0.8, 0.8, 0.05) followed by ten from SBM(0.8, 0.8, 0.10),
/// all on two blocks of ten nodes.
pub fn two_sbm_scenario(seed: u64) -> Result<ScenarioBundle> {
    let first = SbmParams::two_block(10, 10, 0.8, 0.8, 0.05)?;
    let second = SbmParams::two_block(10, 10, 0.8, 0.8, 0.10)?;
    let graphs = (0..20)
        .map(|i| {
            let params = if i < 10 { &first } else { &second };
            sample_sbm_stream(params, seed, i as u64)
        })
        .collect();
    let truth = (0..20).map(|i| usize::from(i >= 10)).collect();
    ScenarioBundle::new(graphs, default_labels(20), truth, vec![10, 10])
}

/// `count` independent draws from one SBM; ground truth is all zeros.
pub fn sbm_population(params: &SbmParams, count: usize, seed: u64) -> Result<ScenarioBundle> {
    if count == 0 {
        return Err(input("population must contain at least one graph"));
    }
    let graphs = (0..count)
        .map(|i| sample_sbm_stream(params, seed, i as u64))
        .collect();
    ScenarioBundle::new(
        graphs,
        default_labels(count),
        vec![0; count],
        params.block_sizes().to_vec(),
    )
}
