//! Shared test oracles: exhaustive enumeration over bitmask-encoded node
//! subsets, independent of every solver code path they check.

#![allow(dead_code)]

use mccs::graph::{build_grid, Assignment, Connectivity, Graph};
use mccs::weights::NodeWeights;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Per-node neighbor bitmasks; requires at most 64 nodes.
pub fn adjacency_masks(graph: &Graph) -> Vec<u64> {
    assert!(graph.n_nodes() <= 64);
    (0..graph.n_nodes())
        .map(|i| {
            graph
                .neighbors(i)
                .iter()
                .fold(0u64, |acc, &j| acc | (1 << j))
        })
        .collect()
}

/// Whether the nodes of `mask` induce a connected subgraph. The empty set and
/// singletons count as connected.
pub fn mask_is_connected(adj: &[u64], mask: u64) -> bool {
    if mask == 0 {
        return true;
    }
    let start = mask.trailing_zeros() as usize;
    let mut reach = 1u64 << start;
    let mut frontier = reach;
    while frontier != 0 {
        let mut grown = 0u64;
        let mut bits = frontier;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            grown |= adj[i];
        }
        frontier = grown & mask & !reach;
        reach |= frontier;
    }
    reach == mask
}

pub fn mask_objective(mask: u64, weights: &NodeWeights) -> f64 {
    let mut total = 0.0;
    for i in 0..weights.len() {
        if mask & (1 << i) != 0 {
            total += weights.get(i);
        }
    }
    total
}

/// Minimum objective over all connected subsets that contain `root`
/// (including the singleton {root}).
pub fn brute_force_rooted_optimum(graph: &Graph, weights: &NodeWeights, root: usize) -> f64 {
    let adj = adjacency_masks(graph);
    let n = graph.n_nodes();
    let root_bit = 1u64 << root;
    let mut best = f64::INFINITY;
    for mask in 0..(1u64 << n) {
        if mask & root_bit == 0 || !mask_is_connected(&adj, mask) {
            continue;
        }
        let obj = mask_objective(mask, weights);
        if obj < best {
            best = obj;
        }
    }
    best
}

/// Minimum objective over all connected subsets, the empty one included.
pub fn brute_force_unrooted_optimum(graph: &Graph, weights: &NodeWeights) -> f64 {
    let adj = adjacency_masks(graph);
    let n = graph.n_nodes();
    let mut best = 0.0f64;
    for mask in 1..(1u64 << n) {
        if !mask_is_connected(&adj, mask) {
            continue;
        }
        let obj = mask_objective(mask, weights);
        if obj < best {
            best = obj;
        }
    }
    best
}

/// Uniform(-1, 1) weights from a seeded generator.
pub fn random_weights(seed: u64, n_nodes: usize) -> NodeWeights {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    NodeWeights::new((0..n_nodes).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

pub fn grid_instance(rows: usize, cols: usize, seed: u64) -> (Graph, NodeWeights) {
    let graph = build_grid(&[rows, cols], Connectivity::Four).unwrap();
    let weights = random_weights(seed, graph.n_nodes());
    (graph, weights)
}

/// Whether `target` stays reachable from `from` after deleting `removed`.
pub fn reachable_after_removal(
    graph: &Graph,
    from: &[usize],
    targets: &[usize],
    removed: &[usize],
) -> bool {
    let mut blocked = vec![false; graph.n_nodes()];
    for &r in removed {
        blocked[r] = true;
    }
    let target_mask = {
        let mut mask = vec![false; graph.n_nodes()];
        for &t in targets {
            mask[t] = true;
        }
        mask
    };
    let mut seen = vec![false; graph.n_nodes()];
    let mut stack = Vec::new();
    for &s in from {
        if !blocked[s] {
            seen[s] = true;
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        if target_mask[u] {
            return true;
        }
        for &nb in graph.neighbors(u) {
            if !blocked[nb] && !seen[nb] {
                seen[nb] = true;
                stack.push(nb);
            }
        }
    }
    false
}

/// All assignments `x` that are feasible for the rooted problem: active set
/// connected and containing the root. Usable only on small graphs.
pub fn enumerate_feasible_rooted(graph: &Graph, root: usize) -> Vec<Assignment> {
    let adj = adjacency_masks(graph);
    let n = graph.n_nodes();
    let root_bit = 1u64 << root;
    let mut feasible = Vec::new();
    for mask in 0..(1u64 << n) {
        if mask & root_bit == 0 || !mask_is_connected(&adj, mask) {
            continue;
        }
        let labels = (0..n).map(|i| mask & (1 << i) != 0).collect();
        feasible.push(Assignment::from_labels(labels));
    }
    feasible
}
