//! Geodesic tree heuristic: build the shortest-path tree under the
//! unary-derived edge weights f(i,j) = (max(w_i,0) + max(w_j,0)) / 2, then
//! solve the tree-constrained problem exactly by dynamic programming.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::exact::{SolveResult, SolveStatus, SolverStats};
use crate::graph::{Assignment, Graph};
use crate::weights::NodeWeights;

/// Edge weight of the geodesic metric: half the positive parts of the
/// endpoint weights. Zero across confidently-foreground regions.
pub fn edge_weight(w_i: f64, w_j: f64) -> f64 {
    0.5 * (w_i.max(0.0) + w_j.max(0.0))
}

/// Shortest-path tree rooted at `root`. Nodes outside the root's graph
/// component are parentless with infinite distance.
#[derive(Debug, Clone)]
pub struct GeodesicTree {
    root: usize,
    parent: Vec<Option<usize>>,
    dist: Vec<f64>,
    hops: Vec<usize>,
}

impl GeodesicTree {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn n_nodes(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn dist(&self, node: usize) -> f64 {
        self.dist[node]
    }

    pub fn is_reachable(&self, node: usize) -> bool {
        node == self.root || self.parent[node].is_some()
    }

    /// Hop count of the tree path from the root; meaningful only for
    /// reachable nodes.
    pub fn depth(&self, node: usize) -> usize {
        self.hops[node]
    }
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    dist: f64,
    hops: usize,
    node: usize,
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed for a min-heap: smaller distance first, then fewer hops,
        // then smaller node index.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.hops.cmp(&self.hops))
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra under the geodesic metric with deterministic tie-breaking:
/// smaller distance, then fewer hops, then smaller parent index.
pub fn build_geodesic_tree(graph: &Graph, weights: &NodeWeights, root: usize) -> GeodesicTree {
    assert!(root < graph.n_nodes(), "root out of range");
    assert_eq!(weights.len(), graph.n_nodes());

    let n = graph.n_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut settled = vec![false; n];

    dist[root] = 0.0;
    hops[root] = 0;
    let mut heap = BinaryHeap::new();
    heap.push(QueueEntry {
        dist: 0.0,
        hops: 0,
        node: root,
    });

    while let Some(entry) = heap.pop() {
        let u = entry.node;
        if settled[u] || entry.dist > dist[u] || (entry.dist == dist[u] && entry.hops > hops[u]) {
            continue;
        }
        settled[u] = true;
        for &v in graph.neighbors(u) {
            if settled[v] {
                continue;
            }
            let cand_dist = dist[u] + edge_weight(weights.get(u), weights.get(v));
            let cand_hops = hops[u] + 1;
            let better = cand_dist < dist[v]
                || (cand_dist == dist[v]
                    && (cand_hops < hops[v]
                        || (cand_hops == hops[v] && parent[v].is_none_or(|p| u < p))));
            if better {
                dist[v] = cand_dist;
                hops[v] = cand_hops;
                parent[v] = Some(u);
                heap.push(QueueEntry {
                    dist: cand_dist,
                    hops: cand_hops,
                    node: v,
                });
            }
        }
    }

    GeodesicTree {
        root,
        parent,
        dist,
        hops,
    }
}

/// Exact minimizer of the weight sum over ancestor-closed subsets of the
/// tree that contain the root, by leaf-to-root dynamic programming. A node's
/// gain is its weight plus every helpful descendant subtree; nodes join the
/// solution when their parent does and their gain is strictly negative.
pub fn solve_geodesic(tree: &GeodesicTree, weights: &NodeWeights) -> SolveResult {
    assert_eq!(weights.len(), tree.n_nodes());
    let start = Instant::now();
    let n = tree.n_nodes();

    // Children before parents: order by tree depth, descending.
    let mut by_depth: Vec<usize> = (0..n).filter(|&i| tree.is_reachable(i)).collect();
    by_depth.sort_by(|&a, &b| tree.depth(b).cmp(&tree.depth(a)).then(a.cmp(&b)));

    let mut gain: Vec<f64> = (0..n).map(|i| weights.get(i)).collect();
    for &node in &by_depth {
        if let Some(p) = tree.parent(node) {
            if gain[node] < 0.0 {
                gain[p] += gain[node];
            }
        }
    }

    let mut assignment = Assignment::all_inactive(n);
    assignment.set(tree.root(), true);
    // Root first: parents precede children in reverse depth order.
    for &node in by_depth.iter().rev() {
        if node == tree.root() {
            continue;
        }
        let p = tree.parent(node).expect("reachable non-root has a parent");
        if assignment.is_active(p) && gain[node] < 0.0 {
            assignment.set(node, true);
        }
    }

    let mut objective = 0.0;
    for i in 0..n {
        if assignment.is_active(i) {
            objective += weights.get(i);
        }
    }

    SolveResult {
        assignment,
        objective,
        status: SolveStatus::Optimal,
        stats: SolverStats {
            wall_time: start.elapsed(),
            ..SolverStats::default()
        },
    }
}
