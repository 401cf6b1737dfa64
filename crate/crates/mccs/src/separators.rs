//! Constraint-generation strategies: given an integral labeling and a
//! violating active component, each strategy produces one or more vertex
//! separator sets of currently inactive nodes.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{Assignment, Graph};

/// Separator selection strategy. The parametric strategies carry the number
/// of BFS layers to collect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Nearest,
    Minimal,
    Equidistant,
    KNearest(usize),
    KInterleave(usize),
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Nearest => "nearest",
            StrategyKind::Minimal => "minimal",
            StrategyKind::Equidistant => "equidistant",
            StrategyKind::KNearest(_) => "k-nearest",
            StrategyKind::KInterleave(_) => "k-interleave",
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            StrategyKind::KNearest(k) | StrategyKind::KInterleave(k) => Some(*k),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeparatorError {
    #[error(
        "component is not maximal: node {component_node} has active neighbor {active_neighbor}"
    )]
    NotMaximal {
        component_node: usize,
        active_neighbor: usize,
    },
    #[error("the two active sets are already connected through active nodes")]
    AlreadyConnected,
    #[error("active sets overlap at node {0}")]
    Overlapping(usize),
}

/// Outcome of the equidistant strategy. `Unreachable` marks a component that
/// lies in a different graph component than every other active node; the
/// empty separator it stands for forces the component off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquidistantSeparator {
    Found(Vec<usize>),
    Unreachable,
}

/// The inactive nodes immediately adjacent to the component.
pub fn nearest_separator(
    graph: &Graph,
    x: &Assignment,
    component: &[usize],
) -> Result<Vec<usize>, SeparatorError> {
    let in_component = member_mask(graph.n_nodes(), component);
    let mut separator = BTreeSet::new();
    for &i in component {
        for &nb in graph.neighbors(i) {
            if in_component[nb] {
                continue;
            }
            if x.is_active(nb) {
                return Err(SeparatorError::NotMaximal {
                    component_node: i,
                    active_neighbor: nb,
                });
            }
            separator.insert(nb);
        }
    }
    Ok(separator.into_iter().collect())
}

/// A minimum-cardinality set of inactive nodes separating `source` from
/// `sink`, found by a max-flow computation with unit capacity on inactive
/// vertices (active vertices are not removable). Of the two canonical
/// min-cuts the smaller side is returned, ties going to the source side.
/// Returns the empty set when source and sink lie in different graph
/// components.
pub fn minimal_separator(
    graph: &Graph,
    x: &Assignment,
    source: &[usize],
    sink: &[usize],
) -> Result<Vec<usize>, SeparatorError> {
    let sink_mask = member_mask(graph.n_nodes(), sink);
    if let Some(&overlap) = source.iter().find(|&&i| sink_mask[i]) {
        return Err(SeparatorError::Overlapping(overlap));
    }
    if active_path_exists(graph, x, source, &sink_mask) {
        return Err(SeparatorError::AlreadyConnected);
    }

    // Node-split network: node v becomes arc 2v -> 2v+1 with capacity 1 when
    // inactive, effectively infinite when active. Graph edges get infinite
    // capacity in both directions.
    let n = graph.n_nodes();
    let super_source = 2 * n;
    let super_sink = 2 * n + 1;
    let mut net = FlowNetwork::new(2 * n + 2);
    for v in 0..n {
        let cap = if x.is_active(v) { INF_CAPACITY } else { 1 };
        net.add_edge(2 * v, 2 * v + 1, cap);
    }
    for (u, v) in graph.edges() {
        net.add_edge(2 * u + 1, 2 * v, INF_CAPACITY);
        net.add_edge(2 * v + 1, 2 * u, INF_CAPACITY);
    }
    for &s in source {
        net.add_edge(super_source, 2 * s, INF_CAPACITY);
    }
    for &t in sink {
        net.add_edge(2 * t + 1, super_sink, INF_CAPACITY);
    }
    net.max_flow(super_source, super_sink);

    let reachable = net.residual_reachable(super_source);
    let mut source_side: Vec<usize> = (0..n)
        .filter(|&v| !x.is_active(v) && reachable[2 * v] && !reachable[2 * v + 1])
        .collect();
    let co_reachable = net.residual_co_reachable(super_sink);
    let sink_side: Vec<usize> = (0..n)
        .filter(|&v| !x.is_active(v) && co_reachable[2 * v + 1] && !co_reachable[2 * v])
        .collect();
    if sink_side.len() < source_side.len() {
        source_side = sink_side;
    }
    Ok(source_side)
}

/// The separator of inactive nodes where simultaneous BFS fronts from the
/// component and from the other active nodes meet. When the fronts meet
/// across an edge instead of at a node, the component-side endpoint is taken.
pub fn equidistant_separator(
    graph: &Graph,
    x: &Assignment,
    component: &[usize],
    others: &[usize],
) -> Result<EquidistantSeparator, SeparatorError> {
    let others_mask = member_mask(graph.n_nodes(), others);
    if let Some(&overlap) = component.iter().find(|&&i| others_mask[i]) {
        return Err(SeparatorError::Overlapping(overlap));
    }
    if active_path_exists(graph, x, component, &others_mask) {
        return Err(SeparatorError::AlreadyConnected);
    }

    let dist_a = inactive_bfs_distances(graph, x, component);
    let dist_b = inactive_bfs_distances(graph, x, others);
    let mut separator = BTreeSet::new();
    for v in 0..graph.n_nodes() {
        if x.is_active(v) {
            continue;
        }
        if dist_a[v] == usize::MAX || dist_b[v] == usize::MAX {
            continue;
        }
        if dist_a[v] == dist_b[v] {
            separator.insert(v);
        } else if dist_a[v] < dist_b[v] {
            // Component-side node: include it when the fronts meet across one
            // of its edges.
            for &nb in graph.neighbors(v) {
                if !x.is_active(nb) && dist_b[nb] < dist_a[nb] {
                    debug_assert_eq!(dist_a[v], dist_b[nb]);
                    separator.insert(v);
                    break;
                }
            }
        }
    }
    if separator.is_empty() {
        Ok(EquidistantSeparator::Unreachable)
    } else {
        Ok(EquidistantSeparator::Found(separator.into_iter().collect()))
    }
}

/// BFS layers of inactive nodes around the component: up to min(k, |C|)
/// layers, truncated strictly before the distance at which another active
/// node is reached, so every returned layer is a valid separator. In
/// interleave mode only the layers at even distance (2, 4, ...) are kept.
pub fn k_separators(
    graph: &Graph,
    x: &Assignment,
    component: &[usize],
    k: usize,
    interleave: bool,
) -> Vec<Vec<usize>> {
    assert!(k >= 1, "k_separators requires k >= 1");
    let cap = k.min(component.len());
    let mut visited = member_mask(graph.n_nodes(), component);
    let mut frontier: Vec<usize> = component.to_vec();
    let mut layers: Vec<Vec<usize>> = Vec::new();

    'collect: while layers.len() < cap {
        let mut next = Vec::new();
        for &u in &frontier {
            for &nb in graph.neighbors(u) {
                if visited[nb] {
                    continue;
                }
                if x.is_active(nb) {
                    // Another active node sits at this distance; the layer
                    // under construction is no longer a separator.
                    break 'collect;
                }
                visited[nb] = true;
                next.push(nb);
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        layers.push(next.clone());
        frontier = next;
    }

    if interleave {
        layers
            .into_iter()
            .enumerate()
            .filter_map(|(i, layer)| (i % 2 == 1).then_some(layer))
            .collect()
    } else {
        layers
    }
}

fn member_mask(n_nodes: usize, nodes: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n_nodes];
    for &i in nodes {
        mask[i] = true;
    }
    mask
}

/// True when some path of active nodes leads from `from` into `targets`.
fn active_path_exists(graph: &Graph, x: &Assignment, from: &[usize], targets: &[bool]) -> bool {
    let mut seen = vec![false; graph.n_nodes()];
    let mut stack = Vec::new();
    for &s in from {
        seen[s] = true;
        stack.push(s);
    }
    while let Some(u) = stack.pop() {
        for &nb in graph.neighbors(u) {
            if targets[nb] {
                return true;
            }
            if x.is_active(nb) && !seen[nb] {
                seen[nb] = true;
                stack.push(nb);
            }
        }
    }
    false
}

/// Multi-source BFS distances over inactive nodes. Seeds are at distance 0,
/// their inactive neighbors at 1; active nodes are never traversed and keep
/// distance usize::MAX, as do unreachable inactive nodes.
fn inactive_bfs_distances(graph: &Graph, x: &Assignment, seeds: &[usize]) -> Vec<usize> {
    let mut dist = vec![usize::MAX; graph.n_nodes()];
    let mut frontier: Vec<usize> = seeds.to_vec();
    let mut d = 0;
    let seed_mask = member_mask(graph.n_nodes(), seeds);
    while !frontier.is_empty() {
        d += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for &nb in graph.neighbors(u) {
                if seed_mask[nb] || x.is_active(nb) || dist[nb] != usize::MAX {
                    continue;
                }
                dist[nb] = d;
                next.push(nb);
            }
        }
        frontier = next;
    }
    dist
}

const INF_CAPACITY: i64 = i64::MAX / 4;

/// Minimal Edmonds-Karp network: arcs are stored in pairs, arc `a ^ 1` is the
/// reverse of arc `a`.
struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: i64) {
        let a = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.to.push(u);
        self.cap.push(0);
        self.adj[u].push(a);
        self.adj[v].push(a + 1);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut prev_arc = vec![usize::MAX; self.adj.len()];
            let mut queue = std::collections::VecDeque::from([s]);
            let mut seen = vec![false; self.adj.len()];
            seen[s] = true;
            'bfs: while let Some(u) = queue.pop_front() {
                for &a in &self.adj[u] {
                    let v = self.to[a];
                    if !seen[v] && self.cap[a] > 0 {
                        seen[v] = true;
                        prev_arc[v] = a;
                        if v == t {
                            break 'bfs;
                        }
                        queue.push_back(v);
                    }
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut v = t;
            while v != s {
                let a = prev_arc[v];
                bottleneck = bottleneck.min(self.cap[a]);
                v = self.to[a ^ 1];
            }
            let mut v = t;
            while v != s {
                let a = prev_arc[v];
                self.cap[a] -= bottleneck;
                self.cap[a ^ 1] += bottleneck;
                v = self.to[a ^ 1];
            }
            total += bottleneck;
        }
    }

    /// Nodes reachable from `s` along positive-residual arcs.
    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &a in &self.adj[u] {
                let v = self.to[a];
                if self.cap[a] > 0 && !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    /// Nodes from which `t` is reachable along positive-residual arcs.
    fn residual_co_reachable(&self, t: usize) -> Vec<bool> {
        let mut seen = vec![false; self.adj.len()];
        seen[t] = true;
        let mut stack = vec![t];
        while let Some(v) = stack.pop() {
            // Arc a^1 out of v corresponds to an incoming arc a = (to[a^1] -> v).
            for &b in &self.adj[v] {
                let u = self.to[b];
                if self.cap[b ^ 1] > 0 && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_grid, build_sparse, Connectivity};

    fn path(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
        build_sparse(n, &edges).unwrap()
    }

    #[test]
    fn nearest_on_path5() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 2, 4]);
        assert_eq!(nearest_separator(&g, &x, &[4]).unwrap(), vec![3]);
        assert_eq!(nearest_separator(&g, &x, &[2]).unwrap(), vec![1, 3]);
        assert_eq!(nearest_separator(&g, &x, &[0]).unwrap(), vec![1]);
    }

    #[test]
    fn nearest_rejects_non_maximal_component() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 1]);
        assert_eq!(
            nearest_separator(&g, &x, &[0]),
            Err(SeparatorError::NotMaximal {
                component_node: 0,
                active_neighbor: 1,
            })
        );
    }

    #[test]
    fn minimal_on_path5() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 4]);
        assert_eq!(minimal_separator(&g, &x, &[0], &[4]).unwrap(), vec![1]);
    }

    #[test]
    fn minimal_on_2x3_grid_corners() {
        let g = build_grid(&[2, 3], Connectivity::Four).unwrap();
        let x = Assignment::from_active(6, &[0, 5]);
        let sep = minimal_separator(&g, &x, &[0], &[5]).unwrap();
        assert_eq!(sep.len(), 2);
        // Removing the separator must disconnect the corners.
        let mut blocked = [false; 6];
        for &s in &sep {
            blocked[s] = true;
        }
        let mut seen = [false; 6];
        seen[0] = true;
        let mut stack = vec![0];
        while let Some(u) = stack.pop() {
            for &nb in g.neighbors(u) {
                if !blocked[nb] && !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        assert!(!seen[5]);
    }

    #[test]
    fn minimal_rejects_active_bridge() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 1, 2]);
        assert_eq!(
            minimal_separator(&g, &x, &[0], &[2]),
            Err(SeparatorError::AlreadyConnected)
        );
    }

    #[test]
    fn minimal_returns_empty_for_disconnected_graph_components() {
        let g = build_sparse(4, &[(0, 1), (2, 3)]).unwrap();
        let x = Assignment::from_active(4, &[0, 3]);
        assert_eq!(
            minimal_separator(&g, &x, &[0], &[3]).unwrap(),
            Vec::<usize>::new()
        );
    }

    #[test]
    fn equidistant_midpoint_on_path5() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 4]);
        assert_eq!(
            equidistant_separator(&g, &x, &[0], &[4]).unwrap(),
            EquidistantSeparator::Found(vec![2])
        );
    }

    #[test]
    fn equidistant_edge_meeting_takes_component_side() {
        let g = path(4);
        let x = Assignment::from_active(4, &[0, 3]);
        assert_eq!(
            equidistant_separator(&g, &x, &[0], &[3]).unwrap(),
            EquidistantSeparator::Found(vec![1])
        );
    }

    #[test]
    fn equidistant_rejects_adjacent_active_sets() {
        let g = path(4);
        let x = Assignment::from_active(4, &[0, 1]);
        assert_eq!(
            equidistant_separator(&g, &x, &[0], &[1]),
            Err(SeparatorError::AlreadyConnected)
        );
    }

    #[test]
    fn equidistant_flags_unreachable_components() {
        let g = build_sparse(4, &[(0, 1), (2, 3)]).unwrap();
        let x = Assignment::from_active(4, &[0, 3]);
        assert_eq!(
            equidistant_separator(&g, &x, &[0], &[3]).unwrap(),
            EquidistantSeparator::Unreachable
        );
    }

    #[test]
    fn k_separators_collects_layers() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 3, 4]);
        assert_eq!(
            k_separators(&g, &x, &[3, 4], 2, false),
            vec![vec![2], vec![1]]
        );
    }

    #[test]
    fn k_separators_caps_at_component_size() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 2, 4]);
        assert_eq!(k_separators(&g, &x, &[4], 5, false), vec![vec![3]]);
    }

    #[test]
    fn k_separators_interleave_keeps_even_distances() {
        let g = path(5);
        let x = Assignment::from_active(5, &[0, 3, 4]);
        assert_eq!(k_separators(&g, &x, &[3, 4], 2, true), vec![vec![1]]);
    }

    #[test]
    fn k_separators_truncates_at_foreign_active_node() {
        // Active node 1 sits at distance 2 from component {3,4}, so only the
        // distance-1 layer is a separator even though k allows more.
        let g = path(5);
        let x = Assignment::from_active(5, &[1, 3, 4]);
        assert_eq!(k_separators(&g, &x, &[3, 4], 3, false), vec![vec![2]]);
    }

    #[test]
    fn k_separators_interleave_can_come_up_empty() {
        let g = path(5);
        let x = Assignment::from_active(5, &[1, 3, 4]);
        assert!(k_separators(&g, &x, &[3, 4], 3, true).is_empty());
    }
}
