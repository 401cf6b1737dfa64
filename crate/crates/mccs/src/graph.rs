//! Immutable node-weighted graph model: grid and sparse builders plus the
//! traversal primitives (connected components, BFS layers) shared by the
//! solvers.

use std::collections::BTreeSet;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("grid extent along axis {axis} must be at least 1")]
    ZeroExtent { axis: usize },
    #[error("unsupported grid dimensionality {0} (expected 1, 2 or 3)")]
    UnsupportedDimensionality(usize),
    #[error("connectivity {connectivity:?} does not match a {dim}-dimensional grid")]
    ConnectivityMismatch {
        connectivity: Connectivity,
        dim: usize,
    },
    #[error("node index {node} out of range for graph with {n_nodes} nodes")]
    NodeOutOfRange { node: usize, n_nodes: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
}

/// Grid neighborhood kind: 4-neighborhood for 2D grids, 6-neighborhood for 3D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Six,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMeta {
    /// Extent per axis, row-major order (last axis varies fastest).
    pub extents: Vec<usize>,
    pub connectivity: Connectivity,
}

/// Undirected simple graph. Immutable after construction; adjacency lists are
/// sorted ascending and symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_nodes: usize,
    adjacency: Vec<Vec<usize>>,
    grid_meta: Option<GridMeta>,
}

impl Graph {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn grid_meta(&self) -> Option<&GridMeta> {
        self.grid_meta.as_ref()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as (i, j) pairs with i < j, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| i < j).map(move |&j| (i, j)))
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }
}

/// Builds an axis-aligned grid graph with row-major node indexing (last axis
/// fastest). 2D grids use the 4-neighborhood, 3D grids the 6-neighborhood;
/// 1D grids degenerate to a path under either kind.
pub fn build_grid(extents: &[usize], connectivity: Connectivity) -> Result<Graph, GraphError> {
    let dim = extents.len();
    if dim == 0 || dim > 3 {
        return Err(GraphError::UnsupportedDimensionality(dim));
    }
    if let Some(axis) = extents.iter().position(|&e| e == 0) {
        return Err(GraphError::ZeroExtent { axis });
    }
    match (dim, connectivity) {
        (2, Connectivity::Six) | (3, Connectivity::Four) => {
            return Err(GraphError::ConnectivityMismatch { connectivity, dim });
        }
        _ => {}
    }

    let n_nodes: usize = extents.iter().product();
    // Row-major strides: stride of the last axis is 1.
    let mut strides = vec![1usize; dim];
    for axis in (0..dim.saturating_sub(1)).rev() {
        strides[axis] = strides[axis + 1] * extents[axis + 1];
    }

    let mut adjacency = vec![Vec::new(); n_nodes];
    let mut coord = vec![0usize; dim];
    for node in 0..n_nodes {
        for axis in 0..dim {
            if coord[axis] + 1 < extents[axis] {
                let other = node + strides[axis];
                adjacency[node].push(other);
                adjacency[other].push(node);
            }
        }
        // Advance the coordinate, last axis fastest.
        for axis in (0..dim).rev() {
            coord[axis] += 1;
            if coord[axis] < extents[axis] {
                break;
            }
            coord[axis] = 0;
        }
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }

    Ok(Graph {
        n_nodes,
        adjacency,
        grid_meta: Some(GridMeta {
            extents: extents.to_vec(),
            connectivity,
        }),
    })
}

/// Builds a graph from an explicit edge list. Duplicate and reversed pairs are
/// deduplicated; self-loops and out-of-range endpoints are rejected.
pub fn build_sparse(n_nodes: usize, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
    let mut unique = BTreeSet::new();
    for &(i, j) in edges {
        if i >= n_nodes {
            return Err(GraphError::NodeOutOfRange { node: i, n_nodes });
        }
        if j >= n_nodes {
            return Err(GraphError::NodeOutOfRange { node: j, n_nodes });
        }
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        unique.insert((i.min(j), i.max(j)));
    }
    let mut adjacency = vec![Vec::new(); n_nodes];
    for (i, j) in unique {
        adjacency[i].push(j);
        adjacency[j].push(i);
    }
    for adj in &mut adjacency {
        adj.sort_unstable();
    }
    Ok(Graph {
        n_nodes,
        adjacency,
        grid_meta: None,
    })
}

/// Binary node labeling; node `i` is active when `labels[i]` is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    labels: Vec<bool>,
}

impl Assignment {
    pub fn all_inactive(n_nodes: usize) -> Self {
        Self {
            labels: vec![false; n_nodes],
        }
    }

    pub fn from_labels(labels: Vec<bool>) -> Self {
        Self { labels }
    }

    pub fn from_active(n_nodes: usize, active: &[usize]) -> Self {
        let mut labels = vec![false; n_nodes];
        for &i in active {
            labels[i] = true;
        }
        Self { labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_active(&self, node: usize) -> bool {
        self.labels[node]
    }

    pub fn set(&mut self, node: usize, active: bool) {
        self.labels[node] = active;
    }

    pub fn active_count(&self) -> usize {
        self.labels.iter().filter(|&&a| a).count()
    }

    pub fn active_nodes(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i]).collect()
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }
}

/// Partitions the active set into maximal connected components. Each component
/// is sorted ascending; components are ordered by their smallest member.
pub fn connected_components(graph: &Graph, active: &Assignment) -> Vec<Vec<usize>> {
    assert_eq!(active.len(), graph.n_nodes());
    let mut seen = vec![false; graph.n_nodes()];
    let mut components = Vec::new();
    for start in 0..graph.n_nodes() {
        if !active.is_active(start) || seen[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut queue = std::collections::VecDeque::from([start]);
        seen[start] = true;
        while let Some(node) = queue.pop_front() {
            component.push(node);
            for &next in graph.neighbors(node) {
                if active.is_active(next) && !seen[next] {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

/// BFS layers from a seed set. Layer `t` holds the non-blocked nodes at BFS
/// distance `t + 1` from the seeds; blocked nodes are neither reported nor
/// traversed. Stops at `max_layers` or when a layer comes up empty.
pub fn bfs_layers(
    graph: &Graph,
    seeds: &[usize],
    blocked: impl Fn(usize) -> bool,
    max_layers: usize,
) -> Vec<Vec<usize>> {
    assert!(!seeds.is_empty(), "bfs_layers requires a nonempty seed set");
    assert!(
        seeds.iter().all(|&s| !blocked(s)),
        "bfs_layers seeds must not be blocked"
    );
    let mut visited = vec![false; graph.n_nodes()];
    for &s in seeds {
        visited[s] = true;
    }
    let mut frontier: Vec<usize> = seeds.to_vec();
    let mut layers = Vec::new();
    while layers.len() < max_layers {
        let mut next = Vec::new();
        for &node in &frontier {
            for &nb in graph.neighbors(node) {
                if !visited[nb] && !blocked(nb) {
                    visited[nb] = true;
                    next.push(nb);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        layers.push(next.clone());
        frontier = next;
    }
    layers
}
