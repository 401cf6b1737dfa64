//! Solvers for the minimum cost connected subgraph problem on node-weighted
//! graphs: an exact best-first branch-and-cut engine with lazy vertex
//! separator generation and objective-dependent leaf cuts, a geodesic
//! shortest-path-tree heuristic, and a maximum-component baseline, together
//! with the metrics to compare them.

pub mod constraints;
pub mod eval;
pub mod exact;
pub mod geodesic;
pub mod graph;
pub mod separators;
pub mod weights;

pub use constraints::{Constraint, ConstraintStore, Propagation, SeparatorMode};
pub use eval::{maxcomp, objective, objectives_match, score, Scores};
pub use exact::{
    solve_exact, PartialAssignment, SolveResult, SolveStatus, SolverConfig, SolverStats,
};
pub use geodesic::{build_geodesic_tree, solve_geodesic, GeodesicTree};
pub use graph::{
    bfs_layers, build_grid, build_sparse, connected_components, Assignment, Connectivity, Graph,
};
pub use separators::StrategyKind;
pub use weights::{prob_to_weight, select_root, NodeWeights, DEFAULT_PROB_CLAMP};
