//! Exact minimum cost connected subgraph optimization: best-first
//! branch-and-cut with lazy separator constraint generation.
//!
//! The relaxation ignores connectivity entirely: completing a partial
//! assignment by activating every free negative-weight node attains the
//! objective lower bound for its subtree. Connectivity is recovered lazily by
//! separating disconnected integral candidates and branching on the resulting
//! inequalities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::constraints::{
    component_leaf_cut, constraints_from_separator, propagate_indexed, singleton_leaf_cuts,
    Constraint, ConstraintIndex, ConstraintStore, Propagation, SeparatorMode,
};
use crate::graph::{connected_components, Assignment, Graph};
use crate::separators::{
    equidistant_separator, k_separators, minimal_separator, nearest_separator,
    EquidistantSeparator, StrategyKind,
};
use crate::weights::NodeWeights;

/// Ternary node labeling used as branch-and-bound search state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialAssignment {
    values: Vec<Option<bool>>,
}

/// Returned by [`PartialAssignment::fix`] when a node is already fixed to the
/// opposite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contradiction {
    pub node: usize,
}

impl PartialAssignment {
    pub fn all_free(n_nodes: usize) -> Self {
        Self {
            values: vec![None; n_nodes],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, node: usize) -> Option<bool> {
        self.values[node]
    }

    pub fn is_free(&self, node: usize) -> bool {
        self.values[node].is_none()
    }

    pub fn free_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Fixes a node. Ok(true) when newly fixed, Ok(false) when already fixed
    /// to the same value.
    pub fn fix(&mut self, node: usize, value: bool) -> Result<bool, Contradiction> {
        match self.values[node] {
            None => {
                self.values[node] = Some(value);
                Ok(true)
            }
            Some(existing) if existing == value => Ok(false),
            Some(_) => Err(Contradiction { node }),
        }
    }
}

/// Configuration for [`solve_exact`].
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub strategy: StrategyKind,
    /// Some(r) enforces connectivity toward r and fixes it active; None uses
    /// the pairwise (unrooted) formulation.
    pub root: Option<usize>,
    /// Relative optimality gap at which subtrees are pruned.
    pub rel_gap: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// Install leaf cuts for single unfavourable nodes before the search.
    pub use_singleton_leaf_cuts: bool,
    /// Also install leaf cuts for maximal connected groups of unfavourable
    /// nodes before the search.
    pub use_component_leaf_cuts: bool,
}

pub const DEFAULT_REL_GAP: f64 = 1e-4;

impl SolverConfig {
    pub fn rooted(root: usize, strategy: StrategyKind) -> Self {
        Self {
            strategy,
            root: Some(root),
            ..Self::default()
        }
    }

    pub fn unrooted(strategy: StrategyKind) -> Self {
        Self {
            strategy,
            root: None,
            ..Self::default()
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::Nearest,
            root: None,
            rel_gap: DEFAULT_REL_GAP,
            time_limit: None,
            node_limit: None,
            use_singleton_leaf_cuts: true,
            use_component_leaf_cuts: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    GapReached,
    TimeLimit,
    NodeLimit,
    Infeasible,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::GapReached => "GapReached",
            SolveStatus::TimeLimit => "TimeLimit",
            SolveStatus::NodeLimit => "NodeLimit",
            SolveStatus::Infeasible => "Infeasible",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub search_nodes_expanded: u64,
    /// Constraints added by separation during the search. Leaf cuts installed
    /// upfront are not counted here.
    pub constraints_generated: u64,
    pub incumbent_updates: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub assignment: Assignment,
    pub objective: f64,
    pub status: SolveStatus,
    pub stats: SolverStats,
}

/// Completes a partial assignment by its objective-only relaxation: fixed
/// nodes keep their value, free nodes become active exactly when their weight
/// is negative.
pub fn greedy_completion(partial: &PartialAssignment, weights: &NodeWeights) -> Assignment {
    let labels = (0..partial.len())
        .map(|i| match partial.get(i) {
            Some(v) => v,
            None => weights.get(i) < 0.0,
        })
        .collect();
    Assignment::from_labels(labels)
}

/// Objective of the greedy completion: a lower bound on every assignment that
/// extends `partial`, connectivity included or not.
pub fn relaxation_bound(partial: &PartialAssignment, weights: &NodeWeights) -> f64 {
    let mut bound = 0.0;
    for i in 0..partial.len() {
        let w = weights.get(i);
        match partial.get(i) {
            Some(true) => bound += w,
            Some(false) => {}
            None => bound += w.min(0.0),
        }
    }
    bound
}

fn assignment_objective(x: &Assignment, weights: &NodeWeights) -> f64 {
    let mut total = 0.0;
    for i in 0..x.len() {
        if x.is_active(i) {
            total += weights.get(i);
        }
    }
    total
}

/// Splits the search space along a violated constraint. Children partition
/// the subspace of `partial` that can still satisfy the constraint, and every
/// child fixes at least one additional variable. An empty list means no free
/// variable is left to branch on and the node is infeasible.
pub fn branch_on_constraint(
    partial: &PartialAssignment,
    violated: &Constraint,
) -> Vec<PartialAssignment> {
    let mut children = Vec::new();
    match violated {
        Constraint::RootedSeparator { target, separator } => {
            push_separator_children(partial, &mut children, &[*target], separator);
        }
        Constraint::PairwiseSeparator {
            target,
            witness,
            separator,
        } => {
            push_separator_children(partial, &mut children, &[*target, *witness], separator);
        }
        Constraint::LeafCut { boundary, .. } => {
            if let Some(&pivot) = boundary.iter().find(|&&j| partial.is_free(j)) {
                for value in [false, true] {
                    let mut child = partial.clone();
                    child.fix(pivot, value).expect("pivot is free");
                    children.push(child);
                }
            }
        }
    }
    children
}

/// Disjunction for `sum of endpoint vars - (len-1) <= sum_S x_k`: one child
/// per endpoint that can still be switched off, then one child per free
/// separator node k activating it (with every earlier free separator node
/// switched off and all endpoints on).
fn push_separator_children(
    partial: &PartialAssignment,
    children: &mut Vec<PartialAssignment>,
    endpoints: &[usize],
    separator: &[usize],
) {
    for &e in endpoints {
        if partial.is_free(e) {
            let mut child = partial.clone();
            child.fix(e, false).expect("endpoint is free");
            children.push(child);
        }
    }
    let free_separator: Vec<usize> = separator
        .iter()
        .copied()
        .filter(|&k| partial.is_free(k))
        .collect();
    for (idx, &k) in free_separator.iter().enumerate() {
        let mut child = partial.clone();
        for &e in endpoints {
            if child.fix(e, true).is_err() {
                // Endpoint fixed off in the parent: the constraint is already
                // satisfied there, no child needed.
                return;
            }
        }
        for &earlier in &free_separator[..idx] {
            child.fix(earlier, false).expect("separator node was free");
        }
        child.fix(k, true).expect("separator node is free");
        children.push(child);
    }
}

/// Identifies the disconnected active components of `x` and adds separator
/// constraints for each of them according to the configured strategy.
/// Returns the number of constraints that were new to the store; the result
/// is zero exactly when `x` is feasible.
pub fn separate(
    graph: &Graph,
    x: &Assignment,
    config: &SolverConfig,
    store: &mut ConstraintStore,
) -> usize {
    let components = connected_components(graph, x);
    if components.len() <= 1 {
        return 0;
    }
    let mut added = 0;
    match config.root {
        Some(root) => {
            let root_pos = components
                .iter()
                .position(|c| c.binary_search(&root).is_ok())
                .expect("root must be active in rooted mode");
            let root_component = components[root_pos].clone();
            for (idx, component) in components.iter().enumerate() {
                if idx == root_pos {
                    continue;
                }
                added += separate_component(
                    graph,
                    x,
                    config.strategy,
                    store,
                    component,
                    &root_component,
                    SeparatorMode::Rooted { root },
                );
            }
        }
        None => {
            let first = components[0].clone();
            let witness = first[0];
            for component in &components[1..] {
                added += separate_component(
                    graph,
                    x,
                    config.strategy,
                    store,
                    component,
                    &first,
                    SeparatorMode::Pairwise { witness },
                );
            }
        }
    }
    added
}

fn separate_component(
    graph: &Graph,
    x: &Assignment,
    strategy: StrategyKind,
    store: &mut ConstraintStore,
    component: &[usize],
    anchor_component: &[usize],
    mode: SeparatorMode,
) -> usize {
    let separators: Vec<Vec<usize>> =
        match strategy {
            StrategyKind::Nearest => vec![nearest_separator(graph, x, component)
                .expect("component is maximal by construction")],
            StrategyKind::Minimal => vec![minimal_separator(graph, x, component, anchor_component)
                .expect("components are disconnected by construction")],
            StrategyKind::Equidistant => {
                let others: Vec<usize> = x
                    .active_nodes()
                    .into_iter()
                    .filter(|i| component.binary_search(i).is_err())
                    .collect();
                match equidistant_separator(graph, x, component, &others)
                    .expect("components are disconnected by construction")
                {
                    EquidistantSeparator::Found(s) => vec![s],
                    EquidistantSeparator::Unreachable => vec![Vec::new()],
                }
            }
            StrategyKind::KNearest(k) => k_separators(graph, x, component, k, false),
            StrategyKind::KInterleave(k) => k_separators(graph, x, component, k, true),
        };

    // A strategy may come up empty (interleave with no even layer in range,
    // or a fully active island); fall back to the nearest separator so that
    // every disconnected component yields at least one violated constraint.
    let separators = if separators.is_empty() {
        vec![nearest_separator(graph, x, component).expect("component is maximal by construction")]
    } else {
        separators
    };

    let mut added = 0;
    for separator in separators {
        let constraints = constraints_from_separator(component, &separator, mode)
            .expect("component and separator are disjoint by construction");
        added += store.insert_all(constraints);
    }
    added
}

struct SearchNode {
    partial: PartialAssignment,
    bound: f64,
    id: u64,
}

impl PartialEq for SearchNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}

impl Eq for SearchNode {}

impl Ord for SearchNode {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so the lowest bound pops first,
        // ties resolved FIFO by creation index.
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimizes the weight sum over connected active sets (containing the root
/// and with the root forced active, in rooted mode) by best-first
/// branch-and-cut. Deterministic for a fixed configuration.
pub fn solve_exact(graph: &Graph, weights: &NodeWeights, config: &SolverConfig) -> SolveResult {
    assert!(graph.n_nodes() > 0, "solve_exact requires a nonempty graph");
    assert_eq!(weights.len(), graph.n_nodes());
    assert!(config.rel_gap >= 0.0, "relative gap must be nonnegative");
    if let Some(root) = config.root {
        assert!(root < graph.n_nodes(), "root {root} out of range");
    }

    let start = Instant::now();
    let mut stats = SolverStats::default();
    let mut store = ConstraintStore::new();
    install_leaf_cuts(graph, weights, config, &mut store);
    let mut index = ConstraintIndex::new(graph.n_nodes());
    index.extend_from(&store);

    let mut root_partial = PartialAssignment::all_free(graph.n_nodes());
    if let Some(root) = config.root {
        root_partial.fix(root, true).expect("fresh assignment");
    }
    let root_bound = relaxation_bound(&root_partial, weights);
    let mut queue = BinaryHeap::new();
    queue.push(SearchNode {
        partial: root_partial,
        bound: root_bound,
        id: 0,
    });
    let mut next_id: u64 = 1;

    let mut incumbent: Option<(Assignment, f64)> = None;
    let mut gap_pruned = false;
    let mut status = loop {
        let Some(mut node) = queue.pop() else {
            break if incumbent.is_none() {
                SolveStatus::Infeasible
            } else if gap_pruned {
                SolveStatus::GapReached
            } else {
                SolveStatus::Optimal
            };
        };
        if let Some(limit) = config.time_limit {
            if start.elapsed() >= limit {
                break SolveStatus::TimeLimit;
            }
        }
        if let Some(limit) = config.node_limit {
            if stats.search_nodes_expanded >= limit {
                break SolveStatus::NodeLimit;
            }
        }
        stats.search_nodes_expanded += 1;

        match propagate_indexed(&store, &index, &node.partial) {
            Propagation::Conflict(_) => continue,
            Propagation::Fixings(fixings) => {
                for (n, v) in fixings {
                    node.partial.fix(n, v).expect("propagation is consistent");
                }
            }
            Propagation::Quiescent => {}
        }

        let bound = relaxation_bound(&node.partial, weights);
        if prune_by_bound(bound, &incumbent, config.rel_gap, &mut gap_pruned) {
            continue;
        }

        let completion = greedy_completion(&node.partial, weights);
        let branch_constraint = match store.first_violated(&completion) {
            Some(c) => c.clone(),
            None => {
                if connected_components(graph, &completion).len() <= 1 {
                    // Feasible: the completion's objective equals the bound.
                    let objective = assignment_objective(&completion, weights);
                    let improves = incumbent.as_ref().is_none_or(|(_, best)| objective < *best);
                    if improves {
                        incumbent = Some((completion, objective));
                        stats.incumbent_updates += 1;
                    }
                    continue;
                }
                let first_new = store.len();
                let added = separate(graph, &completion, config, &mut store);
                debug_assert!(added > 0, "separation must cut a disconnected candidate");
                stats.constraints_generated += added as u64;
                index.extend_from(&store);
                store.get(first_new).clone()
            }
        };

        for child in branch_on_constraint(&node.partial, &branch_constraint) {
            let child_bound = relaxation_bound(&child, weights);
            if prune_by_bound(child_bound, &incumbent, config.rel_gap, &mut gap_pruned) {
                continue;
            }
            queue.push(SearchNode {
                partial: child,
                bound: child_bound,
                id: next_id,
            });
            next_id += 1;
        }
    };

    let (assignment, objective) = match incumbent {
        Some((assignment, objective)) => (assignment, objective),
        None => match status {
            // A limit hit before any incumbent: fall back to the trivial
            // feasible point.
            SolveStatus::TimeLimit | SolveStatus::NodeLimit => {
                let mut x = Assignment::all_inactive(graph.n_nodes());
                if let Some(root) = config.root {
                    x.set(root, true);
                }
                let objective = assignment_objective(&x, weights);
                (x, objective)
            }
            _ => {
                status = SolveStatus::Infeasible;
                (Assignment::all_inactive(graph.n_nodes()), 0.0)
            }
        },
    };
    stats.wall_time = start.elapsed();
    SolveResult {
        assignment,
        objective,
        status,
        stats,
    }
}

fn prune_by_bound(
    bound: f64,
    incumbent: &Option<(Assignment, f64)>,
    rel_gap: f64,
    gap_pruned: &mut bool,
) -> bool {
    let Some((_, best)) = incumbent else {
        return false;
    };
    let cutoff = best - rel_gap * best.abs();
    if bound >= cutoff {
        if bound < *best {
            *gap_pruned = true;
        }
        return true;
    }
    false
}

fn install_leaf_cuts(
    graph: &Graph,
    weights: &NodeWeights,
    config: &SolverConfig,
    store: &mut ConstraintStore,
) {
    if config.use_singleton_leaf_cuts {
        store.insert_all(singleton_leaf_cuts(graph, weights, config.root));
    }
    if config.use_component_leaf_cuts {
        let positive =
            Assignment::from_labels((0..graph.n_nodes()).map(|i| weights.get(i) > 0.0).collect());
        for component in connected_components(graph, &positive) {
            let cuts = component_leaf_cut(graph, weights, &component)
                .expect("positive components are connected all-positive sets");
            // The root may legitimately stay a leaf; never cut it.
            store.insert_all(
                cuts.into_iter()
                    .filter(|c| !matches!(c, Constraint::LeafCut { target, .. } if Some(*target) == config.root)),
            );
        }
    }
}
