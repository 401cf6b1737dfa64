//! Linear inequalities over node variables: vertex-separator constraints and
//! objective-dependent leaf cuts, plus the store that pools them during lazy
//! generation and a unit-propagation routine over the pool.

use std::collections::HashSet;

use thiserror::Error;

use crate::exact::PartialAssignment;
use crate::graph::{Assignment, Graph};
use crate::weights::NodeWeights;

#[derive(Debug, Error, PartialEq)]
pub enum ConstraintError {
    #[error("component and separator share node {0}")]
    ComponentSeparatorOverlap(usize),
    #[error("root {0} lies inside the component being separated")]
    RootInComponent(usize),
    #[error("witness {0} overlaps the component or separator")]
    InvalidWitness(usize),
    #[error("unfavourable set is not connected")]
    SetNotConnected,
    #[error("node {node} has non-positive weight {weight} but was passed as unfavourable")]
    FavourableNode { node: usize, weight: f64 },
}

/// One linear inequality over binary node variables. Separator and boundary
/// sets are kept sorted ascending so that structurally equal constraints
/// compare and hash equal.
///
/// An empty separator or boundary is permitted and makes the inequality
/// unconditionally binding on its target (it forces the target to zero).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// x_target <= sum over separator of x_k, with target not in the set.
    RootedSeparator {
        target: usize,
        separator: Vec<usize>,
    },
    /// x_target + x_witness - 1 <= sum over separator of x_k.
    PairwiseSeparator {
        target: usize,
        witness: usize,
        separator: Vec<usize>,
    },
    /// 2 * x_target <= sum over boundary of x_j.
    LeafCut { target: usize, boundary: Vec<usize> },
}

impl Constraint {
    /// True iff the inequality fails under the given labeling.
    pub fn is_violated_by(&self, x: &Assignment) -> bool {
        match self {
            Constraint::RootedSeparator { target, separator } => {
                let lhs = u64::from(x.is_active(*target));
                lhs > support(separator, x)
            }
            Constraint::PairwiseSeparator {
                target,
                witness,
                separator,
            } => {
                let lhs = u64::from(x.is_active(*target)) + u64::from(x.is_active(*witness));
                lhs > 1 + support(separator, x)
            }
            Constraint::LeafCut { target, boundary } => {
                let lhs = 2 * u64::from(x.is_active(*target));
                lhs > support(boundary, x)
            }
        }
    }

    /// Forcing constraints have an empty right-hand side and pin their target
    /// to zero.
    pub fn is_forcing(&self) -> bool {
        match self {
            Constraint::RootedSeparator { separator, .. } => separator.is_empty(),
            Constraint::PairwiseSeparator { separator, .. } => separator.is_empty(),
            Constraint::LeafCut { boundary, .. } => boundary.is_empty(),
        }
    }
}

fn support(nodes: &[usize], x: &Assignment) -> u64 {
    nodes.iter().filter(|&&k| x.is_active(k)).count() as u64
}

/// Whether separator constraints are generated against a designated root or
/// against a witness node of an opposing component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatorMode {
    Rooted { root: usize },
    Pairwise { witness: usize },
}

/// Instantiates one separator inequality per component node: rooted mode
/// yields `x_i <= sum_S x_k`, pairwise mode `x_i + x_j - 1 <= sum_S x_k`
/// with `j` the designated witness of the opposing component.
pub fn constraints_from_separator(
    component: &[usize],
    separator: &[usize],
    mode: SeparatorMode,
) -> Result<Vec<Constraint>, ConstraintError> {
    let sep_set: HashSet<usize> = separator.iter().copied().collect();
    if let Some(&overlap) = component.iter().find(|i| sep_set.contains(i)) {
        return Err(ConstraintError::ComponentSeparatorOverlap(overlap));
    }
    let mut sorted_sep = separator.to_vec();
    sorted_sep.sort_unstable();
    sorted_sep.dedup();

    match mode {
        SeparatorMode::Rooted { root } => {
            if component.contains(&root) {
                return Err(ConstraintError::RootInComponent(root));
            }
            Ok(component
                .iter()
                .map(|&target| Constraint::RootedSeparator {
                    target,
                    separator: sorted_sep.clone(),
                })
                .collect())
        }
        SeparatorMode::Pairwise { witness } => {
            if component.contains(&witness) || sep_set.contains(&witness) {
                return Err(ConstraintError::InvalidWitness(witness));
            }
            Ok(component
                .iter()
                .map(|&target| Constraint::PairwiseSeparator {
                    target,
                    witness,
                    separator: sorted_sep.clone(),
                })
                .collect())
        }
    }
}

/// Upfront leaf cuts for single unfavourable nodes: every node with positive
/// weight (other than the root) must have at least two active neighbors to be
/// active itself.
pub fn singleton_leaf_cuts(
    graph: &Graph,
    weights: &NodeWeights,
    root: Option<usize>,
) -> Vec<Constraint> {
    (0..graph.n_nodes())
        .filter(|&i| weights.get(i) > 0.0 && Some(i) != root)
        .map(|i| Constraint::LeafCut {
            target: i,
            boundary: graph.neighbors(i).to_vec(),
        })
        .collect()
}

/// Leaf cuts for a connected set of unfavourable nodes: each member needs at
/// least two active nodes on the set's outer boundary.
pub fn component_leaf_cut(
    graph: &Graph,
    weights: &NodeWeights,
    unfavourable: &[usize],
) -> Result<Vec<Constraint>, ConstraintError> {
    for &i in unfavourable {
        let w = weights.get(i);
        if w <= 0.0 {
            return Err(ConstraintError::FavourableNode { node: i, weight: w });
        }
    }
    if !is_connected_subset(graph, unfavourable) {
        return Err(ConstraintError::SetNotConnected);
    }
    let members: HashSet<usize> = unfavourable.iter().copied().collect();
    let mut boundary: Vec<usize> = unfavourable
        .iter()
        .flat_map(|&i| graph.neighbors(i))
        .copied()
        .filter(|j| !members.contains(j))
        .collect();
    boundary.sort_unstable();
    boundary.dedup();

    Ok(unfavourable
        .iter()
        .map(|&target| Constraint::LeafCut {
            target,
            boundary: boundary.clone(),
        })
        .collect())
}

fn is_connected_subset(graph: &Graph, nodes: &[usize]) -> bool {
    if nodes.is_empty() {
        return true;
    }
    let members: HashSet<usize> = nodes.iter().copied().collect();
    let mut seen = HashSet::from([nodes[0]]);
    let mut stack = vec![nodes[0]];
    while let Some(node) = stack.pop() {
        for &nb in graph.neighbors(node) {
            if members.contains(&nb) && seen.insert(nb) {
                stack.push(nb);
            }
        }
    }
    seen.len() == nodes.len()
}

/// Ordered, deduplicated constraint pool. Creation order is insertion order;
/// the solver always resolves the first violated constraint.
#[derive(Debug, Clone, Default)]
pub struct ConstraintStore {
    constraints: Vec<Constraint>,
    seen: HashSet<Constraint>,
}

impl ConstraintStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a constraint unless a structurally equal one is already
    /// stored. Returns true when the constraint is new.
    pub fn insert(&mut self, constraint: Constraint) -> bool {
        if self.seen.contains(&constraint) {
            return false;
        }
        self.seen.insert(constraint.clone());
        self.constraints.push(constraint);
        true
    }

    pub fn insert_all(&mut self, constraints: impl IntoIterator<Item = Constraint>) -> usize {
        constraints
            .into_iter()
            .filter(|c| self.insert(c.clone()))
            .count()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Constraints in creation order.
    pub fn iter(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter()
    }

    pub fn get(&self, creation_index: usize) -> &Constraint {
        &self.constraints[creation_index]
    }

    /// The earliest-created constraint violated by `x`, if any.
    pub fn first_violated(&self, x: &Assignment) -> Option<&Constraint> {
        self.constraints.iter().find(|c| c.is_violated_by(x))
    }
}

/// Outcome of unit propagation over a constraint store.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    /// Values forced by the store, in deduction order.
    Fixings(Vec<(usize, bool)>),
    /// Some constraint cannot be satisfied by any completion.
    Conflict(Constraint),
    /// Nothing to deduce.
    Quiescent,
}

/// Runs unit propagation to fixpoint over the stored inequalities. The input
/// assignment is not modified; deduced fixings are returned for the caller to
/// apply. Unit propagation is confluent, so the fixpoint does not depend on
/// the processing order.
pub fn propagate(store: &ConstraintStore, partial: &PartialAssignment) -> Propagation {
    let mut index = ConstraintIndex::new(partial.len());
    index.extend_from(store);
    propagate_indexed(store, &index, partial)
}

/// Maps node variables to the constraints mentioning them, so propagation can
/// requeue only the constraints touched by a new fixing. Grows append-only
/// alongside a store.
#[derive(Debug, Clone)]
pub(crate) struct ConstraintIndex {
    by_var: Vec<Vec<u32>>,
    covered: usize,
}

impl ConstraintIndex {
    pub(crate) fn new(n_nodes: usize) -> Self {
        Self {
            by_var: vec![Vec::new(); n_nodes],
            covered: 0,
        }
    }

    /// Indexes the constraints appended to the store since the last call.
    pub(crate) fn extend_from(&mut self, store: &ConstraintStore) {
        for id in self.covered..store.len() {
            for var in constraint_vars(store.get(id)) {
                self.by_var[var].push(id as u32);
            }
        }
        self.covered = store.len();
    }
}

fn constraint_vars(constraint: &Constraint) -> impl Iterator<Item = usize> + '_ {
    let (target, witness, set): (usize, Option<usize>, &[usize]) = match constraint {
        Constraint::RootedSeparator { target, separator } => (*target, None, separator),
        Constraint::PairwiseSeparator {
            target,
            witness,
            separator,
        } => (*target, Some(*witness), separator),
        Constraint::LeafCut { target, boundary } => (*target, None, boundary),
    };
    std::iter::once(target)
        .chain(witness)
        .chain(set.iter().copied())
}

pub(crate) fn propagate_indexed(
    store: &ConstraintStore,
    index: &ConstraintIndex,
    partial: &PartialAssignment,
) -> Propagation {
    debug_assert_eq!(index.covered, store.len());
    let mut work = partial.clone();
    let mut fixings = Vec::new();
    let mut queued = vec![true; store.len()];
    let mut queue: std::collections::VecDeque<u32> = (0..store.len() as u32).collect();
    while let Some(id) = queue.pop_front() {
        queued[id as usize] = false;
        let constraint = store.get(id as usize);
        let before = fixings.len();
        match propagate_one(constraint, &mut work, &mut fixings) {
            StepOutcome::Conflict => return Propagation::Conflict(constraint.clone()),
            StepOutcome::Progress => {
                for &(var, _) in &fixings[before..] {
                    for &touched in &index.by_var[var] {
                        if !queued[touched as usize] {
                            queued[touched as usize] = true;
                            queue.push_back(touched);
                        }
                    }
                }
            }
            StepOutcome::None => {}
        }
    }
    if fixings.is_empty() {
        Propagation::Quiescent
    } else {
        Propagation::Fixings(fixings)
    }
}

enum StepOutcome {
    None,
    Progress,
    Conflict,
}

fn propagate_one(
    constraint: &Constraint,
    work: &mut PartialAssignment,
    fixings: &mut Vec<(usize, bool)>,
) -> StepOutcome {
    let mut apply = |work: &mut PartialAssignment, node: usize, value: bool| -> Option<bool> {
        match work.get(node) {
            Some(existing) if existing == value => Some(false),
            Some(_) => None,
            None => {
                work.fix(node, value).expect("node checked free");
                fixings.push((node, value));
                Some(true)
            }
        }
    };

    match constraint {
        Constraint::RootedSeparator { target, separator } => {
            if work.get(*target) == Some(false) {
                return StepOutcome::None;
            }
            let (ones, frees) = count_support(separator, work);
            if ones >= 1 {
                return StepOutcome::None;
            }
            if frees == 0 {
                // Entire right-hand side is zero: the target must be zero.
                return match apply(work, *target, false) {
                    Some(true) => StepOutcome::Progress,
                    Some(false) => StepOutcome::None,
                    None => StepOutcome::Conflict,
                };
            }
            if work.get(*target) == Some(true) && frees == 1 {
                let k = separator
                    .iter()
                    .copied()
                    .find(|&k| work.get(k).is_none())
                    .expect("one free support node");
                return match apply(work, k, true) {
                    Some(true) => StepOutcome::Progress,
                    _ => StepOutcome::None,
                };
            }
            StepOutcome::None
        }
        Constraint::PairwiseSeparator {
            target,
            witness,
            separator,
        } => {
            if work.get(*target) == Some(false) || work.get(*witness) == Some(false) {
                return StepOutcome::None;
            }
            let (ones, frees) = count_support(separator, work);
            if ones >= 1 {
                return StepOutcome::None;
            }
            let t_fixed = work.get(*target) == Some(true);
            let w_fixed = work.get(*witness) == Some(true);
            if frees == 0 {
                // At most one of the endpoints may be active.
                if t_fixed && w_fixed {
                    return StepOutcome::Conflict;
                }
                if t_fixed {
                    return match apply(work, *witness, false) {
                        Some(true) => StepOutcome::Progress,
                        Some(false) => StepOutcome::None,
                        None => StepOutcome::Conflict,
                    };
                }
                if w_fixed {
                    return match apply(work, *target, false) {
                        Some(true) => StepOutcome::Progress,
                        Some(false) => StepOutcome::None,
                        None => StepOutcome::Conflict,
                    };
                }
                return StepOutcome::None;
            }
            if t_fixed && w_fixed && frees == 1 {
                let k = separator
                    .iter()
                    .copied()
                    .find(|&k| work.get(k).is_none())
                    .expect("one free support node");
                return match apply(work, k, true) {
                    Some(true) => StepOutcome::Progress,
                    _ => StepOutcome::None,
                };
            }
            StepOutcome::None
        }
        Constraint::LeafCut { target, boundary } => {
            if work.get(*target) == Some(false) {
                return StepOutcome::None;
            }
            let (ones, frees) = count_support(boundary, work);
            if ones >= 2 {
                return StepOutcome::None;
            }
            let support = ones + frees;
            if support < 2 {
                // Fewer than two boundary nodes can ever be active.
                return match apply(work, *target, false) {
                    Some(true) => StepOutcome::Progress,
                    Some(false) => StepOutcome::None,
                    None => StepOutcome::Conflict,
                };
            }
            if work.get(*target) == Some(true) && support == 2 {
                let mut progressed = false;
                for &j in boundary {
                    if work.get(j).is_none() {
                        if let Some(true) = apply(work, j, true) {
                            progressed = true
                        }
                    }
                }
                return if progressed {
                    StepOutcome::Progress
                } else {
                    StepOutcome::None
                };
            }
            StepOutcome::None
        }
    }
}

fn count_support(nodes: &[usize], work: &PartialAssignment) -> (usize, usize) {
    let mut ones = 0;
    let mut frees = 0;
    for &k in nodes {
        match work.get(k) {
            Some(true) => ones += 1,
            Some(false) => {}
            None => frees += 1,
        }
    }
    (ones, frees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_sparse;
    use crate::weights::NodeWeights;

    fn path5() -> Graph {
        build_sparse(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap()
    }

    fn path5_weights() -> NodeWeights {
        NodeWeights::new(vec![-1.0, 0.4, -1.0, 0.7, -2.0]).unwrap()
    }

    #[test]
    fn rooted_separator_instantiation() {
        let cs = constraints_from_separator(&[4], &[3], SeparatorMode::Rooted { root: 0 }).unwrap();
        assert_eq!(
            cs,
            vec![Constraint::RootedSeparator {
                target: 4,
                separator: vec![3],
            }]
        );
        let cs =
            constraints_from_separator(&[2], &[1, 3], SeparatorMode::Rooted { root: 0 }).unwrap();
        assert_eq!(
            cs,
            vec![Constraint::RootedSeparator {
                target: 2,
                separator: vec![1, 3],
            }]
        );
    }

    #[test]
    fn pairwise_separator_instantiation() {
        let cs =
            constraints_from_separator(&[4], &[2], SeparatorMode::Pairwise { witness: 0 }).unwrap();
        assert_eq!(
            cs,
            vec![Constraint::PairwiseSeparator {
                target: 4,
                witness: 0,
                separator: vec![2],
            }]
        );
    }

    #[test]
    fn separator_overlap_rejected() {
        assert_eq!(
            constraints_from_separator(&[2, 3], &[3], SeparatorMode::Rooted { root: 0 }),
            Err(ConstraintError::ComponentSeparatorOverlap(3))
        );
    }

    #[test]
    fn singleton_cuts_target_positive_non_root_nodes() {
        let g = path5();
        let w = path5_weights();
        let cuts = singleton_leaf_cuts(&g, &w, Some(0));
        assert_eq!(
            cuts,
            vec![
                Constraint::LeafCut {
                    target: 1,
                    boundary: vec![0, 2],
                },
                Constraint::LeafCut {
                    target: 3,
                    boundary: vec![2, 4],
                },
            ]
        );
    }

    #[test]
    fn singleton_cuts_skip_the_root_even_when_positive() {
        let g = path5();
        let w = path5_weights();
        let cuts = singleton_leaf_cuts(&g, &w, Some(1));
        assert_eq!(cuts.len(), 1);
        assert!(matches!(cuts[0], Constraint::LeafCut { target: 3, .. }));
    }

    #[test]
    fn component_cut_reduces_to_singleton() {
        let g = path5();
        let w = path5_weights();
        let cuts = component_leaf_cut(&g, &w, &[1]).unwrap();
        assert_eq!(
            cuts,
            vec![Constraint::LeafCut {
                target: 1,
                boundary: vec![0, 2],
            }]
        );
    }

    #[test]
    fn component_cut_rejects_disconnected_set() {
        let g = path5();
        let w = path5_weights();
        assert_eq!(
            component_leaf_cut(&g, &w, &[1, 3]),
            Err(ConstraintError::SetNotConnected)
        );
    }

    #[test]
    fn component_cut_shared_boundary() {
        let g = build_sparse(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let w = NodeWeights::new(vec![-1.0, 0.2, 0.3, -1.0]).unwrap();
        let cuts = component_leaf_cut(&g, &w, &[1, 2]).unwrap();
        assert_eq!(
            cuts,
            vec![
                Constraint::LeafCut {
                    target: 1,
                    boundary: vec![0, 3],
                },
                Constraint::LeafCut {
                    target: 2,
                    boundary: vec![0, 3],
                },
            ]
        );
    }

    #[test]
    fn component_cut_rejects_favourable_member() {
        let g = path5();
        let w = path5_weights();
        assert!(matches!(
            component_leaf_cut(&g, &w, &[0]),
            Err(ConstraintError::FavourableNode { node: 0, .. })
        ));
    }

    #[test]
    fn violation_checks() {
        let rooted = Constraint::RootedSeparator {
            target: 4,
            separator: vec![3],
        };
        let x = Assignment::from_active(5, &[4]);
        assert!(rooted.is_violated_by(&x));

        let leaf = Constraint::LeafCut {
            target: 1,
            boundary: vec![0, 2],
        };
        let x = Assignment::from_active(5, &[0, 1]);
        assert!(leaf.is_violated_by(&x));

        let zero = Assignment::all_inactive(5);
        assert!(!rooted.is_violated_by(&zero));
        assert!(!leaf.is_violated_by(&zero));
    }

    #[test]
    fn store_dedups_structurally_equal_constraints() {
        let mut store = ConstraintStore::new();
        let c = Constraint::RootedSeparator {
            target: 4,
            separator: vec![3],
        };
        assert!(store.insert(c.clone()));
        assert!(!store.insert(c));
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn propagate_fixes_last_support() {
        let mut store = ConstraintStore::new();
        store.insert(Constraint::RootedSeparator {
            target: 4,
            separator: vec![3],
        });
        let mut partial = PartialAssignment::all_free(5);
        partial.fix(4, true).unwrap();
        assert_eq!(
            propagate(&store, &partial),
            Propagation::Fixings(vec![(3, true)])
        );
    }

    #[test]
    fn propagate_reports_conflict() {
        let mut store = ConstraintStore::new();
        let c = Constraint::RootedSeparator {
            target: 4,
            separator: vec![3],
        };
        store.insert(c.clone());
        let mut partial = PartialAssignment::all_free(5);
        partial.fix(4, true).unwrap();
        partial.fix(3, false).unwrap();
        assert_eq!(propagate(&store, &partial), Propagation::Conflict(c));
    }

    #[test]
    fn propagate_quiescent_on_free_assignment() {
        let mut store = ConstraintStore::new();
        store.insert(Constraint::RootedSeparator {
            target: 4,
            separator: vec![3],
        });
        let partial = PartialAssignment::all_free(5);
        assert_eq!(propagate(&store, &partial), Propagation::Quiescent);
    }

    #[test]
    fn propagate_runs_to_fixpoint_across_constraints() {
        // x_4 <= x_3 and x_3 <= x_2 chain: fixing 4 pulls in both supports.
        let mut store = ConstraintStore::new();
        store.insert(Constraint::RootedSeparator {
            target: 4,
            separator: vec![3],
        });
        store.insert(Constraint::RootedSeparator {
            target: 3,
            separator: vec![2],
        });
        let mut partial = PartialAssignment::all_free(5);
        partial.fix(4, true).unwrap();
        assert_eq!(
            propagate(&store, &partial),
            Propagation::Fixings(vec![(3, true), (2, true)])
        );
    }

    #[test]
    fn propagate_leaf_cut_support_rules() {
        let mut store = ConstraintStore::new();
        store.insert(Constraint::LeafCut {
            target: 1,
            boundary: vec![0, 2],
        });
        // Target active, both boundary nodes free: they are the only support.
        let mut partial = PartialAssignment::all_free(5);
        partial.fix(1, true).unwrap();
        assert_eq!(
            propagate(&store, &partial),
            Propagation::Fixings(vec![(0, true), (2, true)])
        );
        // One boundary node off: the target can never reach support two.
        let mut partial = PartialAssignment::all_free(5);
        partial.fix(0, false).unwrap();
        assert_eq!(
            propagate(&store, &partial),
            Propagation::Fixings(vec![(1, false)])
        );
    }

    #[test]
    fn forcing_constraint_fixes_target_off() {
        let mut store = ConstraintStore::new();
        store.insert(Constraint::RootedSeparator {
            target: 2,
            separator: vec![],
        });
        let partial = PartialAssignment::all_free(5);
        assert_eq!(
            propagate(&store, &partial),
            Propagation::Fixings(vec![(2, false)])
        );
    }
}
