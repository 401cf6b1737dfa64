//! Soundness of generated constraints, checked by exhaustive enumeration of
//! feasible assignments on small grids: lazy separator cuts never exclude a
//! connected solution, leaf cuts never exclude an optimal one, and
//! propagation never fixes a value that some satisfying completion needs.

mod support;

use mccs::constraints::{
    component_leaf_cut, propagate, singleton_leaf_cuts, Constraint, ConstraintStore, Propagation,
};
use mccs::exact::{greedy_completion, separate, solve_exact, PartialAssignment, SolverConfig};
use mccs::graph::{connected_components, Assignment};
use mccs::separators::StrategyKind;
use mccs::weights::select_root;

use support::{
    adjacency_masks, brute_force_rooted_optimum, enumerate_feasible_rooted, grid_instance,
    mask_is_connected, mask_objective,
};

const ALL_STRATEGIES: [StrategyKind; 5] = [
    StrategyKind::Nearest,
    StrategyKind::Minimal,
    StrategyKind::Equidistant,
    StrategyKind::KNearest(3),
    StrategyKind::KInterleave(3),
];

/// Replays the lazy separation loop on every disconnected candidate met
/// during an actual solve and asserts no generated constraint cuts off any
/// feasible (connected, root-containing) assignment.
#[test]
fn lazy_cuts_never_exclude_a_connected_solution() {
    for seed in 0..8 {
        let (graph, weights) = grid_instance(4, 4, 600 + seed);
        let root = select_root(&graph, &weights);
        let feasible = enumerate_feasible_rooted(&graph, root);
        for strategy in ALL_STRATEGIES {
            let config = SolverConfig::rooted(root, strategy);
            let mut store = ConstraintStore::new();
            // Exercise separation from a spread of integral candidates:
            // every single-component-off variant of the relaxed solution.
            let relaxed =
                greedy_completion(&PartialAssignment::all_free(graph.n_nodes()), &weights);
            let mut candidates = vec![relaxed.clone()];
            for component in connected_components(&graph, &relaxed) {
                if component.binary_search(&root).is_ok() {
                    continue;
                }
                let mut x = relaxed.clone();
                for &i in &component {
                    x.set(i, false);
                }
                candidates.push(x);
            }
            for x in &candidates {
                separate(&graph, x, &config, &mut store);
            }
            for constraint in store.iter() {
                for assignment in &feasible {
                    assert!(
                        !constraint.is_violated_by(assignment),
                        "seed {seed}, {strategy:?}: {constraint:?} cuts a feasible solution"
                    );
                }
            }
        }
    }
}

/// Leaf cuts may exclude feasible points, but never all optimal ones: the
/// optimum over assignments satisfying every leaf cut equals the overall
/// optimum.
#[test]
fn leaf_cuts_preserve_the_optimum() {
    for seed in 0..8 {
        let (graph, weights) = grid_instance(4, 4, 700 + seed);
        let root = select_root(&graph, &weights);
        let adj = adjacency_masks(&graph);
        let optimum = brute_force_rooted_optimum(&graph, &weights, root);

        let mut cuts = singleton_leaf_cuts(&graph, &weights, Some(root));
        let positive =
            Assignment::from_labels((0..graph.n_nodes()).map(|i| weights.get(i) > 0.0).collect());
        for component in connected_components(&graph, &positive) {
            cuts.extend(
                component_leaf_cut(&graph, &weights, &component)
                    .unwrap()
                    .into_iter()
                    .filter(
                        |c| !matches!(c, Constraint::LeafCut { target, .. } if *target == root),
                    ),
            );
        }

        let n = graph.n_nodes();
        let mut best_with_cuts = f64::INFINITY;
        for mask in 0..(1u64 << n) {
            if mask & (1 << root) == 0 || !mask_is_connected(&adj, mask) {
                continue;
            }
            let labels = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let x = Assignment::from_labels(labels);
            if cuts.iter().any(|c| c.is_violated_by(&x)) {
                continue;
            }
            best_with_cuts = best_with_cuts.min(mask_objective(mask, &weights));
        }
        assert_eq!(
            best_with_cuts, optimum,
            "seed {seed}: leaf cuts removed every optimal solution"
        );
    }
}

/// Propagated fixings are forced: flipping any one of them admits no
/// completion that satisfies the store.
#[test]
fn propagation_only_fixes_forced_values() {
    for seed in 0..6 {
        let (graph, weights) = grid_instance(3, 3, 800 + seed);
        let root = select_root(&graph, &weights);
        let config = SolverConfig::rooted(root, StrategyKind::Nearest);
        let mut store = ConstraintStore::new();
        for c in singleton_leaf_cuts(&graph, &weights, Some(root)) {
            store.insert(c);
        }
        let relaxed = greedy_completion(&PartialAssignment::all_free(graph.n_nodes()), &weights);
        separate(&graph, &relaxed, &config, &mut store);

        let n = graph.n_nodes();
        // Try a spread of partials: each single node fixed active.
        for node in 0..n {
            let mut partial = PartialAssignment::all_free(n);
            partial.fix(node, true).unwrap();
            let fixings = match propagate(&store, &partial) {
                Propagation::Fixings(f) => f,
                Propagation::Conflict(_) => continue,
                Propagation::Quiescent => continue,
            };
            for &(fixed_node, value) in &fixings {
                // No full assignment extending `partial` with the opposite
                // value satisfies every stored constraint.
                let mut exists = false;
                'masks: for mask in 0..(1u64 << n) {
                    if mask & (1 << node) == 0 {
                        continue;
                    }
                    let flipped = mask & (1 << fixed_node) != 0;
                    if flipped == value {
                        continue;
                    }
                    let labels = (0..n).map(|i| mask & (1 << i) != 0).collect();
                    let x = Assignment::from_labels(labels);
                    for c in store.iter() {
                        if c.is_violated_by(&x) {
                            continue 'masks;
                        }
                    }
                    exists = true;
                    break;
                }
                assert!(
                    !exists,
                    "seed {seed}: propagation fixed node {fixed_node}={value} but a satisfying completion disagrees"
                );
            }
        }
    }
}

/// Inserting an equal inequality twice leaves the store unchanged, including
/// when the separator arrives in a different order.
#[test]
fn store_deduplication_is_order_insensitive() {
    use mccs::constraints::{constraints_from_separator, SeparatorMode};
    let mut store = ConstraintStore::new();
    let a = constraints_from_separator(&[2], &[1, 3], SeparatorMode::Rooted { root: 0 }).unwrap();
    let b = constraints_from_separator(&[2], &[3, 1], SeparatorMode::Rooted { root: 0 }).unwrap();
    assert_eq!(store.insert_all(a), 1);
    assert_eq!(store.insert_all(b), 0);
    assert_eq!(store.len(), 1);
}

/// The exact solver agrees with enumeration when component leaf cuts are on.
#[test]
fn component_cuts_agree_with_enumeration() {
    for seed in 0..6 {
        let (graph, weights) = grid_instance(4, 4, 900 + seed);
        let root = select_root(&graph, &weights);
        let optimum = brute_force_rooted_optimum(&graph, &weights, root);
        let mut config = SolverConfig::rooted(root, StrategyKind::Equidistant);
        config.use_component_leaf_cuts = true;
        let result = solve_exact(&graph, &weights, &config);
        assert!(
            (result.objective - optimum).abs() <= 1e-9,
            "seed {seed}: {} vs {optimum}",
            result.objective
        );
    }
}
