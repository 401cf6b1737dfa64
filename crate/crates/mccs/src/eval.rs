//! Maximum-component baseline and the segmentation / objective metrics used
//! to compare solvers.

use crate::graph::{Assignment, Graph};
use crate::weights::{best_negative_component, NodeWeights};

/// Precision / recall / F1 together with the underlying counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
}

/// Largest connected component of the thresholded set {i : w_i < 0}; ties go
/// to the lower total weight, then the smallest member. Empty when no node
/// has negative weight.
pub fn maxcomp(graph: &Graph, weights: &NodeWeights) -> Assignment {
    assert_eq!(weights.len(), graph.n_nodes());
    match best_negative_component(graph, weights) {
        Some(component) => Assignment::from_active(graph.n_nodes(), &component),
        None => Assignment::all_inactive(graph.n_nodes()),
    }
}

/// Precision, recall and F1 of a predicted labeling against ground truth.
///
/// With nothing predicted, precision is 1 when the truth is also empty and 0
/// otherwise; recall is treated symmetrically for an empty truth.
pub fn score(pred: &Assignment, truth: &Assignment) -> Scores {
    assert_eq!(
        pred.len(),
        truth.len(),
        "prediction and truth must have equal length"
    );
    let mut true_pos = 0;
    let mut false_pos = 0;
    let mut false_neg = 0;
    for i in 0..pred.len() {
        match (pred.is_active(i), truth.is_active(i)) {
            (true, true) => true_pos += 1,
            (true, false) => false_pos += 1,
            (false, true) => false_neg += 1,
            (false, false) => {}
        }
    }
    let precision = if true_pos + false_pos > 0 {
        true_pos as f64 / (true_pos + false_pos) as f64
    } else if false_neg == 0 {
        1.0
    } else {
        0.0
    };
    let recall = if true_pos + false_neg > 0 {
        true_pos as f64 / (true_pos + false_neg) as f64
    } else if false_pos == 0 {
        1.0
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Scores {
        precision,
        recall,
        f1,
        true_pos,
        false_pos,
        false_neg,
    }
}

/// Sum of weights over the active nodes, accumulated in index order.
pub fn objective(x: &Assignment, weights: &NodeWeights) -> f64 {
    assert_eq!(
        x.len(),
        weights.len(),
        "assignment and weights must have equal length"
    );
    let mut total = 0.0;
    for i in 0..x.len() {
        if x.is_active(i) {
            total += weights.get(i);
        }
    }
    total
}

/// True iff |a - b| <= rel_tol * max(|a|, |b|). Two exact zeros always match.
pub fn objectives_match(a: f64, b: f64, rel_tol: f64) -> bool {
    assert!(rel_tol >= 0.0);
    (a - b).abs() <= rel_tol * a.abs().max(b.abs())
}
