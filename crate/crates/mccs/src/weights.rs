//! Node costs derived from probability estimates, and root selection.
//!
//! A node with activation probability p gets weight w = -ln(p / (1 - p)):
//! negative for likely-foreground nodes, positive for likely-background ones.

use thiserror::Error;

use crate::graph::{connected_components, Assignment, Graph};

/// Default clamp applied to probabilities before the log-odds conversion.
pub const DEFAULT_PROB_CLAMP: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("clamp bound {0} must lie in (0, 0.5)")]
    InvalidClamp(f64),
    #[error("weight for node {node} is not finite")]
    NonFiniteWeight { node: usize },
}

/// Per-node real costs; every entry is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWeights {
    w: Vec<f64>,
}

impl NodeWeights {
    pub fn new(w: Vec<f64>) -> Result<Self, WeightError> {
        if let Some(node) = w.iter().position(|v| !v.is_finite()) {
            return Err(WeightError::NonFiniteWeight { node });
        }
        Ok(Self { w })
    }

    pub fn from_probabilities(probs: &[f64], eps: f64) -> Result<Self, WeightError> {
        let w = probs
            .iter()
            .map(|&p| prob_to_weight(p, eps))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { w })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, node: usize) -> f64 {
        self.w[node]
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }
}

/// Converts an activation probability to a log-odds cost,
/// -ln(p' / (1 - p')) with p' = clamp(p, eps, 1 - eps).
/// Monotone decreasing in p; zero at p = 0.5.
pub fn prob_to_weight(p: f64, eps: f64) -> Result<f64, WeightError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(WeightError::ProbabilityOutOfRange(p));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(WeightError::InvalidClamp(eps));
    }
    let clamped = p.clamp(eps, 1.0 - eps);
    Ok(-(clamped / (1.0 - clamped)).ln())
}

/// Picks the strongest node in the largest negative-weight component.
///
/// Components of {i : w_i < 0} are ranked by node count (descending), then
/// total weight (ascending), then smallest member. The root is that
/// component's minimum-weight node, ties to the smaller index. With no
/// negative node at all, the global minimum-weight node wins.
pub fn select_root(graph: &Graph, weights: &NodeWeights) -> usize {
    assert!(graph.n_nodes() > 0, "select_root requires a nonempty graph");
    assert_eq!(weights.len(), graph.n_nodes());

    match best_negative_component(graph, weights) {
        Some(component) => strongest_node(&component, weights),
        None => strongest_node(&(0..graph.n_nodes()).collect::<Vec<_>>(), weights),
    }
}

/// The preferred component of {i : w_i < 0}: largest by node count, ties
/// broken by lower total weight, then by smallest member. None when no node
/// has negative weight.
pub(crate) fn best_negative_component(graph: &Graph, weights: &NodeWeights) -> Option<Vec<usize>> {
    let negative =
        Assignment::from_labels((0..graph.n_nodes()).map(|i| weights.get(i) < 0.0).collect());
    let components = connected_components(graph, &negative);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for component in components {
        let total: f64 = component.iter().map(|&i| weights.get(i)).sum();
        let better = match &best {
            None => true,
            Some((cur, cur_total)) => {
                component.len() > cur.len() || (component.len() == cur.len() && total < *cur_total)
                // equal size and total: keep the earlier (smaller member) one
            }
        };
        if better {
            best = Some((component, total));
        }
    }
    best.map(|(component, _)| component)
}

fn strongest_node(nodes: &[usize], weights: &NodeWeights) -> usize {
    let mut best = nodes[0];
    for &i in &nodes[1..] {
        if weights.get(i) < weights.get(best) {
            best = i;
        }
    }
    best
}
