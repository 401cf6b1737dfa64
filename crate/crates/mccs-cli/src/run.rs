//! Dispatch of a single solver run and the machine-readable stats record.

use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Result};
use serde::Serialize;

use mccs::eval::{maxcomp, objective, score};
use mccs::exact::{solve_exact, SolveResult, SolveStatus, SolverConfig, SolverStats};
use mccs::geodesic::{build_geodesic_tree, solve_geodesic};
use mccs::graph::Assignment;
use mccs::separators::StrategyKind;
use mccs::weights::select_root;

use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Exact,
    Geodesic,
    Maxcomp,
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Exact => "exact",
            SolverChoice::Geodesic => "geodesic",
            SolverChoice::Maxcomp => "maxcomp",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub solver: SolverChoice,
    /// Used by the exact solver only.
    pub strategy: StrategyKind,
    pub rel_gap: f64,
    pub time_limit: Option<Duration>,
    pub leaf_cuts: bool,
    pub component_leaf_cuts: bool,
    /// None = unrooted (exact solver only).
    pub root: Option<usize>,
}

/// Resolves the `--root {auto,<index>}` / `--unrooted` combination against an
/// instance.
pub fn resolve_root(instance: &Instance, root_arg: &str, unrooted: bool) -> Result<Option<usize>> {
    if unrooted {
        return Ok(None);
    }
    if let Some(root) = instance.root {
        return Ok(Some(root));
    }
    match root_arg {
        "auto" => Ok(Some(select_root(&instance.graph, &instance.weights))),
        idx => {
            let root: usize = idx
                .parse()
                .map_err(|_| anyhow!("--root expects `auto` or a node index, got `{idx}`"))?;
            if root >= instance.graph.n_nodes() {
                bail!(
                    "root {root} out of range for instance with {} nodes",
                    instance.graph.n_nodes()
                );
            }
            Ok(Some(root))
        }
    }
}

pub fn execute_run(instance: &Instance, spec: &RunSpec) -> Result<SolveResult> {
    match spec.solver {
        SolverChoice::Exact => {
            let config = SolverConfig {
                strategy: spec.strategy,
                root: spec.root,
                rel_gap: spec.rel_gap,
                time_limit: spec.time_limit,
                node_limit: None,
                use_singleton_leaf_cuts: spec.leaf_cuts,
                use_component_leaf_cuts: spec.component_leaf_cuts,
            };
            Ok(solve_exact(&instance.graph, &instance.weights, &config))
        }
        SolverChoice::Geodesic => {
            let root = spec
                .root
                .ok_or_else(|| anyhow!("the geodesic solver requires a root; drop --unrooted"))?;
            let start = Instant::now();
            let tree = build_geodesic_tree(&instance.graph, &instance.weights, root);
            let mut result = solve_geodesic(&tree, &instance.weights);
            result.stats.wall_time = start.elapsed();
            Ok(result)
        }
        SolverChoice::Maxcomp => {
            let start = Instant::now();
            let assignment = maxcomp(&instance.graph, &instance.weights);
            let obj = objective(&assignment, &instance.weights);
            Ok(SolveResult {
                assignment,
                objective: obj,
                status: SolveStatus::Optimal,
                stats: SolverStats {
                    wall_time: start.elapsed(),
                    ..SolverStats::default()
                },
            })
        }
    }
}

/// One stats record per run, emitted as a single JSON object.
#[derive(Debug, Serialize)]
pub struct StatsRecord {
    pub solver: &'static str,
    pub strategy: Option<&'static str>,
    pub k: Option<usize>,
    pub objective: f64,
    pub status: String,
    pub wall_time_ms: u64,
    pub search_nodes_expanded: u64,
    pub constraints_generated: u64,
    pub incumbent_updates: u64,
    pub root: Option<usize>,
    pub root_in_maxcomp: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recall: Option<f64>,
}

pub fn build_stats_record(
    instance: &Instance,
    spec: &RunSpec,
    result: &SolveResult,
    truth: Option<&Assignment>,
) -> StatsRecord {
    let strategy = match spec.solver {
        SolverChoice::Exact => Some(spec.strategy.name()),
        _ => None,
    };
    let k = match spec.solver {
        SolverChoice::Exact => spec.strategy.k(),
        _ => None,
    };
    let root_in_maxcomp = spec.root.map(|r| {
        let baseline = maxcomp(&instance.graph, &instance.weights);
        baseline.is_active(r)
    });
    let scores = truth.map(|t| score(&result.assignment, t));
    StatsRecord {
        solver: spec.solver.name(),
        strategy,
        k,
        objective: result.objective,
        status: result.status.to_string(),
        wall_time_ms: result.stats.wall_time.as_millis() as u64,
        search_nodes_expanded: result.stats.search_nodes_expanded,
        constraints_generated: result.stats.constraints_generated,
        incumbent_updates: result.stats.incumbent_updates,
        root: spec.root,
        root_in_maxcomp,
        f1: scores.as_ref().map(|s| s.f1),
        precision: scores.as_ref().map(|s| s.precision),
        recall: scores.as_ref().map(|s| s.recall),
    }
}
