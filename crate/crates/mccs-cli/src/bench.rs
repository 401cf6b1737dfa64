//! Batch benchmarking: a solver/strategy matrix over instance files, one CSV
//! row per run. Rows are collected, sorted, and emitted in one piece so the
//! output is byte-stable regardless of worker scheduling.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};

use mccs::eval::score;
use mccs::separators::StrategyKind;

use crate::instance::{read_instance, read_labeling, Instance};
use crate::run::{execute_run, resolve_root, RunSpec, SolverChoice};

pub const CSV_HEADER: &str =
    "instance,solver,strategy,k,leaf_cuts,objective,status,wall_time_ms,search_nodes,constraints,f1,precision,recall";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub instances: Vec<PathBuf>,
    pub solvers: Vec<SolverChoice>,
    pub strategies: Vec<StrategyKind>,
    pub rel_gap: f64,
    pub leaf_cuts: bool,
    pub root_arg: String,
    pub unrooted: bool,
    /// Ground truth is read from `<instance><gt_suffix>` when that file exists.
    pub gt_suffix: String,
    pub jobs: usize,
    /// Populate wall_time_ms with measured times. Off by default: timing
    /// varies between runs and would break byte-identical output.
    pub timing: bool,
}

struct BenchRow {
    instance: String,
    solver: String,
    strategy: String,
    k: String,
    leaf_cuts: String,
    objective: f64,
    status: String,
    wall_time_ms: String,
    search_nodes: u64,
    constraints: u64,
    f1: String,
    precision: String,
    recall: String,
}

impl BenchRow {
    fn sort_key(&self) -> (String, String, String, String, String) {
        (
            self.instance.clone(),
            self.solver.clone(),
            self.strategy.clone(),
            self.k.clone(),
            self.leaf_cuts.clone(),
        )
    }

    fn render(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.instance,
            self.solver,
            self.strategy,
            self.k,
            self.leaf_cuts,
            self.objective,
            self.status,
            self.wall_time_ms,
            self.search_nodes,
            self.constraints,
            self.f1,
            self.precision,
            self.recall
        )
    }
}

struct Task {
    instance_idx: usize,
    spec: RunSpec,
}

/// Runs the whole matrix and renders the CSV, header included.
pub fn run_bench(config: &BenchConfig) -> Result<String> {
    // Load every instance once, upfront; runs share them read-only.
    let mut instances: Vec<(String, Instance)> = Vec::new();
    for path in &config.instances {
        let mut instance = read_instance(path)?;
        let gt_path = PathBuf::from(format!("{}{}", path.display(), config.gt_suffix));
        if gt_path.exists() {
            instance.ground_truth = Some(read_labeling(&gt_path, instance.graph.n_nodes())?);
        }
        instances.push((path.display().to_string(), instance));
    }

    let mut tasks = Vec::new();
    for (idx, (_, instance)) in instances.iter().enumerate() {
        let root = resolve_root(instance, &config.root_arg, config.unrooted)
            .with_context(|| format!("resolving root for {}", instances[idx].0))?;
        for &solver in &config.solvers {
            // Strategies only matter for the exact solver; the heuristic and
            // the baseline get one run each.
            let strategies: &[StrategyKind] = match solver {
                SolverChoice::Exact => &config.strategies,
                _ => &[StrategyKind::Nearest],
            };
            for &strategy in strategies {
                tasks.push(Task {
                    instance_idx: idx,
                    spec: RunSpec {
                        solver,
                        strategy,
                        rel_gap: config.rel_gap,
                        time_limit: None,
                        leaf_cuts: config.leaf_cuts,
                        component_leaf_cuts: false,
                        root,
                    },
                });
            }
        }
    }

    let results: Mutex<Vec<Option<BenchRow>>> =
        Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next_task = AtomicUsize::new(0);
    let errors: Mutex<Vec<anyhow::Error>> = Mutex::new(Vec::new());
    let workers = config.jobs.max(1).min(tasks.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let task_idx = next_task.fetch_add(1, Ordering::Relaxed);
                let Some(task) = tasks.get(task_idx) else {
                    break;
                };
                let (name, instance) = &instances[task.instance_idx];
                match run_task(name, instance, &task.spec, config.timing) {
                    Ok(row) => results.lock().unwrap()[task_idx] = Some(row),
                    Err(err) => errors.lock().unwrap().push(err),
                }
            });
        }
    });

    if let Some(err) = errors.into_inner().unwrap().into_iter().next() {
        return Err(err);
    }
    let mut rows: Vec<BenchRow> = results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every task produced a row"))
        .collect();
    rows.sort_by_key(|r| r.sort_key());

    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.render());
        out.push('\n');
    }
    Ok(out)
}

fn run_task(name: &str, instance: &Instance, spec: &RunSpec, timing: bool) -> Result<BenchRow> {
    let result = execute_run(instance, spec)?;
    let scores = instance
        .ground_truth
        .as_ref()
        .map(|t| score(&result.assignment, t));
    let is_exact = spec.solver == SolverChoice::Exact;
    Ok(BenchRow {
        instance: name.to_string(),
        solver: spec.solver.name().to_string(),
        strategy: if is_exact {
            spec.strategy.name().to_string()
        } else {
            String::new()
        },
        k: match (is_exact, spec.strategy.k()) {
            (true, Some(k)) => k.to_string(),
            _ => String::new(),
        },
        leaf_cuts: if is_exact {
            spec.leaf_cuts.to_string()
        } else {
            String::new()
        },
        objective: result.objective,
        status: result.status.to_string(),
        wall_time_ms: if timing {
            result.stats.wall_time.as_millis().to_string()
        } else {
            String::new()
        },
        search_nodes: result.stats.search_nodes_expanded,
        constraints: result.stats.constraints_generated,
        f1: scores
            .as_ref()
            .map(|s| s.f1.to_string())
            .unwrap_or_default(),
        precision: scores
            .as_ref()
            .map(|s| s.precision.to_string())
            .unwrap_or_default(),
        recall: scores
            .as_ref()
            .map(|s| s.recall.to_string())
            .unwrap_or_default(),
    })
}
