//! `mccs` command line: solve instances, generate synthetic probability maps,
//! score predictions, and benchmark solver/strategy matrices.

mod bench;
mod instance;
mod run;

use std::path::PathBuf;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mccs::eval::score;
use mccs::separators::StrategyKind;

use bench::{run_bench, BenchConfig};
use instance::{gen_random, read_instance, read_labeling, render_probabilities, write_solution};
use run::{build_stats_record, execute_run, resolve_root, RunSpec, SolverChoice};

#[derive(Parser)]
#[command(
    name = "mccs",
    version,
    about = "Minimum cost connected subgraph solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print a stats record as JSON.
    Solve(SolveArgs),
    /// Generate a reproducible synthetic grid probability map.
    Gen(GenArgs),
    /// Score a predicted labeling against ground truth.
    Eval(EvalArgs),
    /// Run a solver/strategy matrix over instances and emit CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    Exact,
    Geodesic,
    Maxcomp,
}

impl From<SolverArg> for SolverChoice {
    fn from(value: SolverArg) -> Self {
        match value {
            SolverArg::Exact => SolverChoice::Exact,
            SolverArg::Geodesic => SolverChoice::Geodesic,
            SolverArg::Maxcomp => SolverChoice::Maxcomp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Nearest,
    Minimal,
    Equidistant,
    KNearest,
    KInterleave,
}

impl StrategyArg {
    fn to_kind(self, k: usize) -> StrategyKind {
        match self {
            StrategyArg::Nearest => StrategyKind::Nearest,
            StrategyArg::Minimal => StrategyKind::Minimal,
            StrategyArg::Equidistant => StrategyKind::Equidistant,
            StrategyArg::KNearest => StrategyKind::KNearest(k),
            StrategyArg::KInterleave => StrategyKind::KInterleave(k),
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (grid probability or sparse graph format).
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = SolverArg::Exact)]
    solver: SolverArg,
    #[arg(long, value_enum, default_value_t = StrategyArg::Nearest)]
    strategy: StrategyArg,
    /// Layer count for the k-nearest / k-interleave strategies.
    #[arg(long, default_value_t = 4, value_parser = parse_positive)]
    k: usize,
    /// Relative optimality gap.
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// `auto` (strongest node of the largest negative component) or an index.
    #[arg(long, default_value = "auto")]
    root: String,
    /// Disable the upfront single-node leaf cuts.
    #[arg(long)]
    no_leaf_cuts: bool,
    /// Also install leaf cuts for whole unfavourable components upfront.
    #[arg(long)]
    component_leaf_cuts: bool,
    /// Enforce connectivity pairwise instead of toward a root.
    #[arg(long)]
    unrooted: bool,
    /// Ground-truth labeling to score against.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Write the solution mask / node list here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    /// Grid extents, comma separated (e.g. 8,8 or 16,16,4).
    #[arg(long, value_delimiter = ',', required = true)]
    extents: Vec<usize>,
    /// Number of box-filter smoothing passes.
    #[arg(long, default_value_t = 2)]
    radius: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Instance files.
    #[arg(required = true)]
    instances: Vec<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [SolverArg::Exact, SolverArg::Geodesic, SolverArg::Maxcomp])]
    solvers: Vec<SolverArg>,
    #[arg(long, value_enum, value_delimiter = ',',
          default_values_t = [StrategyArg::Nearest, StrategyArg::Minimal, StrategyArg::Equidistant,
                              StrategyArg::KNearest, StrategyArg::KInterleave])]
    strategies: Vec<StrategyArg>,
    #[arg(long, default_value_t = 4, value_parser = parse_positive)]
    k: usize,
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    #[arg(long)]
    no_leaf_cuts: bool,
    #[arg(long, default_value = "auto")]
    root: String,
    #[arg(long)]
    unrooted: bool,
    /// Ground truth for FILE is read from FILE<suffix> when present.
    #[arg(long, default_value = ".gt")]
    gt_suffix: String,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Fill wall_time_ms with measured times (breaks byte-stable output).
    #[arg(long)]
    timing: bool,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_positive(s: &str) -> Result<usize, String> {
    let value: usize = s.parse().map_err(|e| format!("{e}"))?;
    if value == 0 {
        return Err("must be at least 1".into());
    }
    Ok(value)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(args) => cmd_solve(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let mut instance = read_instance(&args.instance)?;
    if let Some(gt_path) = &args.gt {
        instance.ground_truth = Some(read_labeling(gt_path, instance.graph.n_nodes())?);
    }
    let root = resolve_root(&instance, &args.root, args.unrooted)?;
    let spec = RunSpec {
        solver: args.solver.into(),
        strategy: args.strategy.to_kind(args.k),
        rel_gap: args.gap,
        time_limit: args.time_limit.map(Duration::from_secs_f64),
        leaf_cuts: !args.no_leaf_cuts,
        component_leaf_cuts: args.component_leaf_cuts,
        root,
    };
    let result = execute_run(&instance, &spec)?;
    if let Some(out) = &args.out {
        write_solution(out, &instance.graph, &result.assignment)?;
    }
    let record = build_stats_record(&instance, &spec, &result, instance.ground_truth.as_ref());
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let (graph, probabilities) = gen_random(&args.extents, args.radius, args.seed)?;
    std::fs::write(&args.out, render_probabilities(&graph, &probabilities))
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct ScoresRecord {
    precision: f64,
    recall: f64,
    f1: f64,
    true_pos: usize,
    false_pos: usize,
    false_neg: usize,
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let pred_text = std::fs::read_to_string(&args.pred)
        .with_context(|| format!("reading {}", args.pred.display()))?;
    let pred_len = labeling_length(&pred_text)?;
    let pred = read_labeling(&args.pred, pred_len)?;
    let truth = read_labeling(&args.truth, pred.len())?;
    let scores = score(&pred, &truth);
    let record = ScoresRecord {
        precision: scores.precision,
        recall: scores.recall,
        f1: scores.f1,
        true_pos: scores.true_pos,
        false_pos: scores.false_pos,
        false_neg: scores.false_neg,
    };
    println!("{}", serde_json::to_string(&record)?);
    Ok(())
}

/// Node count declared by a labeling file, either format.
fn labeling_length(text: &str) -> Result<usize> {
    let mut tokens = text.split_whitespace();
    match tokens.next() {
        Some("grid") => {
            let dim: usize = tokens
                .next()
                .context("missing dimensionality")?
                .parse()
                .context("dimensionality")?;
            let mut product = 1usize;
            for _ in 0..dim {
                let extent: usize = tokens
                    .next()
                    .context("missing extent")?
                    .parse()
                    .context("extent")?;
                product *= extent;
            }
            Ok(product)
        }
        Some("nodes") => tokens
            .next()
            .context("missing node count")?
            .parse()
            .context("node count"),
        _ => anyhow::bail!("unrecognized labeling format"),
    }
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let config = BenchConfig {
        instances: args.instances,
        solvers: args.solvers.into_iter().map(SolverChoice::from).collect(),
        strategies: args
            .strategies
            .into_iter()
            .map(|s| s.to_kind(args.k))
            .collect(),
        rel_gap: args.gap,
        leaf_cuts: !args.no_leaf_cuts,
        root_arg: args.root,
        unrooted: args.unrooted,
        gt_suffix: args.gt_suffix,
        jobs: args.jobs,
        timing: args.timing,
    };
    let csv = run_bench(&config)?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{csv}"),
    }
    Ok(())
}
