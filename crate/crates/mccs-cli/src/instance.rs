//! Instance container and the text file formats: grid probability files,
//! sparse graph files, and solution masks / node lists.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mccs::graph::{build_grid, build_sparse, Assignment, Connectivity, Graph};
use mccs::weights::{NodeWeights, DEFAULT_PROB_CLAMP};

/// A solvable problem instance: the graph, derived node weights, and the
/// optional root override and ground truth supplied alongside.
#[derive(Debug, Clone)]
pub struct Instance {
    pub graph: Graph,
    pub weights: NodeWeights,
    pub root: Option<usize>,
    pub ground_truth: Option<Assignment>,
}

fn connectivity_for(dim: usize) -> Result<Connectivity> {
    match dim {
        1 | 2 => Ok(Connectivity::Four),
        3 => Ok(Connectivity::Six),
        d => bail!("unsupported grid dimensionality {d} (expected 1, 2 or 3)"),
    }
}

/// Parses a grid probability file:
/// line 1 `grid <d> <n1> ... <nd>`, then exactly prod(n_i) whitespace
/// separated probabilities in [0, 1], row-major with the last axis fastest.
pub fn read_grid_probabilities(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    let (graph, values) = parse_grid_values(&text)?;
    for &p in &values {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            bail!("probability {p} outside [0, 1]");
        }
    }
    let weights =
        NodeWeights::from_probabilities(&values, DEFAULT_PROB_CLAMP).map_err(|e| anyhow!("{e}"))?;
    Ok(Instance {
        graph,
        weights,
        root: None,
        ground_truth: None,
    })
}

fn parse_grid_values(text: &str) -> Result<(Graph, Vec<f64>)> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty file"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some("grid") {
        bail!("malformed header: expected `grid <d> <extents...>`");
    }
    let dim: usize = tokens
        .next()
        .ok_or_else(|| anyhow!("malformed header: missing dimensionality"))?
        .parse()
        .context("malformed header: dimensionality")?;
    let extents: Vec<usize> = tokens
        .map(|t| t.parse::<usize>().context("malformed header: extent"))
        .collect::<Result<_>>()?;
    if extents.len() != dim {
        bail!(
            "malformed header: expected {dim} extents, found {}",
            extents.len()
        );
    }
    let graph = build_grid(&extents, connectivity_for(dim)?).map_err(|e| anyhow!("{e}"))?;

    let rest = lines.collect::<Vec<_>>().join("\n");
    let values: Vec<f64> = rest
        .split_whitespace()
        .map(|t| t.parse::<f64>().with_context(|| format!("bad value `{t}`")))
        .collect::<Result<_>>()?;
    if values.len() != graph.n_nodes() {
        bail!(
            "value count mismatch: header declares {} nodes, file has {} values",
            graph.n_nodes(),
            values.len()
        );
    }
    Ok((graph, values))
}

/// Parses a sparse graph file with lines `n <count>`, `w <i> <float>` and
/// `e <i> <j>`. Every node must receive exactly one weight.
pub fn read_sparse_graph(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    let mut n_nodes: Option<usize> = None;
    let mut weights: Vec<Option<f64>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();

    for (line_no, line) in text.lines().enumerate() {
        let mut tokens = line.split_whitespace();
        let Some(tag) = tokens.next() else { continue };
        let ctx = || format!("line {}", line_no + 1);
        match tag {
            "n" => {
                if n_nodes.is_some() {
                    bail!("{}: duplicate node count", ctx());
                }
                let count: usize = tokens
                    .next()
                    .ok_or_else(|| anyhow!("{}: missing node count", ctx()))?
                    .parse()
                    .with_context(ctx)?;
                n_nodes = Some(count);
                weights = vec![None; count];
            }
            "w" => {
                let n = n_nodes.ok_or_else(|| anyhow!("{}: `w` before `n`", ctx()))?;
                let i: usize = parse_token(&mut tokens, &ctx)?;
                let w: f64 = parse_token(&mut tokens, &ctx)?;
                if i >= n {
                    bail!("{}: node {i} out of range", ctx());
                }
                if weights[i].replace(w).is_some() {
                    bail!("{}: duplicate weight for node {i}", ctx());
                }
            }
            "e" => {
                if n_nodes.is_none() {
                    bail!("{}: `e` before `n`", ctx());
                }
                let i: usize = parse_token(&mut tokens, &ctx)?;
                let j: usize = parse_token(&mut tokens, &ctx)?;
                edges.push((i, j));
            }
            other => bail!("{}: unknown line tag `{other}`", ctx()),
        }
    }

    let n = n_nodes.ok_or_else(|| anyhow!("missing `n <count>` line"))?;
    let w: Vec<f64> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| w.ok_or_else(|| anyhow!("missing weight for node {i}")))
        .collect::<Result<_>>()?;
    let graph = build_sparse(n, &edges).map_err(|e| anyhow!("{e}"))?;
    Ok(Instance {
        graph,
        weights: NodeWeights::new(w).map_err(|e| anyhow!("{e}"))?,
        root: None,
        ground_truth: None,
    })
}

fn parse_token<T: std::str::FromStr>(
    tokens: &mut std::str::SplitWhitespace,
    ctx: &dyn Fn() -> String,
) -> Result<T>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    tokens
        .next()
        .ok_or_else(|| anyhow!("{}: missing token", ctx()))?
        .parse::<T>()
        .with_context(ctx)
}

/// Reads an instance, dispatching on the header tag of the first line.
pub fn read_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading instance {}", path.display()))?;
    match text.split_whitespace().next() {
        Some("grid") => read_grid_probabilities(path),
        Some("n") => read_sparse_graph(path),
        _ => bail!(
            "{}: unrecognized instance format (expected `grid` or `n` header)",
            path.display()
        ),
    }
}

/// Renders a labeling in the grid mask format when the graph carries grid
/// metadata, or as a node list otherwise.
pub fn render_solution(graph: &Graph, x: &Assignment) -> String {
    let mut out = String::new();
    if let Some(meta) = graph.grid_meta() {
        write!(out, "grid {}", meta.extents.len()).unwrap();
        for e in &meta.extents {
            write!(out, " {e}").unwrap();
        }
        out.push('\n');
        let row_len = *meta.extents.last().unwrap();
        for chunk_start in (0..x.len()).step_by(row_len) {
            for offset in 0..row_len {
                if offset > 0 {
                    out.push(' ');
                }
                out.push(if x.is_active(chunk_start + offset) {
                    '1'
                } else {
                    '0'
                });
            }
            out.push('\n');
        }
    } else {
        writeln!(out, "nodes {}", x.len()).unwrap();
        for i in x.active_nodes() {
            writeln!(out, "{i}").unwrap();
        }
    }
    out
}

pub fn write_solution(path: &Path, graph: &Graph, x: &Assignment) -> Result<()> {
    std::fs::write(path, render_solution(graph, x))
        .with_context(|| format!("writing solution {}", path.display()))
}

/// Reads a labeling from either solution format and checks its length.
pub fn read_labeling(path: &Path, expected_len: usize) -> Result<Assignment> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading labeling {}", path.display()))?;
    let assignment = match text.split_whitespace().next() {
        Some("grid") => {
            let (_, values) = parse_grid_values(&text)?;
            let labels = values
                .iter()
                .map(|&v| {
                    if v == 0.0 {
                        Ok(false)
                    } else if v == 1.0 {
                        Ok(true)
                    } else {
                        Err(anyhow!("mask value {v} is neither 0 nor 1"))
                    }
                })
                .collect::<Result<Vec<bool>>>()?;
            Assignment::from_labels(labels)
        }
        Some("nodes") => {
            let mut tokens = text.split_whitespace().skip(1);
            let n: usize = tokens
                .next()
                .ok_or_else(|| anyhow!("missing node count"))?
                .parse()
                .context("node count")?;
            let mut labels = vec![false; n];
            for t in tokens {
                let i: usize = t.parse().with_context(|| format!("bad node index `{t}`"))?;
                if i >= n {
                    bail!("node index {i} out of range");
                }
                labels[i] = true;
            }
            Assignment::from_labels(labels)
        }
        _ => bail!("unrecognized labeling format"),
    };
    if assignment.len() != expected_len {
        bail!(
            "labeling length {} does not match instance size {expected_len}",
            assignment.len()
        );
    }
    Ok(assignment)
}

/// Reproducible synthetic probability map: uniform noise in (-1, 1), box
/// filtered `radius` times over the grid neighborhood, then squashed into the
/// open unit interval by a logistic.
pub fn gen_random(extents: &[usize], radius: usize, seed: u64) -> Result<(Graph, Vec<f64>)> {
    let graph =
        build_grid(extents, connectivity_for(extents.len())?).map_err(|e| anyhow!("{e}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..graph.n_nodes())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    for _ in 0..radius {
        let smoothed: Vec<f64> = (0..graph.n_nodes())
            .map(|i| {
                let mut sum = values[i];
                for &nb in graph.neighbors(i) {
                    sum += values[nb];
                }
                sum / (graph.neighbors(i).len() + 1) as f64
            })
            .collect();
        values = smoothed;
    }
    let probabilities = values
        .iter()
        .map(|&v| 1.0 / (1.0 + (-4.0 * v).exp()))
        .collect();
    Ok((graph, probabilities))
}

/// Renders a probability map in the grid format at 17 significant digits, so
/// a read/write cycle is the identity within printed precision.
pub fn render_probabilities(graph: &Graph, values: &[f64]) -> String {
    let meta = graph.grid_meta().expect("probability maps are grids");
    let mut out = String::new();
    write!(out, "grid {}", meta.extents.len()).unwrap();
    for e in &meta.extents {
        write!(out, " {e}").unwrap();
    }
    out.push('\n');
    let row_len = *meta.extents.last().unwrap();
    for chunk in values.chunks(row_len) {
        let row: Vec<String> = chunk.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_2d_grid_file() {
        let f = write_temp("grid 2 2 3\n0.1 0.2 0.3\n0.4 0.5 0.6\n");
        let inst = read_grid_probabilities(f.path()).unwrap();
        assert_eq!(inst.graph.n_nodes(), 6);
        assert_eq!(inst.graph.grid_meta().unwrap().extents, vec![2, 3]);
        assert!(inst.weights.get(4) == 0.0); // p = 0.5
    }

    #[test]
    fn reads_3d_grid_file() {
        let f = write_temp("grid 3 2 2 2\n0.5 0.5 0.5 0.5 0.5 0.5 0.5 0.5\n");
        let inst = read_grid_probabilities(f.path()).unwrap();
        assert_eq!(inst.graph.n_nodes(), 8);
        assert_eq!(inst.graph.edge_count(), 12);
    }

    #[test]
    fn rejects_out_of_range_probability() {
        let f = write_temp("grid 2 1 2\n0.5 1.5\n");
        let err = read_grid_probabilities(f.path()).unwrap_err();
        assert!(err.to_string().contains("outside"), "{err}");
    }

    #[test]
    fn rejects_value_count_mismatch() {
        let f = write_temp("grid 2 2 2\n0.5 0.5 0.5\n");
        let err = read_grid_probabilities(f.path()).unwrap_err();
        assert!(err.to_string().contains("mismatch"), "{err}");
    }

    #[test]
    fn rejects_malformed_header() {
        let f = write_temp("grind 2 2 2\n");
        assert!(read_instance(f.path()).is_err());
        let f = write_temp("grid 2 2\n0.5 0.5\n");
        assert!(read_grid_probabilities(f.path()).is_err());
    }

    #[test]
    fn reads_minimal_sparse_file() {
        let f = write_temp("n 1\nw 0 -2.5\n");
        let inst = read_sparse_graph(f.path()).unwrap();
        assert_eq!(inst.graph.n_nodes(), 1);
        assert_eq!(inst.weights.get(0), -2.5);
    }

    #[test]
    fn sparse_round_trips_path5() {
        let content =
            "n 5\nw 0 -1.0\nw 1 0.4\nw 2 -1.0\nw 3 0.7\nw 4 -2.0\ne 0 1\ne 1 2\ne 2 3\ne 3 4\n";
        let f = write_temp(content);
        let inst = read_sparse_graph(f.path()).unwrap();
        assert_eq!(inst.graph.n_nodes(), 5);
        assert_eq!(inst.graph.edge_count(), 4);
        assert_eq!(inst.weights.values(), &[-1.0, 0.4, -1.0, 0.7, -2.0]);
    }

    #[test]
    fn sparse_missing_weight_is_an_error() {
        let f = write_temp("n 2\nw 0 1.0\ne 0 1\n");
        let err = read_sparse_graph(f.path()).unwrap_err();
        assert!(
            err.to_string().contains("missing weight for node 1"),
            "{err}"
        );
    }

    #[test]
    fn grid_mask_round_trips() {
        let graph = build_grid(&[2, 3], Connectivity::Four).unwrap();
        let x = Assignment::from_active(6, &[0, 2, 5]);
        let rendered = render_solution(&graph, &x);
        let f = write_temp(&rendered);
        let back = read_labeling(f.path(), 6).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn node_list_round_trips_including_empty() {
        let graph = build_sparse(4, &[(0, 1)]).unwrap();
        for active in [vec![], vec![1usize, 3]] {
            let x = Assignment::from_active(4, &active);
            let f = write_temp(&render_solution(&graph, &x));
            assert_eq!(read_labeling(f.path(), 4).unwrap(), x);
        }
    }

    #[test]
    fn probability_render_round_trips_at_full_precision() {
        let (graph, probs) = gen_random(&[3, 3], 2, 9).unwrap();
        let f = write_temp(&render_probabilities(&graph, &probs));
        let inst = read_grid_probabilities(f.path()).unwrap();
        let direct = NodeWeights::from_probabilities(&probs, DEFAULT_PROB_CLAMP).unwrap();
        for i in 0..9 {
            assert_eq!(inst.weights.get(i), direct.get(i));
        }
    }

    #[test]
    fn gen_is_reproducible_and_in_open_interval() {
        let (ga, a) = gen_random(&[4, 4], 1, 123).unwrap();
        let (_, b) = gen_random(&[4, 4], 1, 123).unwrap();
        let (_, c) = gen_random(&[4, 4], 1, 124).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(ga.n_nodes(), 16);
        assert!(a.iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn gen_radius_zero_is_pure_noise() {
        let (_, smooth) = gen_random(&[6, 6], 3, 5).unwrap();
        let (_, rough) = gen_random(&[6, 6], 0, 5).unwrap();
        let var = |v: &[f64]| {
            let m: f64 = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
        };
        assert!(var(&rough) > var(&smooth));
    }
}
