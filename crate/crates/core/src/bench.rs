//! Connected graph generators and wall-clock scaling runs for the sampler.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::graph::WeightedGraph;
use crate::sampler::TreeSamplerState;
use crate::walk::{chain_rng, WalkConfig, WalkError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFamily {
    /// Union of two independent random Hamiltonian cycles: 4-regular,
    /// connected, possibly with parallel edges, `2|V|` edges.
    RandomRegular,
    /// Rectangular grid as close to square as the edge budget allows.
    Grid,
}

impl FromStr for GraphFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random-regular" => Ok(GraphFamily::RandomRegular),
            "grid" => Ok(GraphFamily::Grid),
            other => Err(format!("unknown graph family {other:?} (expected random-regular or grid)")),
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFamily::RandomRegular => "random-regular",
            GraphFamily::Grid => "grid",
        })
    }
}

/// Builds a unit-weight graph from `family` with about `target_edges` edges.
pub fn generate<R: Rng + ?Sized>(family: GraphFamily, target_edges: usize, rng: &mut R) -> WeightedGraph {
    match family {
        GraphFamily::RandomRegular => random_regular(target_edges, rng),
        GraphFamily::Grid => grid(target_edges),
    }
}

fn random_regular<R: Rng + ?Sized>(target_edges: usize, rng: &mut R) -> WeightedGraph {
    let n = (target_edges / 2).max(3);
    let mut pairs = Vec::with_capacity(2 * n);
    for _ in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for i in 0..n {
            pairs.push((order[i], order[(i + 1) % n]));
        }
    }
    WeightedGraph::unweighted(n, &pairs).expect("Hamiltonian cycles are connected and loop-free")
}

fn grid(target_edges: usize) -> WeightedGraph {
    // An r × c grid has 2rc − r − c edges.
    let rows = ((target_edges as f64 / 2.0).sqrt().floor() as usize).max(2);
    let mut cols = rows;
    while 2 * rows * cols - rows - cols < target_edges {
        cols += 1;
    }
    let at = |r: usize, c: usize| r * cols + c;
    let mut pairs = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                pairs.push((at(r, c), at(r, c + 1)));
            }
            if r + 1 < rows {
                pairs.push((at(r, c), at(r + 1, c)));
            }
        }
    }
    WeightedGraph::unweighted(rows * cols, &pairs).expect("grids are connected")
}

const WALK_STREAM_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n_edges: usize,
    pub n_vertices: usize,
    pub steps: usize,
    pub wall_seconds: f64,
    pub seconds_per_step: f64,
}

/// Times one full sampler run (initial tree included) per size. Graphs and
/// walks draw from separate seeded streams, so a fixed seed reproduces both.
pub fn run_bench(
    sizes: &[usize],
    family: GraphFamily,
    config: &WalkConfig,
) -> Result<Vec<BenchRow>, WalkError> {
    config.validate()?;
    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &size) in sizes.iter().enumerate() {
        let g = generate(family, size, &mut chain_rng(config.seed, i as u64));
        let steps = config.steps_for(g.cotree_size());
        let mut rng = chain_rng(config.seed ^ WALK_STREAM_SALT, i as u64);

        let start = Instant::now();
        let mut state = TreeSamplerState::new(&g);
        for _ in 0..steps {
            state.step(&g, &mut rng);
        }
        let tree = state.tree_edges();
        let wall_seconds = start.elapsed().as_secs_f64();

        debug_assert!(g.is_spanning_tree(tree.edge_ids()));
        rows.push(BenchRow {
            n_edges: g.edge_count(),
            n_vertices: g.vertex_count(),
            steps,
            wall_seconds,
            seconds_per_step: if steps == 0 { 0.0 } else { wall_seconds / steps as f64 },
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_regular_shape() {
        let g = generate(GraphFamily::RandomRegular, 1000, &mut chain_rng(1, 0));
        assert_eq!(g.vertex_count(), 500);
        assert_eq!(g.edge_count(), 1000);
        let mut degree = vec![0; g.vertex_count()];
        for e in g.edges() {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        assert!(degree.iter().all(|&d| d == 4));
    }

    #[test]
    fn generation_is_seeded() {
        let a = generate(GraphFamily::RandomRegular, 200, &mut chain_rng(7, 3));
        let b = generate(GraphFamily::RandomRegular, 200, &mut chain_rng(7, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn grid_meets_edge_budget() {
        let g = generate(GraphFamily::Grid, 1000, &mut chain_rng(0, 0));
        assert!(g.edge_count() >= 1000 && g.edge_count() < 1100, "{}", g.edge_count());
        assert_eq!("grid".parse::<GraphFamily>(), Ok(GraphFamily::Grid));
        assert!("torus".parse::<GraphFamily>().is_err());
    }

    #[test]
    fn bench_rows() {
        let config = WalkConfig { epsilon: 0.1, ..WalkConfig::default() };
        let rows = run_bench(&[400], GraphFamily::RandomRegular, &config).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].n_edges, 400);
        assert_eq!(rows[0].steps, config.steps_for(201));
    }
}
