//! Weighted spanning-tree sampling by the down-up walk on tree complements.
//!
//! The walk state is the set of non-tree edges. A step adds a uniformly
//! random non-tree edge `e = (u, v)` to the tree, then removes one edge `f`
//! from the cycle it closes with probability proportional to `1/w_f`. The
//! cycle is `e` plus the tree path `u → v`, so both the normalizer and the
//! selection come from link-cut path aggregates. Choosing `f = e` leaves the
//! tree unchanged.
//!
//! After `C·k·(ln k + ln 1/ε)` steps, with `k = |E| − |V| + 1`, the tree is
//! within `ε` total variation of `Pr[T] ∝ Π_{e∈T} w_e`.

use std::collections::HashMap;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{EdgeId, GraphError, TreeEdgeSet, WeightedGraph};
use crate::linkcut::DynamicForest;
use crate::walk::{chain_rng, WalkConfig, WalkError};

const IN_TREE: usize = usize::MAX;

/// Graphs up to this many edges get a full structural check after every
/// step in debug builds.
const DENSE_CHECK_EDGE_LIMIT: usize = 64;

/// The current spanning tree and the indexed list of edges outside it.
#[derive(Debug, Clone)]
pub struct TreeSamplerState {
    forest: DynamicForest,
    non_tree: Vec<EdgeId>,
    /// Index into `non_tree`, or `IN_TREE`.
    position: Vec<usize>,
}

/// What a single walk step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// The added edge was removed again.
    Stay,
    Swap { added: EdgeId, removed: EdgeId },
}

impl TreeSamplerState {
    /// Starts from a depth-first-search tree rooted at vertex 0.
    pub fn new(g: &WeightedGraph) -> Self {
        let adjacency = g.adjacency();
        let mut visited = vec![false; g.vertex_count()];
        let mut in_tree = vec![false; g.edge_count()];
        let mut forest = DynamicForest::with_edge_capacity(g.vertex_count(), g.edge_count());

        let mut stack = vec![(0usize, 0usize)];
        visited[0] = true;
        while let Some((x, cursor)) = stack.last_mut() {
            let x = *x;
            if let Some(&(y, id)) = adjacency[x].get(*cursor) {
                *cursor += 1;
                if !visited[y] {
                    visited[y] = true;
                    in_tree[id] = true;
                    forest.link_unchecked(x, y, id, g.edge(id).weight);
                    stack.push((y, 0));
                }
            } else {
                stack.pop();
            }
        }

        let mut non_tree = Vec::with_capacity(g.cotree_size());
        let mut position = vec![IN_TREE; g.edge_count()];
        for id in (0..g.edge_count()).filter(|&id| !in_tree[id]) {
            position[id] = non_tree.len();
            non_tree.push(id);
        }
        TreeSamplerState {
            forest,
            non_tree,
            position,
        }
    }

    /// Starts from a given spanning tree.
    pub fn from_tree(g: &WeightedGraph, tree: &TreeEdgeSet) -> Result<Self, GraphError> {
        if !g.is_spanning_tree(tree.edge_ids()) {
            return Err(GraphError::NotSpanningTree(tree.edge_ids().to_vec()));
        }
        let mut forest = DynamicForest::with_edge_capacity(g.vertex_count(), g.edge_count());
        let mut position = vec![0; g.edge_count()];
        for &id in tree.edge_ids() {
            let e = g.edge(id);
            forest.link_unchecked(e.u, e.v, id, e.weight);
            position[id] = IN_TREE;
        }
        let mut non_tree = Vec::with_capacity(g.cotree_size());
        for id in 0..g.edge_count() {
            if position[id] != IN_TREE {
                position[id] = non_tree.len();
                non_tree.push(id);
            }
        }
        Ok(TreeSamplerState {
            forest,
            non_tree,
            position,
        })
    }

    /// Edges outside the tree, in internal (swap-remove) order.
    pub fn non_tree(&self) -> &[EdgeId] {
        &self.non_tree
    }

    pub fn in_tree(&self, id: EdgeId) -> bool {
        self.position[id] == IN_TREE
    }

    pub fn tree_edges(&self) -> TreeEdgeSet {
        TreeEdgeSet::new(
            (0..self.position.len())
                .filter(|&id| self.position[id] == IN_TREE)
                .collect(),
        )
    }

    pub fn forest(&self) -> &DynamicForest {
        &self.forest
    }

    /// One down-up step on the complement; a no-op when the graph is a tree.
    pub fn step<R: Rng + ?Sized>(&mut self, g: &WeightedGraph, rng: &mut R) -> StepOutcome {
        if self.non_tree.is_empty() {
            return StepOutcome::Stay;
        }
        let slot = rng.random_range(0..self.non_tree.len());
        let added = self.non_tree[slot];
        let edge = g.edge(added);
        let r: f64 = rng.random();
        let outcome = match self.forest.select_with_outside(edge.u, edge.v, 1.0 / edge.weight, r) {
            None => StepOutcome::Stay,
            Some(removed) => {
                self.forest.swap_selected(edge.u, edge.v, removed, added, edge.weight);
                self.non_tree[slot] = removed;
                self.position[removed] = slot;
                self.position[added] = IN_TREE;
                StepOutcome::Swap { added, removed }
            }
        };
        if cfg!(debug_assertions) && g.edge_count() <= DENSE_CHECK_EDGE_LIMIT {
            if let Err(problem) = self.check(g) {
                panic!("sampler state corrupted after {outcome:?}: {problem}");
            }
        }
        outcome
    }

    /// Verifies the partition and spanning-tree invariants in `O(|E|)`.
    pub fn check(&self, g: &WeightedGraph) -> Result<(), String> {
        if self.non_tree.len() != g.cotree_size() {
            return Err(format!(
                "{} non-tree edges, expected {}",
                self.non_tree.len(),
                g.cotree_size()
            ));
        }
        for (slot, &id) in self.non_tree.iter().enumerate() {
            if self.position[id] != slot {
                return Err(format!("edge {id} indexed at {} but stored at {slot}", self.position[id]));
            }
            if self.forest.contains_edge(id) {
                return Err(format!("non-tree edge {id} is in the forest"));
            }
        }
        let tree = self.tree_edges();
        if tree.edge_ids() != self.forest.edge_ids().as_slice() {
            return Err("forest edges differ from the tree partition".into());
        }
        if !g.is_spanning_tree(tree.edge_ids()) {
            return Err(format!("{:?} is not a spanning tree", tree.edge_ids()));
        }
        Ok(())
    }
}

pub fn init_state(g: &WeightedGraph) -> TreeSamplerState {
    TreeSamplerState::new(g)
}

pub fn cographic_step<R: Rng + ?Sized>(state: &mut TreeSamplerState, g: &WeightedGraph, rng: &mut R) -> StepOutcome {
    state.step(g, rng)
}

/// Runs the scheduled walk from the DFS tree and returns the final tree.
pub fn sample_tree<R: Rng + ?Sized>(g: &WeightedGraph, config: &WalkConfig, rng: &mut R) -> Result<TreeEdgeSet, WalkError> {
    config.validate()?;
    let mut state = TreeSamplerState::new(g);
    let steps = config.steps_for(g.cotree_size());
    if g.cotree_size() > 0 {
        for _ in 0..steps {
            state.step(g, rng);
        }
    }
    debug_assert_eq!(state.check(g), Ok(()));
    Ok(state.tree_edges())
}

/// `count` independent chains; chain `i` draws from `chain_rng(config.seed, i)`.
pub fn sample_many(g: &WeightedGraph, config: &WalkConfig, count: usize) -> Result<Vec<TreeEdgeSet>, WalkError> {
    (0..count)
        .map(|i| sample_tree(g, config, &mut chain_rng(config.seed, i as u64)))
        .collect()
}

/// [`sample_many`] spread over `jobs` threads; output order and content are
/// identical to the sequential version.
pub fn sample_many_parallel(
    g: &WeightedGraph,
    config: &WalkConfig,
    count: usize,
    jobs: usize,
) -> Result<Vec<TreeEdgeSet>, WalkError> {
    if jobs <= 1 {
        return sample_many(g, config, count);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| WalkError::InvalidConfig(format!("cannot start {jobs} threads: {e}")))?;
    pool.install(|| {
        (0..count)
            .into_par_iter()
            .map(|i| sample_tree(g, config, &mut chain_rng(config.seed, i as u64)))
            .collect()
    })
}

/// Empirical check of sampled trees against the enumerated distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub exact_support: usize,
    pub samples: usize,
    pub empirical_tv: f64,
    /// `½ Σ_T √(p_T (1 − p_T) / N)`, the summed per-tree sampling error.
    pub stderr: f64,
    pub epsilon: f64,
    pub pass: bool,
}

/// Compares tree frequencies with the exact `Pr[T] ∝ Π w_e`; passes when the
/// TV distance is at most `ε + 3·stderr`.
pub fn verify_samples(g: &WeightedGraph, trees: &[TreeEdgeSet], epsilon: f64) -> Result<VerifyReport, GraphError> {
    let exact = g.enumerate_spanning_trees()?;
    let total: f64 = exact.iter().map(|(_, w)| w).sum();
    let index: HashMap<&TreeEdgeSet, usize> = exact.iter().enumerate().map(|(i, (t, _))| (t, i)).collect();
    let mut counts = vec![0usize; exact.len()];
    let mut stray = 0usize;
    for t in trees {
        match index.get(t) {
            Some(&i) => counts[i] += 1,
            None => stray += 1,
        }
    }
    let n = trees.len().max(1) as f64;
    let mut l1 = stray as f64 / n;
    let mut stderr = 0.0;
    for ((_, w), &c) in exact.iter().zip(&counts) {
        let p = w / total;
        l1 += (c as f64 / n - p).abs();
        stderr += (p * (1.0 - p) / n).sqrt();
    }
    let empirical_tv = 0.5 * l1;
    let stderr = 0.5 * stderr;
    Ok(VerifyReport {
        exact_support: exact.len(),
        samples: trees.len(),
        empirical_tv,
        stderr,
        epsilon,
        pass: empirical_tv <= epsilon + 3.0 * stderr,
    })
}
