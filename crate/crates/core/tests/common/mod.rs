//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use downup::WeightedGraph;

/// The triangle with edge weights 1, 2, 3 on edges 0-1, 1-2, 0-2.
pub fn weighted_triangle() -> WeightedGraph {
    WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap()
}

/// Adjacency-list forest answering every query by graph search.
#[derive(Debug, Clone, Default)]
pub struct NaiveForest {
    adjacency: Vec<Vec<(usize, usize)>>,
    edges: HashMap<usize, (usize, usize, f64)>,
}

impl NaiveForest {
    pub fn new(vertex_count: usize) -> Self {
        NaiveForest {
            adjacency: vec![Vec::new(); vertex_count],
            edges: HashMap::new(),
        }
    }

    pub fn edge_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.edges.keys().copied().collect();
        ids.sort_unstable();
        ids
    }

    pub fn link(&mut self, u: usize, v: usize, id: usize, weight: f64) -> bool {
        if u == v || self.edges.contains_key(&id) || self.connected(u, v) {
            return false;
        }
        self.adjacency[u].push((v, id));
        self.adjacency[v].push((u, id));
        self.edges.insert(id, (u, v, weight));
        true
    }

    pub fn cut(&mut self, id: usize) -> bool {
        let Some((u, v, _)) = self.edges.remove(&id) else {
            return false;
        };
        self.adjacency[u].retain(|&(_, e)| e != id);
        self.adjacency[v].retain(|&(_, e)| e != id);
        true
    }

    /// Edge ids along the path from `u` to `v`, in order from `u`.
    pub fn path(&self, u: usize, v: usize) -> Option<Vec<usize>> {
        let mut via = vec![None; self.adjacency.len()];
        let mut seen = vec![false; self.adjacency.len()];
        let mut stack = vec![u];
        seen[u] = true;
        while let Some(x) = stack.pop() {
            if x == v {
                break;
            }
            for &(y, id) in &self.adjacency[x] {
                if !seen[y] {
                    seen[y] = true;
                    via[y] = Some((x, id));
                    stack.push(y);
                }
            }
        }
        if !seen[v] {
            return None;
        }
        let mut path = Vec::new();
        let mut x = v;
        while let Some((prev, id)) = via[x] {
            path.push(id);
            x = prev;
        }
        path.reverse();
        Some(path)
    }

    pub fn connected(&self, u: usize, v: usize) -> bool {
        self.path(u, v).is_some()
    }

    pub fn path_sum(&self, u: usize, v: usize) -> Option<f64> {
        self.path(u, v)
            .map(|p| p.iter().map(|id| 1.0 / self.edges[id].2).sum())
    }

    /// Edge whose half-open prefix interval of the normalized path sum holds `r`.
    pub fn select(&self, u: usize, v: usize, r: f64) -> Option<usize> {
        let path = self.path(u, v)?;
        let inverse: Vec<f64> = path.iter().map(|id| 1.0 / self.edges[id].2).collect();
        let total: f64 = inverse.iter().sum();
        let mut target = r * total;
        for (&id, &x) in path.iter().zip(&inverse) {
            if target < x {
                return Some(id);
            }
            target -= x;
        }
        path.last().copied()
    }
}

/// Runs `ops` random link/cut/connected/path-sum/select operations on both
/// forests and reports the first disagreement. Sums must agree to `1e-9`
/// relative error; everything else exactly.
pub fn compare_with_naive(seed: u64, vertex_count: usize, ops: usize) -> Result<(), String> {
    use downup::walk::chain_rng;
    use downup::DynamicForest;
    use rand::Rng;

    let mut rng = chain_rng(seed, 0);
    let mut fast = DynamicForest::new(vertex_count);
    let mut slow = NaiveForest::new(vertex_count);
    let mut next_id = 0usize;
    for op in 0..ops {
        let u = rng.random_range(0..vertex_count);
        let v = rng.random_range(0..vertex_count);
        let fail = |what: String| Err(format!("op {op}: {what}"));
        match rng.random_range(0..10) {
            // Links dominate so that long paths form.
            0..=3 => {
                let w = rng.random_range(0.1..10.0);
                let expected = slow.link(u, v, next_id, w);
                let got = fast.link(u, v, next_id, w).is_ok();
                if got != expected {
                    return fail(format!("link({u}, {v}) returned {got}, oracle {expected}"));
                }
                next_id += 1;
            }
            4 => {
                let ids = slow.edge_ids();
                if ids.is_empty() {
                    continue;
                }
                let id = ids[rng.random_range(0..ids.len())];
                slow.cut(id);
                if let Err(e) = fast.cut(id) {
                    return fail(format!("cut({id}) failed: {e}"));
                }
            }
            5 => {
                let got = fast.connected(u, v).unwrap();
                if got != slow.connected(u, v) {
                    return fail(format!("connected({u}, {v}) = {got}"));
                }
            }
            6 | 7 => match (slow.path_sum(u, v), fast.path_inverse_weight_sum(u, v)) {
                (None, Err(_)) => {}
                (Some(a), Ok(b)) => {
                    if (a - b).abs() > 1e-9 * a.abs().max(f64::MIN_POSITIVE) {
                        return fail(format!("path sum({u}, {v}) = {b}, oracle {a}"));
                    }
                }
                (a, b) => return fail(format!("path sum({u}, {v}) = {b:?}, oracle {a:?}")),
            },
            _ => {
                let r: f64 = rng.random();
                let expected = if u == v { None } else { slow.select(u, v, r) };
                let got = fast.select_path_edge(u, v, r).ok();
                if got != expected {
                    return fail(format!("select({u}, {v}, {r}) = {got:?}, oracle {expected:?}"));
                }
            }
        }
        if op % 1000 == 0 && fast.edge_ids() != slow.edge_ids() {
            return fail("edge sets diverged".into());
        }
    }
    if fast.edge_ids() != slow.edge_ids() {
        return Err("edge sets diverged at the end".into());
    }
    Ok(())
}
