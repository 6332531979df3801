//! Weighted multigraphs, the edge-list text format, and exact spanning-tree
//! oracles.
//!
//! A [`WeightedGraph`] is always connected, loop-free, and carries strictly
//! positive finite weights. Parallel edges are allowed and are told apart by
//! edge id, which is the edge's position in the edge list.
//!
//! The edge-list format is a header line `<vertex_count> <edge_count>`
//! followed by one `u v [w]` line per edge. Vertices are 0-based, a missing
//! weight means `1.0`, and lines starting with `#` are comments.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::unionfind::{DisjointSets, RollbackSets};

pub type Vertex = usize;
pub type EdgeId = usize;

/// Largest edge count [`WeightedGraph::enumerate_spanning_trees`] accepts.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: EdgeId, vertex: Vertex },
    #[error("edge {edge} has non-positive or non-finite weight {weight}")]
    NonPositiveWeight { edge: EdgeId, weight: f64 },
    #[error("edge {edge} references vertex {vertex}, but the graph has {vertex_count} vertices")]
    VertexOutOfRange {
        edge: EdgeId,
        vertex: Vertex,
        vertex_count: usize,
    },
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("graph must have at least one vertex")]
    NoVertices,
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("edges {0:?} do not form a spanning tree")]
    NotSpanningTree(Vec<EdgeId>),
    #[error("enumeration cap exceeded: {edges} edges > cap {cap}")]
    EnumerationCap { edges: usize, cap: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: Vertex,
    pub v: Vertex,
    pub weight: f64,
}

impl Edge {
    /// The endpoint opposite `x`.
    pub fn other(&self, x: Vertex) -> Vertex {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// A connected, loop-free multigraph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

/// A set of edge ids, kept ascending. Values produced by the sampler and the
/// enumerator always form a spanning tree of their graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeEdgeSet(Vec<EdgeId>);

impl TreeEdgeSet {
    pub fn new(mut ids: Vec<EdgeId>) -> Self {
        ids.sort_unstable();
        TreeEdgeSet(ids)
    }

    pub fn edge_ids(&self) -> &[EdgeId] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<EdgeId> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl WeightedGraph {
    /// Builds and validates a graph from `(u, v, weight)` triples; edge ids are
    /// assigned in iteration order.
    pub fn new<I>(vertex_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (Vertex, Vertex, f64)>,
    {
        if vertex_count == 0 {
            return Err(GraphError::NoVertices);
        }
        let mut list = Vec::new();
        for (id, (u, v, weight)) in edges.into_iter().enumerate() {
            for x in [u, v] {
                if x >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        edge: id,
                        vertex: x,
                        vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { edge: id, vertex: u });
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(GraphError::NonPositiveWeight { edge: id, weight });
            }
            list.push(Edge { id, u, v, weight });
        }
        let mut sets = DisjointSets::new(vertex_count);
        for e in &list {
            sets.union(e.u, e.v);
        }
        if sets.components() != 1 {
            return Err(GraphError::Disconnected {
                components: sets.components(),
            });
        }
        Ok(WeightedGraph {
            vertex_count,
            edges: list,
        })
    }

    /// Unit-weight graph from endpoint pairs.
    pub fn unweighted(vertex_count: usize, pairs: &[(Vertex, Vertex)]) -> Result<Self, GraphError> {
        Self::new(vertex_count, pairs.iter().map(|&(u, v)| (u, v, 1.0)))
    }

    /// Complete graph on `n` vertices with unit weights, edges in
    /// lexicographic `(u, v)` order.
    pub fn complete(n: usize) -> Result<Self, GraphError> {
        let pairs: Vec<_> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .collect();
        Self::unweighted(n, &pairs)
    }

    /// Cycle `0-1-…-(n-1)-0` with unit weights.
    pub fn cycle(n: usize) -> Result<Self, GraphError> {
        let pairs: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
        Self::unweighted(n, &pairs)
    }

    /// Parses the edge-list format described in the module docs.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (header_line, header) = lines.next().ok_or(GraphError::Malformed {
            line: 1,
            reason: "missing header \"<vertex_count> <edge_count>\"".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(GraphError::Malformed {
                line: header_line,
                reason: format!("header needs 2 fields, found {}", fields.len()),
            });
        }
        let vertex_count = parse_field::<usize>(fields[0], header_line, "vertex count")?;
        let declared = parse_field::<usize>(fields[1], header_line, "edge count")?;

        let mut triples = Vec::with_capacity(declared);
        for (line, content) in lines {
            let fields: Vec<&str> = content.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(GraphError::Malformed {
                    line,
                    reason: format!("expected \"u v [w]\", found {} fields", fields.len()),
                });
            }
            let u = parse_field::<usize>(fields[0], line, "vertex")?;
            let v = parse_field::<usize>(fields[1], line, "vertex")?;
            let w = match fields.get(2) {
                Some(f) => parse_field::<f64>(f, line, "weight")?,
                None => 1.0,
            };
            triples.push((u, v, w));
        }
        if triples.len() != declared {
            return Err(GraphError::EdgeCountMismatch {
                declared,
                found: triples.len(),
            });
        }
        Self::new(vertex_count, triples)
    }

    /// Serializes to the edge-list format; weights use Rust's shortest
    /// round-trip float formatting, so `parse` recovers them exactly.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.vertex_count, self.edges.len());
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {:?}", e.u, e.v, e.weight);
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Size of a spanning tree, `|V| - 1`.
    pub fn tree_size(&self) -> usize {
        self.vertex_count - 1
    }

    /// Number of edges outside any spanning tree, `|E| - |V| + 1`.
    pub fn cotree_size(&self) -> usize {
        self.edges.len() + 1 - self.vertex_count
    }

    /// Adjacency lists of `(neighbor, edge id)`.
    pub fn adjacency(&self) -> Vec<Vec<(Vertex, EdgeId)>> {
        let mut adj = vec![Vec::new(); self.vertex_count];
        for e in &self.edges {
            adj[e.u].push((e.v, e.id));
            adj[e.v].push((e.u, e.id));
        }
        adj
    }

    /// Product of the weights of `ids`.
    pub fn weight_product(&self, ids: &[EdgeId]) -> f64 {
        ids.iter().map(|&e| self.edges[e].weight).product()
    }

    /// `Σ_T Π_{e∈T} w_e` over all spanning trees, via the determinant of the
    /// Laplacian with the last row and column removed.
    pub fn weighted_tree_total(&self) -> f64 {
        let m = self.vertex_count - 1;
        if m == 0 {
            return 1.0;
        }
        let mut reduced = DMatrix::<f64>::zeros(m, m);
        for e in &self.edges {
            let (u, v, w) = (e.u, e.v, e.weight);
            if u < m {
                reduced[(u, u)] += w;
            }
            if v < m {
                reduced[(v, v)] += w;
            }
            if u < m && v < m {
                reduced[(u, v)] -= w;
                reduced[(v, u)] -= w;
            }
        }
        reduced.determinant()
    }

    /// Every spanning tree with its weight product, in lexicographic order of
    /// the sorted edge-id lists. Fails above [`DEFAULT_ENUMERATION_CAP`] edges.
    pub fn enumerate_spanning_trees(&self) -> Result<Vec<(TreeEdgeSet, f64)>, GraphError> {
        self.enumerate_spanning_trees_with_cap(DEFAULT_ENUMERATION_CAP)
    }

    pub fn enumerate_spanning_trees_with_cap(
        &self,
        cap: usize,
    ) -> Result<Vec<(TreeEdgeSet, f64)>, GraphError> {
        if self.edges.len() > cap {
            return Err(GraphError::EnumerationCap {
                edges: self.edges.len(),
                cap,
            });
        }
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(self.tree_size());
        let mut sets = RollbackSets::new(self.vertex_count);
        self.extend_forest(0, &mut chosen, &mut sets, &mut out);
        Ok(out)
    }

    // Include-before-exclude recursion keeps the output lexicographic.
    fn extend_forest(
        &self,
        next: EdgeId,
        chosen: &mut Vec<EdgeId>,
        sets: &mut RollbackSets,
        out: &mut Vec<(TreeEdgeSet, f64)>,
    ) {
        let need = self.tree_size() - chosen.len();
        if need == 0 {
            out.push((TreeEdgeSet(chosen.clone()), self.weight_product(chosen)));
            return;
        }
        if self.edges.len() - next < need {
            return;
        }
        let e = &self.edges[next];
        if sets.union(e.u, e.v) {
            chosen.push(next);
            self.extend_forest(next + 1, chosen, sets, out);
            chosen.pop();
            sets.undo();
        }
        self.extend_forest(next + 1, chosen, sets, out);
    }

    /// True iff `ids` has `|V| - 1` distinct valid edges connecting every
    /// vertex.
    pub fn is_spanning_tree(&self, ids: &[EdgeId]) -> bool {
        if ids.len() != self.tree_size() {
            return false;
        }
        let mut sets = DisjointSets::new(self.vertex_count);
        ids.iter().all(|&id| {
            id < self.edges.len() && sets.union(self.edges[id].u, self.edges[id].v)
        })
    }
}

impl FromStr for WeightedGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

impl fmt::Display for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_edge_list())
    }
}

fn parse_field<T: FromStr>(field: &str, line: usize, what: &str) -> Result<T, GraphError> {
    field.parse().map_err(|_| GraphError::Malformed {
        line,
        reason: format!("invalid {what} {field:?}"),
    })
}
