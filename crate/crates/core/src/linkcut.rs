//! Link-cut forest with inverse-weight path aggregates.
//!
//! Every edge is materialized as an internal node sitting between its two
//! endpoints, so a tree path `u → v` alternates vertex and edge nodes.
//! Vertex nodes carry 0 and edge nodes carry `1/w`; the aggregate of a
//! preferred-path splay tree is the inverse-weight sum of that path.
//!
//! Node `x < vertex_count` is vertex `x`; node `vertex_count + id` is the
//! edge with id `id`. Edge slots grow on demand, so ids should be dense.
//!
//! All operations run in amortized `O(log n)`. Reads splay too, hence every
//! method takes `&mut self`.

use thiserror::Error;

use crate::graph::{EdgeId, Vertex};

const NIL: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForestError {
    #[error("vertices {u} and {v} are already connected")]
    AlreadyConnected { u: Vertex, v: Vertex },
    #[error("vertices {u} and {v} are not connected")]
    NotConnected { u: Vertex, v: Vertex },
    #[error("edge id {0} is already present")]
    DuplicateEdge(EdgeId),
    #[error("edge id {0} is not present")]
    MissingEdge(EdgeId),
    #[error("vertex {vertex} out of range for {vertex_count} vertices")]
    VertexOutOfRange { vertex: Vertex, vertex_count: usize },
    #[error("an edge needs distinct endpoints, got {0} twice")]
    SelfLoop(Vertex),
    #[error("weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("path from {0} to itself has no edges")]
    EmptyPath(Vertex),
    #[error("selection fraction must lie in [0, 1), got {0}")]
    FractionOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestEdge {
    pub u: Vertex,
    pub v: Vertex,
    pub weight: f64,
}

#[derive(Debug, Clone)]
struct Node {
    child: [u32; 2],
    parent: u32,
    flip: bool,
    value: f64,
    sum: f64,
}

impl Node {
    const EMPTY: Node = Node {
        child: [NIL, NIL],
        parent: NIL,
        flip: false,
        value: 0.0,
        sum: 0.0,
    };
}

/// A forest over a fixed vertex set supporting link, cut, connectivity and
/// path queries on `1/w`.
#[derive(Debug, Clone)]
pub struct DynamicForest {
    vertex_count: usize,
    nodes: Vec<Node>,
    edges: Vec<Option<ForestEdge>>,
    edge_count: usize,
    scratch: Vec<u32>,
}

impl DynamicForest {
    pub fn new(vertex_count: usize) -> Self {
        Self::with_edge_capacity(vertex_count, vertex_count.saturating_sub(1))
    }

    /// Preallocates slots for edge ids `0..edge_capacity`.
    pub fn with_edge_capacity(vertex_count: usize, edge_capacity: usize) -> Self {
        assert!(
            vertex_count + edge_capacity < NIL as usize,
            "forest too large for 32-bit node indices"
        );
        let mut nodes = Vec::with_capacity(vertex_count + edge_capacity);
        nodes.resize(vertex_count, Node::EMPTY);
        DynamicForest {
            vertex_count,
            nodes,
            edges: Vec::with_capacity(edge_capacity),
            edge_count: 0,
            scratch: Vec::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of edges currently present.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn edge(&self, id: EdgeId) -> Option<&ForestEdge> {
        self.edges.get(id).and_then(Option::as_ref)
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edge(id).is_some()
    }

    /// Present edge ids in ascending order.
    pub fn edge_ids(&self) -> Vec<EdgeId> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(id, e)| e.map(|_| id))
            .collect()
    }

    /// Adds edge `id` between `u` and `v`, which must lie in different trees.
    pub fn link(&mut self, u: Vertex, v: Vertex, id: EdgeId, weight: f64) -> Result<(), ForestError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(ForestError::SelfLoop(u));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(ForestError::InvalidWeight(weight));
        }
        if self.contains_edge(id) {
            return Err(ForestError::DuplicateEdge(id));
        }
        if self.connected(u, v)? {
            return Err(ForestError::AlreadyConnected { u, v });
        }
        self.link_unchecked(u, v, id, weight);
        Ok(())
    }

    /// Removes edge `id`, splitting its tree in two.
    pub fn cut(&mut self, id: EdgeId) -> Result<(), ForestError> {
        let edge = self.edge(id).copied().ok_or(ForestError::MissingEdge(id))?;
        let x = self.edge_node(id);
        self.cut_nodes(edge.u as u32, x);
        self.cut_nodes(x, edge.v as u32);
        self.edges[id] = None;
        self.edge_count -= 1;
        Ok(())
    }

    pub fn connected(&mut self, u: Vertex, v: Vertex) -> Result<bool, ForestError> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Ok(true);
        }
        Ok(self.find_root(u as u32) == self.find_root(v as u32))
    }

    /// `Σ 1/w_e` over the tree path from `u` to `v`; zero when `u == v`.
    pub fn path_inverse_weight_sum(&mut self, u: Vertex, v: Vertex) -> Result<f64, ForestError> {
        if !self.connected(u, v)? {
            return Err(ForestError::NotConnected { u, v });
        }
        Ok(self.expose_path(u as u32, v as u32))
    }

    /// Picks the path edge whose share of the inverse-weight sum covers `r`.
    ///
    /// Walking from `u` toward `v`, edge `e` owns the half-open interval
    /// `[before/S, (before + 1/w_e)/S)` where `S` is the full path sum and
    /// `before` the sum of the edges preceding it. A uniform `r` therefore
    /// returns each edge with probability proportional to `1/w_e`.
    pub fn select_path_edge(&mut self, u: Vertex, v: Vertex, r: f64) -> Result<EdgeId, ForestError> {
        if !(0.0..1.0).contains(&r) {
            return Err(ForestError::FractionOutOfRange(r));
        }
        if !self.connected(u, v)? {
            return Err(ForestError::NotConnected { u, v });
        }
        if u == v {
            return Err(ForestError::EmptyPath(u));
        }
        let total = self.expose_path(u as u32, v as u32);
        Ok(self.locate(v as u32, r * total))
    }

    /// One-draw choice between an outside candidate of mass `extra` and the
    /// edges of the `u → v` path weighted by `1/w`.
    ///
    /// Returns `None` when `r` lands in the leading `extra` share, otherwise
    /// the selected path edge. Requires `u`, `v` connected and distinct.
    pub(crate) fn select_with_outside(&mut self, u: Vertex, v: Vertex, extra: f64, r: f64) -> Option<EdgeId> {
        let path = self.expose_path(u as u32, v as u32);
        let target = r * (extra + path);
        if target < extra {
            None
        } else {
            Some(self.locate(v as u32, target - extra))
        }
    }

    /// Replaces path edge `removed` by a new edge `added` joining `u` and `v`.
    ///
    /// Must directly follow a `select_with_outside(u, v, ..)` call that
    /// returned `Some(removed)`. At that point the tree is rooted at `u`, the
    /// whole `u → v` path is one splay tree, and `removed` sits at its top, so
    /// the swap needs no further access: the two halves of the path are
    /// detached, and the `u` half is hung below the new edge node, which in
    /// turn hangs below `v`.
    pub(crate) fn swap_selected(&mut self, u: Vertex, v: Vertex, removed: EdgeId, added: EdgeId, weight: f64) {
        let x = self.edge_node(removed);
        debug_assert!(self.is_aux_root(x) && self.nodes[x as usize].parent == NIL);
        self.push(x);
        let [near, far] = self.nodes[x as usize].child;
        debug_assert!(near != NIL && far != NIL);
        self.nodes[near as usize].parent = NIL;
        self.nodes[far as usize].parent = NIL;
        self.nodes[x as usize] = Node::EMPTY;
        self.edges[removed] = None;

        if self.edges.len() <= added {
            self.edges.resize(added + 1, None);
        }
        self.edges[added] = Some(ForestEdge { u, v, weight });
        let y = self.edge_node(added);
        let inverse = 1.0 / weight;
        self.nodes[y as usize] = Node {
            value: inverse,
            sum: inverse,
            parent: v as u32,
            ..Node::EMPTY
        };
        // `near` tops the path u … (one endpoint of x); its shallowest node is
        // the component root u, which now hangs below y.
        self.nodes[near as usize].parent = y;
    }

    /// Links without validation; callers guarantee the preconditions of
    /// [`link`](Self::link).
    pub(crate) fn link_unchecked(&mut self, u: Vertex, v: Vertex, id: EdgeId, weight: f64) {
        if self.edges.len() <= id {
            self.edges.resize(id + 1, None);
        }
        self.edges[id] = Some(ForestEdge { u, v, weight });
        self.edge_count += 1;
        let x = self.edge_node(id);
        let inverse = 1.0 / weight;
        let node = &mut self.nodes[x as usize];
        *node = Node::EMPTY;
        node.value = inverse;
        node.sum = inverse;
        self.link_nodes(x, u as u32);
        self.link_nodes(v as u32, x);
    }

    fn check_vertex(&self, x: Vertex) -> Result<(), ForestError> {
        if x < self.vertex_count {
            Ok(())
        } else {
            Err(ForestError::VertexOutOfRange {
                vertex: x,
                vertex_count: self.vertex_count,
            })
        }
    }

    fn edge_node(&mut self, id: EdgeId) -> u32 {
        let index = self.vertex_count + id;
        if self.nodes.len() <= index {
            assert!(index < NIL as usize, "edge id {id} exceeds node index range");
            self.nodes.resize(index + 1, Node::EMPTY);
        }
        index as u32
    }

    fn is_edge_node(&self, x: u32) -> bool {
        x as usize >= self.vertex_count
    }

    fn edge_id_of(&self, x: u32) -> EdgeId {
        x as usize - self.vertex_count
    }

    // --- splay-tree primitives -------------------------------------------

    #[inline]
    fn sum(&self, x: u32) -> f64 {
        if x == NIL {
            0.0
        } else {
            self.nodes[x as usize].sum
        }
    }

    #[inline]
    fn is_aux_root(&self, x: u32) -> bool {
        let p = self.nodes[x as usize].parent;
        p == NIL || {
            let c = self.nodes[p as usize].child;
            c[0] != x && c[1] != x
        }
    }

    #[inline]
    fn push(&mut self, x: u32) {
        let node = &mut self.nodes[x as usize];
        if node.flip {
            node.flip = false;
            node.child.swap(0, 1);
            let [a, b] = node.child;
            for c in [a, b] {
                if c != NIL {
                    self.nodes[c as usize].flip ^= true;
                }
            }
        }
    }

    #[inline]
    fn pull(&mut self, x: u32) {
        let [a, b] = self.nodes[x as usize].child;
        let s = self.nodes[x as usize].value + self.sum(a) + self.sum(b);
        self.nodes[x as usize].sum = s;
    }

    fn rotate(&mut self, x: u32) {
        let p = self.nodes[x as usize].parent;
        let g = self.nodes[p as usize].parent;
        let dir = (self.nodes[p as usize].child[1] == x) as usize;
        let moved = self.nodes[x as usize].child[dir ^ 1];

        if !self.is_aux_root(p) {
            let gc = &mut self.nodes[g as usize].child;
            let slot = (gc[1] == p) as usize;
            gc[slot] = x;
        }
        self.nodes[x as usize].parent = g;

        self.nodes[x as usize].child[dir ^ 1] = p;
        self.nodes[p as usize].parent = x;

        self.nodes[p as usize].child[dir] = moved;
        if moved != NIL {
            self.nodes[moved as usize].parent = p;
        }
        self.pull(p);
        self.pull(x);
    }

    fn splay(&mut self, x: u32) {
        // Clear pending flips from the splay root down to x first.
        let mut stack = std::mem::take(&mut self.scratch);
        stack.push(x);
        let mut y = x;
        while !self.is_aux_root(y) {
            y = self.nodes[y as usize].parent;
            stack.push(y);
        }
        while let Some(z) = stack.pop() {
            self.push(z);
        }
        self.scratch = stack;

        while !self.is_aux_root(x) {
            let p = self.nodes[x as usize].parent;
            if !self.is_aux_root(p) {
                let g = self.nodes[p as usize].parent;
                let zig_zig = (self.nodes[g as usize].child[0] == p) == (self.nodes[p as usize].child[0] == x);
                self.rotate(if zig_zig { p } else { x });
            }
            self.rotate(x);
        }
    }

    /// Makes the root-to-`x` path preferred and splays `x` to its top.
    fn access(&mut self, x: u32) {
        let mut last = NIL;
        let mut y = x;
        while y != NIL {
            self.splay(y);
            self.nodes[y as usize].child[1] = last;
            self.pull(y);
            last = y;
            y = self.nodes[y as usize].parent;
        }
        self.splay(x);
    }

    fn make_root(&mut self, x: u32) {
        self.access(x);
        self.nodes[x as usize].flip ^= true;
    }

    fn find_root(&mut self, x: u32) -> u32 {
        self.access(x);
        let mut r = x;
        loop {
            self.push(r);
            let left = self.nodes[r as usize].child[0];
            if left == NIL {
                break;
            }
            r = left;
        }
        self.splay(r);
        r
    }

    fn link_nodes(&mut self, child: u32, parent: u32) {
        self.make_root(child);
        self.nodes[child as usize].parent = parent;
    }

    fn cut_nodes(&mut self, a: u32, b: u32) {
        self.make_root(a);
        self.access(b);
        // The exposed path is exactly a–b, so a is b's whole left subtree.
        let left = self.nodes[b as usize].child[0];
        debug_assert_eq!(left, a);
        self.nodes[b as usize].child[0] = NIL;
        self.nodes[left as usize].parent = NIL;
        self.pull(b);
    }

    /// Roots at `u` and exposes `u … v`; afterwards `v` tops a splay tree whose
    /// in-order traversal is the path from `u` to `v`. Returns its sum.
    fn expose_path(&mut self, u: u32, v: u32) -> f64 {
        self.make_root(u);
        self.access(v);
        self.nodes[v as usize].sum
    }

    /// Descends the splay tree topped by `top` to the edge node whose prefix
    /// interval holds `target`.
    fn locate(&mut self, top: u32, mut target: f64) -> EdgeId {
        let mut x = top;
        let mut last_edge = NIL;
        let found = loop {
            self.push(x);
            let [left, right] = self.nodes[x as usize].child;
            let left_sum = self.sum(left);
            if left != NIL && target < left_sum {
                x = left;
                continue;
            }
            target -= left_sum;
            if self.is_edge_node(x) {
                let value = self.nodes[x as usize].value;
                if target < value {
                    break x;
                }
                target -= value;
                last_edge = x;
            }
            if right == NIL {
                // Rounding pushed the target past the end of the path.
                break if last_edge != NIL {
                    last_edge
                } else {
                    self.last_edge_node(top)
                };
            }
            x = right;
        };
        self.splay(found);
        self.edge_id_of(found)
    }

    fn last_edge_node(&mut self, top: u32) -> u32 {
        let mut order = Vec::new();
        self.collect_in_order(top, &mut order);
        *order
            .iter()
            .rev()
            .find(|&&x| self.is_edge_node(x))
            .expect("non-empty path has an edge")
    }

    fn collect_in_order(&mut self, x: u32, out: &mut Vec<u32>) {
        if x == NIL {
            return;
        }
        self.push(x);
        let [left, right] = self.nodes[x as usize].child;
        self.collect_in_order(left, out);
        out.push(x);
        self.collect_in_order(right, out);
    }
}
