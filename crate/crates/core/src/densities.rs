//! Unnormalized densities over `k`-subsets of a ground set `0..n`.
//!
//! Sets are passed as strictly ascending slices. Four concrete densities are
//! provided:
//!
//! * [`TableDensity`]: explicit weights, zero elsewhere.
//! * [`DppDensity`]: squared determinants of selected `k`-vectors.
//! * [`GraphicDensity`]: weight products of spanning trees.
//! * [`ComplementInverseDensity`]: complements of spanning trees weighted by
//!   `Π 1/w_e`, which normalizes to the same distribution over trees.
//!
//! Small instances can enumerate their support, which unlocks the exact
//! tooling: Hessians of the generating polynomial here, transition kernels in
//! [`crate::walk`], exchange constants in [`crate::exchange`].

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Deserialize;
use thiserror::Error;

use crate::graph::{GraphError, WeightedGraph};
use crate::subsets::{binomial, for_each_combination, is_strictly_ascending};
use crate::unionfind::DisjointSets;

/// Largest number of `k`-subsets a DPP will scan when enumerating support.
pub const COMBINATION_SCAN_CAP: u128 = 2_000_000;
/// Largest matrix [`positive_eigenvalue_count`] accepts.
pub const HESSIAN_DIMENSION_CAP: usize = 64;
/// Relative eigenvalue threshold used by [`positive_eigenvalue_count`].
pub const EIGENVALUE_TOLERANCE: f64 = 1e-9;
/// A DPP determinant at most this fraction of the Hadamard bound counts as zero.
pub const DPP_SINGULAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DensityError {
    #[error("{what} too large: {size} > cap {cap}")]
    AboveCap {
        what: &'static str,
        size: u128,
        cap: u128,
    },
    #[error("invalid density document: {0}")]
    Invalid(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("expected a point with {expected} coordinates, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("evaluation point must be strictly positive and finite")]
    NonPositivePoint,
}

/// A nonnegative oracle over `k`-subsets of `0..ground_size()`.
pub trait SubsetDensity {
    fn ground_size(&self) -> usize;

    fn subset_size(&self) -> usize;

    /// Density of an ascending `k`-subset.
    fn eval(&self, set: &[usize]) -> f64;

    /// All sets of positive density in lexicographic order.
    fn support(&self) -> Result<Vec<Vec<usize>>, DensityError>;
}

impl<D: SubsetDensity + ?Sized> SubsetDensity for &D {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn subset_size(&self) -> usize {
        (**self).subset_size()
    }
    fn eval(&self, set: &[usize]) -> f64 {
        (**self).eval(set)
    }
    fn support(&self) -> Result<Vec<Vec<usize>>, DensityError> {
        (**self).support()
    }
}

impl<D: SubsetDensity + ?Sized> SubsetDensity for Box<D> {
    fn ground_size(&self) -> usize {
        (**self).ground_size()
    }
    fn subset_size(&self) -> usize {
        (**self).subset_size()
    }
    fn eval(&self, set: &[usize]) -> f64 {
        (**self).eval(set)
    }
    fn support(&self) -> Result<Vec<Vec<usize>>, DensityError> {
        (**self).support()
    }
}

// ---------------------------------------------------------------------------

/// Explicit weights on listed subsets.
#[derive(Debug, Clone, PartialEq)]
pub struct TableDensity {
    ground_size: usize,
    subset_size: usize,
    entries: HashMap<Vec<usize>, f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDocument {
    n: usize,
    k: usize,
    entries: Vec<(Vec<usize>, f64)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DppDocument {
    k: usize,
    vectors: Vec<Vec<f64>>,
}

impl TableDensity {
    /// Validates and stores the entries. Elements may be listed in any order;
    /// repeated sets are rejected.
    pub fn new<I>(ground_size: usize, subset_size: usize, entries: I) -> Result<Self, DensityError>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut table = HashMap::new();
        for (mut set, weight) in entries {
            set.sort_unstable();
            if set.len() != subset_size {
                return Err(DensityError::Invalid(format!(
                    "entry {set:?} has {} elements, expected {subset_size}",
                    set.len()
                )));
            }
            if !is_strictly_ascending(&set) || set.iter().any(|&x| x >= ground_size) {
                return Err(DensityError::Invalid(format!(
                    "entry {set:?} must hold distinct elements below {ground_size}"
                )));
            }
            if !(weight.is_finite() && weight >= 0.0) {
                return Err(DensityError::Invalid(format!(
                    "entry {set:?} has invalid weight {weight}"
                )));
            }
            if table.insert(set.clone(), weight).is_some() {
                return Err(DensityError::Invalid(format!("entry {set:?} listed twice")));
            }
        }
        if !table.values().any(|&w| w > 0.0) {
            return Err(DensityError::Invalid("no entry has positive weight".into()));
        }
        Ok(TableDensity {
            ground_size,
            subset_size,
            entries: table,
        })
    }

    /// Weight 1 on every `k`-subset of `0..n`: the uniform matroid `U(k, n)`.
    pub fn uniform(ground_size: usize, subset_size: usize) -> Result<Self, DensityError> {
        let mut sets = Vec::new();
        for_each_combination(ground_size, subset_size, |c| sets.push((c.to_vec(), 1.0)));
        Self::new(ground_size, subset_size, sets)
    }

    /// Parses `{ "n": int, "k": int, "entries": [[[i, ...], weight], ...] }`.
    pub fn from_json(text: &str) -> Result<Self, DensityError> {
        let doc: TableDocument = serde_json::from_str(text)?;
        Self::new(doc.n, doc.k, doc.entries)
    }

    /// Scales every weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        TableDensity {
            entries: self.entries.iter().map(|(s, w)| (s.clone(), w * factor)).collect(),
            ..self.clone()
        }
    }
}

impl SubsetDensity for TableDensity {
    fn ground_size(&self) -> usize {
        self.ground_size
    }

    fn subset_size(&self) -> usize {
        self.subset_size
    }

    fn eval(&self, set: &[usize]) -> f64 {
        self.entries.get(set).copied().unwrap_or(0.0)
    }

    fn support(&self) -> Result<Vec<Vec<usize>>, DensityError> {
        let mut sets: Vec<Vec<usize>> = self
            .entries
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(s, _)| s.clone())
            .collect();
        sets.sort_unstable();
        Ok(sets)
    }
}

// ---------------------------------------------------------------------------

/// `μ(S) = det([v_i]_{i∈S})²` for vectors `v_i ∈ R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct DppDensity {
    subset_size: usize,
    vectors: Vec<Vec<f64>>,
}

impl DppDensity {
    pub fn new(subset_size: usize, vectors: Vec<Vec<f64>>) -> Result<Self, DensityError> {
        if subset_size == 0 {
            return Err(DensityError::Invalid("DPP dimension k must be positive".into()));
        }
        if vectors.len() < subset_size {
            return Err(DensityError::Invalid(format!(
                "need at least k = {subset_size} vectors, got {}",
                vectors.len()
            )));
        }
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != subset_size {
                return Err(DensityError::Invalid(format!(
                    "vector {i} has dimension {}, expected {subset_size}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(DensityError::Invalid(format!("vector {i} has a non-finite entry")));
            }
        }
        Ok(DppDensity {
            subset_size,
            vectors,
        })
    }

    /// Parses `{ "k": int, "vectors": [[k reals], ...] }`.
    pub fn from_json(text: &str) -> Result<Self, DensityError> {
        let doc: DppDocument = serde_json::from_str(text)?;
        Self::new(doc.k, doc.vectors)
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

/// Squared determinant of the vectors selected by `set`.
///
/// Determinants below [`DPP_SINGULAR_TOLERANCE`] times the Hadamard bound
/// `Π ‖v_i‖` are rounding noise from a singular selection and evaluate to 0.
pub fn dpp_eval(d: &DppDensity, set: &[usize]) -> f64 {
    let k = d.subset_size;
    let columns = DMatrix::from_fn(k, k, |row, col| d.vectors[set[col]][row]);
    let hadamard: f64 = set
        .iter()
        .map(|&i| d.vectors[i].iter().map(|x| x * x).sum::<f64>().sqrt())
        .product();
    let det = columns.determinant();
    if det.abs() <= DPP_SINGULAR_TOLERANCE * hadamard {
        0.0
    } else {
        det * det
    }
}

impl SubsetDensity for DppDensity {
    fn ground_size(&self) -> usize {
        self.vectors.len()
    }

    fn subset_size(&self) -> usize {
        self.subset_size
    }

    fn eval(&self, set: &[usize]) -> f64 {
        dpp_eval(self, set)
    }

    fn support(&self) -> Result<Vec<Vec<usize>>, DensityError> {
        let n = self.vectors.len();
        let scan = binomial(n, self.subset_size);
        if scan > COMBINATION_SCAN_CAP {
            return Err(DensityError::AboveCap {
                what: "DPP combination scan",
                size: scan,
                cap: COMBINATION_SCAN_CAP,
            });
        }
        let mut sets = Vec::new();
        for_each_combination(n, self.subset_size, |c| {
            if self.eval(c) > 0.0 {
                sets.push(c.to_vec());
            }
        });
        Ok(sets)
    }
}

// ---------------------------------------------------------------------------

/// `μ(S) = Π_{e∈S} w_e` when `S` is a spanning tree, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphicDensity {
    graph: WeightedGraph,
}

/// `μ(S) = Π_{e∈S} 1/w_e` when `E − S` is a spanning tree, else 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementInverseDensity {
    graph: WeightedGraph,
}

pub fn graphic_basis_density(g: &WeightedGraph) -> GraphicDensity {
    GraphicDensity { graph: g.clone() }
}

pub fn complement_inverse_density(g: &WeightedGraph) -> ComplementInverseDensity {
    ComplementInverseDensity { graph: g.clone() }
}

impl GraphicDensity {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }
}

impl ComplementInverseDensity {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// Edge ids outside `set`, ascending.
    pub fn complement(&self, set: &[usize]) -> Vec<usize> {
        complement_of(set, self.graph.edge_count())
    }
}

pub(crate) fn complement_of(set: &[usize], n: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(n.saturating_sub(set.len()));
    let mut it = set.iter().peekable();
    for x in 0..n {
        if it.peek() == Some(&&x) {
            it.next();
        } else {
            out.push(x);
        }
    }
    out
}

fn spans(g: &WeightedGraph, ids: impl Iterator<Item = usize>) -> bool {
    let mut sets = DisjointSets::new(g.vertex_count());
    let mut used = 0;
    for id in ids {
        let e = g.edge(id);
        if !sets.union(e.u, e.v) {
            return false;
        }
        used += 1;
    }
    used == g.tree_size()
}

impl SubsetDensity for GraphicDensity {
    fn ground_size(&self) -> usize {
        self.graph.edge_count()
    }

    fn subset_size(&self) -> usize {
        self.graph.tree_size()
    }

    fn eval(&self, set: &[usize]) -> f64 {
        if spans(&self.graph, set.iter().copied()) {
            self.graph.weight_product(set)
        } else {
            0.0
        }
    }

    fn support(&self) -> Result<Vec<Vec<usize>>, DensityError> {
        Ok(self
            .graph
            .enumerate_spanning_trees()?
            .into_iter()
            .map(|(t, _)| t.into_inner())
            .collect())
    }
}

impl SubsetDensity for ComplementInverseDensity {
    fn ground_size(&self) -> usize {
        self.graph.edge_count()
    }

    fn subset_size(&self) -> usize {
        self.graph.cotree_size()
    }

    fn eval(&self, set: &[usize]) -> f64 {
        if spans(&self.graph, self.complement(set).into_iter()) {
            set.iter().map(|&e| 1.0 / self.graph.edge(e).weight).product()
        } else {
            0.0
        }
    }

    fn support(&self) -> Result<Vec<Vec<usize>>, DensityError> {
        let n = self.graph.edge_count();
        let mut sets: Vec<Vec<usize>> = self
            .graph
            .enumerate_spanning_trees()?
            .into_iter()
            .map(|(t, _)| complement_of(t.edge_ids(), n))
            .collect();
        sets.sort_unstable();
        Ok(sets)
    }
}

// ---------------------------------------------------------------------------

/// Hessian of the generating polynomial `Σ_S μ(S) Π_{i∈S} z_i` at `z`.
///
/// Off-diagonal `(i, j)` is `Σ_{S ∋ i,j} μ(S) Π_{l ∈ S∖{i,j}} z_l`; the
/// diagonal is zero because the polynomial is multiaffine.
pub fn hessian_at<D: SubsetDensity + ?Sized>(d: &D, z: &[f64]) -> Result<DMatrix<f64>, DensityError> {
    let n = d.ground_size();
    if z.len() != n {
        return Err(DensityError::DimensionMismatch {
            expected: n,
            found: z.len(),
        });
    }
    if z.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(DensityError::NonPositivePoint);
    }
    let mut h = DMatrix::zeros(n, n);
    for set in d.support()? {
        let mass = d.eval(&set);
        let monomial: f64 = set.iter().map(|&l| z[l]).product();
        for (a, &i) in set.iter().enumerate() {
            for &j in &set[a + 1..] {
                // z > 0, so dividing out is exact enough and avoids a k² product.
                let term = mass * monomial / (z[i] * z[j]);
                h[(i, j)] += term;
                h[(j, i)] += term;
            }
        }
    }
    Ok(h)
}

/// Number of eigenvalues above `EIGENVALUE_TOLERANCE × max |λ|`.
pub fn positive_eigenvalue_count(m: &DMatrix<f64>) -> Result<usize, DensityError> {
    if m.nrows() > HESSIAN_DIMENSION_CAP {
        return Err(DensityError::AboveCap {
            what: "Hessian dimension",
            size: m.nrows() as u128,
            cap: HESSIAN_DIMENSION_CAP as u128,
        });
    }
    if m.nrows() == 0 {
        return Ok(0);
    }
    let eigen = SymmetricEigen::new(m.clone());
    let scale = eigen.eigenvalues.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()));
    if scale == 0.0 {
        return Ok(0);
    }
    Ok(eigen
        .eigenvalues
        .iter()
        .filter(|&&l| l > EIGENVALUE_TOLERANCE * scale)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weighted_triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)]).unwrap()
    }

    fn two_blocks() -> TableDensity {
        TableDensity::new(4, 2, [(vec![0, 1], 1.0), (vec![2, 3], 1.0)]).unwrap()
    }

    #[test]
    fn graphic_density_values() {
        let tri = graphic_basis_density(&weighted_triangle());
        assert_eq!(tri.eval(&[0, 1]), 2.0);
        assert_eq!(tri.eval(&[0, 2]), 3.0);
        let k4 = graphic_basis_density(&WeightedGraph::complete(4).unwrap());
        // Edges 0:(0,1) 1:(0,2) 3:(1,2) form a triangle.
        assert_eq!(k4.eval(&[0, 1, 3]), 0.0);
        assert_eq!(k4.support().unwrap().len(), 16);
    }

    #[test]
    fn complement_density_values() {
        let d = complement_inverse_density(&weighted_triangle());
        assert_eq!(d.subset_size(), 1);
        assert!((d.eval(&[2]) - 1.0 / 3.0).abs() < 1e-15);
        let masses: Vec<f64> = d.support().unwrap().iter().map(|s| d.eval(s)).collect();
        let total: f64 = masses.iter().sum();
        let probs: Vec<f64> = masses.iter().map(|m| m / total).collect();
        for (p, expected) in probs.iter().zip([6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0]) {
            assert!((p - expected).abs() < 1e-12);
        }
        let path = WeightedGraph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let d = complement_inverse_density(&path);
        assert_eq!(d.subset_size(), 0);
        assert_eq!(d.eval(&[]), 1.0);
        assert_eq!(d.support().unwrap(), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn dpp_values() {
        let d = DppDensity::new(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(dpp_eval(&d, &[0, 1]), 1.0);
        assert!((dpp_eval(&d, &[1, 2]) - 1.0).abs() < 1e-12);
        assert!((dpp_eval(&d, &[2, 1]) - dpp_eval(&d, &[1, 2])).abs() < 1e-12);
        let dependent = DppDensity::new(2, vec![vec![1.0, 2.0], vec![2.0, 4.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(dpp_eval(&dependent, &[0, 1]), 0.0);
        assert_eq!(dependent.support().unwrap(), vec![vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn dpp_rejects_bad_shapes() {
        assert!(DppDensity::new(2, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(DppDensity::new(0, vec![]).is_err());
        assert!(DppDensity::new(2, vec![vec![1.0, 0.0]]).is_err());
        assert!(DppDensity::from_json(r#"{"k": 2, "vectors": [[1, 0], [0, 1]], "x": 1}"#).is_err());
        let d = DppDensity::from_json(r#"{"k": 2, "vectors": [[1, 0], [0, 1]]}"#).unwrap();
        assert_eq!(d.support().unwrap(), vec![vec![0, 1]]);
    }

    #[test]
    fn table_documents() {
        let d = TableDensity::from_json(r#"{"n": 4, "k": 2, "entries": [[[1, 0], 1.0], [[2, 3], 2.5]]}"#)
            .unwrap();
        assert_eq!(d.eval(&[0, 1]), 1.0);
        assert_eq!(d.eval(&[2, 3]), 2.5);
        assert_eq!(d.eval(&[0, 2]), 0.0);
        assert!(TableDensity::from_json(r#"{"n": 4, "k": 2, "entries": [[[0, 0], 1.0]]}"#).is_err());
        assert!(TableDensity::from_json(r#"{"n": 4, "k": 2, "entries": [[[0, 7], 1.0]]}"#).is_err());
        assert!(TableDensity::from_json(r#"{"n": 4, "k": 2, "entries": [[[0, 1], -1.0]]}"#).is_err());
        assert!(TableDensity::from_json(r#"{"n": 4, "k": 2, "entries": [[[0, 1], 0.0]]}"#).is_err());
        assert!(TableDensity::from_json(r#"{"n": 4, "k": 2, "entries": [[[0, 1], 1], [[1, 0], 1]]}"#).is_err());
        assert!(TableDensity::from_json("{").is_err());
    }

    #[test]
    fn hessian_of_elementary_symmetric_polynomial() {
        let d = TableDensity::uniform(3, 2).unwrap();
        let h = hessian_at(&d, &[1.0, 1.0, 1.0]).unwrap();
        let expected = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
        assert_eq!(h, expected);
        assert_eq!(positive_eigenvalue_count(&h).unwrap(), 1);
    }

    #[test]
    fn hessian_of_two_blocks() {
        let h = hessian_at(&two_blocks(), &[1.0; 4]).unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
            expected[(i, j)] = 1.0;
        }
        assert_eq!(h, expected);
        assert_eq!(positive_eigenvalue_count(&h).unwrap(), 2);
    }

    #[test]
    fn hessian_weights_by_remaining_coordinates() {
        // μ = z0 z1 z2: ∂²/∂z0∂z1 = z2.
        let d = TableDensity::new(3, 3, [(vec![0, 1, 2], 2.0)]).unwrap();
        let h = hessian_at(&d, &[1.5, 2.0, 3.0]).unwrap();
        assert!((h[(0, 1)] - 6.0).abs() < 1e-12);
        assert!((h[(0, 2)] - 4.0).abs() < 1e-12);
        assert!((h[(1, 2)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn linear_density_has_zero_hessian() {
        let d = TableDensity::uniform(4, 1).unwrap();
        let h = hessian_at(&d, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(h.iter().all(|&x| x == 0.0));
        assert_eq!(positive_eigenvalue_count(&h).unwrap(), 0);
    }

    #[test]
    fn hessian_rejects_bad_points() {
        let d = TableDensity::uniform(3, 2).unwrap();
        assert!(matches!(hessian_at(&d, &[1.0, 1.0]), Err(DensityError::DimensionMismatch { .. })));
        assert!(matches!(hessian_at(&d, &[1.0, 0.0, 1.0]), Err(DensityError::NonPositivePoint)));
        let big = DMatrix::<f64>::zeros(65, 65);
        assert!(matches!(positive_eigenvalue_count(&big), Err(DensityError::AboveCap { .. })));
    }
}
