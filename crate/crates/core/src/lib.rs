//! Down-up random walks over weighted `k`-subsets, with a fast sampler for
//! weighted spanning trees.
//!
//! The walk drops a uniformly random element of the current set and adds one
//! back with probability proportional to the density of the result. Run on
//! complements of spanning trees (the cographic matroid), each step becomes
//! "add a random non-tree edge, remove an edge from the cycle it closes",
//! which a link-cut forest performs in amortized `O(log n)` time.
//!
//! Modules:
//!
//! * [`graph`]: weighted multigraphs, the edge-list format, and exact
//!   spanning-tree oracles (enumeration and the matrix-tree determinant).
//! * [`linkcut`]: a link-cut forest with inverse-weight path sums and
//!   proportional path-edge selection.
//! * [`densities`]: oracle densities over `k`-subsets (tables, DPPs, graphic
//!   and cographic weights) and generating-polynomial Hessians.
//! * [`walk`]: the generic down-up walk, its step schedule, exact transition
//!   kernels and divergences for small instances, and marking-time statistics.
//! * [`exchange`]: exact approximate-exchange constants and related checks.
//! * [`sampler`]: the spanning-tree sampler built on [`linkcut`].
//! * [`bench`]: graph generators and a scaling harness for the sampler.

pub mod bench;
pub mod densities;
pub mod exchange;
pub mod graph;
pub mod linkcut;
pub mod sampler;
mod subsets;
mod unionfind;
pub mod walk;

pub use densities::{
    complement_inverse_density, graphic_basis_density, ComplementInverseDensity, DensityError,
    DppDensity, GraphicDensity, SubsetDensity, TableDensity,
};
pub use exchange::{exchange_alpha, ExchangeError, ExchangeReport};
pub use graph::{EdgeId, GraphError, TreeEdgeSet, Vertex, WeightedGraph};
pub use linkcut::{DynamicForest, ForestError};
pub use sampler::{sample_many, sample_tree, TreeSamplerState};
pub use walk::{mixing_steps, DistributionTable, WalkConfig, WalkError, WalkRun};
