//! Topological profiles of sampled loss landscapes.
//!
//! The pipeline runs in four stages, one module each:
//!
//! 1. [`field`]: scalar fields sampled on an n-dimensional lattice, their file
//!    formats, and synthetic test fields.
//! 2. [`graph`]: the mutual k-nearest-neighbor graph over the sample points,
//!    built exactly or with NN-Descent.
//! 3. [`merge_tree`]: the sublevel-set merge tree, its branch decomposition,
//!    0-dimensional persistence, and persistence simplification.
//! 4. [`profile`] and [`render`]: the nested-basin landscape profile and its
//!    SVG rendering.
//!
//! [`pipeline`] composes the stages end to end.

pub mod error;
pub mod exec;
pub mod field;
pub mod graph;
pub mod merge_tree;
pub mod pipeline;
pub mod profile;
pub mod render;

mod union_find;

pub use error::{Error, Result};
pub use exec::Execution;
pub use field::{FieldFormat, GridSpec, ScalarField, Well};
pub use graph::{KnnLists, KnnMethod, NeighborhoodGraph, NnDescentParams};
pub use merge_tree::{BranchDecomposition, MergeTree, NodeKind, PersistenceDiagram};
pub use profile::LandscapeProfile;
pub use render::RenderStyle;
