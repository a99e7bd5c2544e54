//! Augmented block Cimmino solver for sparse linear systems.
//!
//! The pipeline reorders a sparse matrix with the Cuthill-McKee algorithm on
//! its bipartite row/column graph, which exposes a block bidiagonal form. The
//! reordered matrix is then augmented with extra columns so that its row
//! blocks become mutually orthogonal, at which point the orthogonal projector
//! onto the row space splits into a sum of independent per-block projectors
//! and the system can be solved in closed form through per-block
//! pseudoinverses plus one small dense Gram-matrix solve.
//!
//! Two entry points are exposed by [`driver`]:
//!
//! * consistent systems `A x = b` are solved directly on the reordered,
//!   augmented matrix;
//! * least-squares problems `min ||A x - b||` go through the symmetric
//!   augmented form `[[I, A], [A^T, 0]]`, which is reordered into a block
//!   tridiagonal matrix, regrouped, augmented the same way, and solved as a
//!   consistent system.
//!
//! [`verify`] holds independent dense oracles (pseudoinverse, rank
//! identities, a rank-deficiency probe) used by the test suites and the
//! `check` CLI command.

pub mod augment;
pub mod dense;
pub mod driver;
pub mod error;
pub mod graph;
pub mod market;
pub mod report;
pub mod solver;
pub mod sparse;
pub mod verify;

pub use augment::{augment_consistent, augment_tridiagonal, orthogonality_error, AugmentedSystem};
pub use dense::DenseMatrix;
pub use driver::{solve, Pipeline, SolveMode, SolveOptions};
pub use error::{Error, Result};
pub use graph::{
    build_augmented_adjacency, build_bipartite, cuthill_mckee, derive_permutations,
    reorder_augmented, BipartiteGraph, BlockPartition, LevelStructure,
};
pub use market::{
    read_matrix_market, read_vector_market, write_matrix_market, write_vector_market,
};
pub use solver::{solve_consistent, BlockFactorization, SolveReport};
pub use sparse::{BlockVector, Permutation, SparseMatrix};
