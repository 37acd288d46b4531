//! Sparse spherically homogeneous rooted trees.
//!
//! The crate builds trees of type `{L_n, k_n}`, assembles their Laplacians,
//! block-diagonalizes them into Jacobi matrices with explicit multiplicities
//! and runs spectral diagnostics on the resulting blocks.
//!
//! ```
//! use sts_core::{decomp, model::TreeSpec, operators::LaplacianKind};
//!
//! let spec = TreeSpec::new(vec![1, 5], vec![2, 2]).unwrap();
//! let report = decomp::verify_equivalence(&spec, 9, LaplacianKind::Adjacency).unwrap();
//! assert!(report.dimension_identity_holds);
//! assert!(report.eigenvalue_multiset_distance < 1e-9);
//! ```

pub mod config;
pub mod decomp;
pub mod error;
pub mod model;
pub mod operators;
pub mod spectral;

pub use error::{Error, Result};
