//! Spectral diagnostics on truncated Jacobi blocks and tree operators.

mod coverage;
mod dimension;
mod eig;
mod mfunction;
mod moments;
mod transfer;
mod tree;

pub use coverage::{energy_grid, spectrum_coverage};
pub use dimension::{
    default_ladder, dimension_csv, geometric_ladder, local_dimension, local_dimension_with,
    local_mass_dimension, DimensionEstimate, DimensionOptions,
};
pub use eig::{eig_tridiag, sturm_count, tridiag_eigenvalues_bisection, SpectralMeasure};
pub use mfunction::{m_function, m_function_adaptive, AdaptiveM};
pub use moments::moments;
pub use transfer::{
    simon_stolz_csv, simon_stolz_sum, transfer_product, transfer_product_with_cadence,
    SimonStolzPoint, TransferState, RENORMALIZATION_CADENCE,
};
pub use tree::{tree_eigenvalues, tree_inertia_below};

pub use num_complex::Complex64;
