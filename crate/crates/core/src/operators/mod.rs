//! Tree Laplacians and the Jacobi blocks they decompose into.

mod jacobi;
mod sparse;

pub use jacobi::{
    jacobi_block, jacobi_level, jacobi_source, strip, JacobiMatrix, JacobiSource, LevelJacobi,
};
pub use sparse::{assemble, matvec, SparseSymmetric};

use crate::error::{Error, Result};

/// Which of the two tree Laplacians to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LaplacianKind {
    /// `(Δf)(x) = Σ_{y ~ x} f(y)`.
    Adjacency,
    /// `(Δ̃f)(x) = Σ_{y ~ x} f(y) - deg(x) f(x)`.
    GraphLaplacian,
}

impl LaplacianKind {
    pub fn name(self) -> &'static str {
        match self {
            LaplacianKind::Adjacency => "adjacency",
            LaplacianKind::GraphLaplacian => "graphlap",
        }
    }
}

impl std::str::FromStr for LaplacianKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adjacency" => Ok(LaplacianKind::Adjacency),
            "graphlap" => Ok(LaplacianKind::GraphLaplacian),
            _ => Err(format!("unknown Laplacian kind `{s}` (adjacency|graphlap)")),
        }
    }
}

/// A real symmetric operator known only through its action.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; both slices have length [`Self::dim`].
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }
}
