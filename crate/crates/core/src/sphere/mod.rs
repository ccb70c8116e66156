//! Triangulated spheres, certified sign regions on them, and mod-2 homology
//! of the negative part.

mod complex;
mod homology;
mod region;
mod stabilize;

use thiserror::Error;

pub use complex::{det, Cell, CellId, SphereComplex, Split, VertexId, MAX_DIM};
pub use homology::{simplicial_homology, HomologySummary, SimplicialHomology};
pub use region::{Label, SignRegion};
pub use stabilize::{auto_radii, region_summary, stabilized_invariants};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphereError {
    #[error("unsupported dimension {0}; n must be between 2 and 4")]
    UnsupportedDimension(usize),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("polynomial has {got} variables, sphere lives in R^{expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("radii must be strictly decreasing")]
    RadiiNotDecreasing,
    #[error("no radii given")]
    NoRadii,
}
