//! Finite-element Dirichlet-to-Neumann eigensolver for planar polygons.

mod dtn;
pub mod linalg;
mod mesh;
mod mesher;

pub use dtn::{
    assemble, dtn_matrices, dtn_spectrum, dtn_spectrum_estimated, dtn_spectrum_mesh,
    dtn_spectrum_with, fem_eigenvalues, generalized_eigenvalues, Assembly, CondensationStats,
    Comparison, DtnMatrixPair, FemEstimate, ERROR_SAFETY, FEM_TOL_ZERO,
};
pub use mesh::{load_mesh, BoundaryEdge, Mesh};
pub use mesher::{triangulate, triangulate_with, MeshOptions};
