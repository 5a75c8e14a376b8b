//! Cross-sections, their meshes, and the transverse Dirichlet problem.

pub mod mesh;
pub mod modes;
pub mod radial;
pub mod shape;
pub mod transverse;

pub use mesh::{assemble_transverse_laplacian, build_mesh, GridMesh2D};
pub use modes::{check_orthogonality, compute_cs, solve_modes, ModeOptions, TransverseModes};
pub use shape::{CrossSectionSpec, Shape};
pub use transverse::{ModalProjection, TransverseBasis, TransverseKind};
