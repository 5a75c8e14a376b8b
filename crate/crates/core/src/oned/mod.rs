//! One-dimensional Coulomb operators and the boundary data of their
//! self-adjoint extensions.

pub mod boundary;
pub mod grid;
pub mod operator;
pub mod twist;

pub use boundary::{boundary_data, check_extension_membership, BoundaryData, ExtensionMatrix};
pub use grid::Grid1D;
pub use operator::{assemble_hd, assemble_t_eps, eval_v_eps, hardy_check, Operator1D, Operator1DParams};
pub use twist::TwistProfile;
