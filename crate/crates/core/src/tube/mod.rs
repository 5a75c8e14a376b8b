//! Discrete forms on the tube `R x S` and their resolvents.

pub mod assemble;
pub mod resolvent;
pub mod spec;
pub mod split;

pub use assemble::{assemble_a_forms, assemble_b_form, FormKind, TubeOperator};
pub use resolvent::{apply_resolvent_complex, apply_resolvent_real, Resolvent, ResolventSolve, SolveNorms, SolveRecord, DEFAULT_RTOL};
pub use spec::{TubeMode, TubeOperatorSpec, XDomain, DEFAULT_BUDGET};
pub use split::{cross_term_check, lift, project_onto_l, slice_overlap, CrossTerm};
