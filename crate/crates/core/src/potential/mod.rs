//! The Newtonian potential operator on axisymmetric fields.

pub mod direct;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod multipole;
pub mod ops;
pub mod verify;

pub use direct::apply_k_direct;
pub use field::{AxiField, ModeField};
pub use grid::AxiGrid;
pub use kernel::kernel_eval;
pub use multipole::{apply_k_function, apply_k_multipole};
pub use ops::{discrete_laplacian, grad_at_origin, inner_product};
