//! The scaled integral equation `u = g + G(u)`: operator, solver and checks.

pub mod checks;
pub mod operator;
pub mod solver;

pub use checks::{
    boundary_along, check_admissibility, free_boundary, hl_certificate, Admissibility,
};
pub use operator::{apply_g, dg_matrix, frechet_g_apply};
pub use solver::{
    continuation_in_beta, extended_theta, solve_equilibrium, solve_equilibrium_j, Continuation,
    EquilibriumSolution, SolveOptions,
};
