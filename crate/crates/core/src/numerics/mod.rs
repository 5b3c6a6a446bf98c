//! Quadrature, interpolation and ODE helpers shared by the solver modules.

pub mod interp;
pub mod ode;
pub mod quad;
pub mod roots;
