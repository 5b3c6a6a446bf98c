//! Rotating barotropic star equilibria.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod eos;
pub mod equilibrium;
pub mod error;
pub mod mass;
pub mod numerics;
pub mod perturb;
pub mod potential;
pub mod radial;
pub mod rotation;

pub use error::{Error, Result};
