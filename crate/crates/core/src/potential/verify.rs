//! Self-checks of the discretized potential operator against closed forms.

use std::sync::Arc;

use serde::Serialize;

use super::direct::apply_k_direct;
use super::field::AxiField;
use super::grid::{radial_nodes, uniform_nodes, AxiGrid};
use super::multipole::{apply_k_function, apply_k_multipole};
use super::ops::discrete_laplacian;
use crate::error::Result;

/// Smooth test density with `l = 0, 2, 4` content.
pub fn smooth_source(r: f64, z: f64) -> f64 {
    let p2 = 0.5 * (3.0 * z * z - 1.0);
    let p4 = (35.0 * z.powi(4) - 30.0 * z * z + 3.0) / 8.0;
    (-r * r).exp() * (1.0 + 0.5 * r * r * p2 + 0.2 * r.powi(4) * p4)
}

/// Largest error of `K1_{r≤R}` against `(R² − r²/3)/2` inside and `R³/(3r)` outside.
pub fn uniform_ball_error(radius: f64, n_r: usize, n_zeta: usize) -> Result<f64> {
    let g = Arc::new(AxiGrid::new(
        radial_nodes(radius, 1.5 * radius, n_r),
        n_zeta,
        8,
    )?);
    let k = apply_k_function(g.clone(), |r, _| if r <= radius { 1.0 } else { 0.0 });
    let mut worst = 0.0f64;
    for i in 0..g.n_r() {
        let r = g.r_nodes[i];
        let exact = if r <= radius {
            (radius * radius - r * r / 3.0) / 2.0
        } else {
            radius.powi(3) / (3.0 * r)
        };
        for j in 0..g.n_zeta() {
            worst = worst.max((k.at(i, j) - exact).abs());
        }
    }
    Ok(worst)
}

/// Sup difference of the multipole and direct-quadrature operators on a uniform grid over `[0, 4]`.
pub fn multipole_direct_gap(n_r: usize, n_zeta: usize) -> Result<f64> {
    let g = Arc::new(AxiGrid::new(uniform_nodes(4.0, n_r), n_zeta, 8)?);
    let f = AxiField::from_fn(g, smooth_source);
    Ok(apply_k_multipole(&f).sup_diff(&apply_k_direct(&f)))
}

/// Errors of `−Δ(Kf) − f` on `r ∈ [0.5, 3]` under refinement and the observed orders.
#[derive(Debug, Clone, Serialize)]
pub struct LaplacianStudy {
    pub n_r: Vec<usize>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

pub fn laplacian_study(sizes: &[usize]) -> Result<LaplacianStudy> {
    let mut errors = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let g = Arc::new(AxiGrid::new(uniform_nodes(6.0, n), 16, 8)?);
        let f = AxiField::from_fn(g.clone(), smooth_source);
        let lap = discrete_laplacian(&apply_k_multipole(&f));
        let mut worst = 0.0f64;
        for i in 0..n {
            let r = g.r_nodes[i];
            if !(0.5..=3.0).contains(&r) {
                continue;
            }
            for j in 0..g.n_zeta() {
                worst = worst.max((lap.at(i, j) - f.at(i, j)).abs());
            }
        }
        errors.push(worst);
    }
    let orders = errors
        .windows(2)
        .zip(sizes.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    Ok(LaplacianStudy {
        n_r: sizes.to_vec(),
        errors,
        orders,
    })
}
