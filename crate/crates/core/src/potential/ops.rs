//! Derived quantities of potential fields.

use std::f64::consts::PI;

use super::field::{AxiField, ModeField};
use super::multipole::RayPlan;

/// Largest radial slope at the origin over all rays, from the quadratic through the first three nodes.
pub fn grad_at_origin(field: &AxiField) -> f64 {
    let g = &field.grid;
    let (r1, r2) = (g.r_nodes[1], g.r_nodes[2]);
    let mut worst = 0.0f64;
    for j in 0..g.n_zeta() {
        let (u0, u1, u2) = (field.at(0, j), field.at(1, j), field.at(2, j));
        // u = u0 + b r + c r²
        let b = ((u1 - u0) * r2 * r2 - (u2 - u0) * r1 * r1) / (r1 * r2 * (r2 - r1));
        worst = worst.max(b.abs());
    }
    worst
}

/// Radial slope of the field along ray `j` at node `i` by centered differences.
pub fn radial_slope(field: &AxiField, i: usize, j: usize) -> f64 {
    let r = &field.grid.r_nodes;
    let n = r.len();
    let (a, b, c) = if i == 0 {
        (0, 1, 2)
    } else if i == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (i - 1, i, i + 1)
    };
    let (x0, x1, x2) = (r[a], r[b], r[c]);
    let (f0, f1, f2) = (field.at(a, j), field.at(b, j), field.at(c, j));
    let x = r[i];
    f0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + f1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + f2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// `−Δ` mode by mode with three-point differences; first and last nodes are left at zero.
pub fn discrete_laplacian(field: &AxiField) -> AxiField {
    let g = field.grid.clone();
    let modes = field.legendre_coeffs();
    let r = &g.r_nodes;
    let n = r.len();
    let mut out = ModeField::zeros(g.l_max, n);
    for l in (0..=g.l_max).step_by(2) {
        let u = modes.mode(l);
        let ll = (l * (l + 1)) as f64;
        let dst = out.mode_mut(l);
        for i in 1..n - 1 {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let d2 = 2.0 * ((u[i + 1] - u[i]) / hp - (u[i] - u[i - 1]) / hm) / (hp + hm);
            let d1 = (hm * hm * u[i + 1] - hp * hp * u[i - 1] + (hp * hp - hm * hm) * u[i])
                / (hp * hm * (hp + hm));
            dst[i] = -(d2 + 2.0 * d1 / r[i]) + ll * u[i] / (r[i] * r[i]);
        }
    }
    AxiField::from_modes(g, &out)
}

/// `2π ∬ f g r² dr dζ` with Gauss quadrature in ζ and cubic interpolation in r.
pub fn inner_product(f: &AxiField, g: &AxiField) -> f64 {
    let grid = f.grid.clone();
    let plan = RayPlan::plain(grid.clone());
    let fv = plan.interpolate(f);
    let gv = plan.interpolate(g);
    let mut acc = 0.0;
    let mut off = 0;
    for (h, hr) in grid.half_rays().iter().enumerate() {
        let mut ray = 0.0;
        for k in 0..plan.n_intervals() {
            for p in plan.segment(h, k) {
                ray += p.w * p.s * p.s * fv[off] * gv[off];
                off += 1;
            }
        }
        acc += hr.factor * grid.zeta_weights[hr.j] * ray;
    }
    2.0 * PI * acc
}
