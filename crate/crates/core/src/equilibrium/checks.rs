//! Free boundary, admissibility flags and the invertibility certificate.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use serde::Serialize;

use crate::eos::{EquationOfState, Nonlinearity, ScaleSet};
use crate::error::{Error, Result};
use crate::numerics::interp::{cubic_derivative, cubic_eval};
use crate::potential::field::AxiField;
use crate::potential::ops::radial_slope;
use crate::rotation::{frechet_b_matrix, RotationLaw};

use super::operator::dg_matrix;

/// Root of the radial interpolant on a ray with exactly one `+ → −` change beyond `r0`.
pub fn boundary_on_ray(r_nodes: &[f64], vals: &[f64], r0: f64, zeta: f64) -> Result<f64> {
    let start = r_nodes
        .iter()
        .position(|&r| r >= r0)
        .ok_or(Error::NoSignChange { zeta })?;
    if vals[start] <= 0.0 {
        return Err(Error::NoSignChange { zeta });
    }
    let mut crossing = None;
    for i in start..r_nodes.len() - 1 {
        let (a, b) = (vals[i] > 0.0, vals[i + 1] > 0.0);
        if a != b {
            if crossing.is_some() || b {
                return Err(Error::NoSignChange { zeta });
            }
            crossing = Some(i);
        }
    }
    let k = crossing.ok_or(Error::NoSignChange { zeta })?;
    let (mut lo, mut hi) = (r_nodes[k], r_nodes[k + 1]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-14 {
            break;
        }
        if cubic_eval(r_nodes, vals, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `R(ζ_j)` at every ζ node.
pub fn free_boundary(u: &AxiField, r0: f64) -> Result<Vec<f64>> {
    let g = &u.grid;
    (0..g.n_zeta())
        .map(|j| boundary_on_ray(&g.r_nodes, &u.ray(j), r0, g.zeta_nodes[j]))
        .collect()
}

/// `R(ζ)` at an arbitrary direction, through ζ interpolation of the field.
pub fn boundary_along(u: &AxiField, zeta: f64, r0: f64) -> Result<f64> {
    boundary_on_ray(&u.grid.r_nodes, &u.along(zeta), r0, zeta)
}

/// Admissibility and monotonicity flags.
#[derive(Debug, Clone, Serialize)]
pub struct Admissibility {
    pub a1: bool,
    pub a2: bool,
    pub r0: f64,
    pub monotone: bool,
    /// Largest `1/C` with `∂u/∂r ≤ −r/C` at every node.
    pub inv_c: f64,
    /// `−(∂u/∂r)/r` at the first node off the center, averaged over rays.
    pub near_axis_slope: f64,
    /// Smallest `|∂u/∂r|` on the free boundary (zero when `a2` fails).
    pub boundary_gradient: f64,
}

impl Admissibility {
    pub fn all(&self) -> bool {
        self.a1 && self.a2 && self.monotone
    }
}

pub fn check_admissibility(u: &AxiField, r0: f64) -> Admissibility {
    let g = &u.grid;
    let nr = g.n_r();
    let mut a1 = true;
    let mut inv_c = f64::INFINITY;
    let mut near = 0.0;
    for j in 0..g.n_zeta() {
        for i in 1..nr {
            let s = radial_slope(u, i, j);
            let r = g.r_nodes[i];
            if r >= r0 && !(s < 0.0) {
                a1 = false;
            }
            inv_c = inv_c.min(-s / r);
        }
        near += -radial_slope(u, 1, j) / g.r_nodes[1];
    }
    near /= g.n_zeta() as f64;
    let (a2, grad) = match free_boundary(u, r0) {
        Ok(bd) => {
            let inside = bd.iter().all(|&b| b > r0 && b < g.r_inf());
            let grad = bd
                .iter()
                .enumerate()
                .map(|(j, &b)| cubic_derivative(&g.r_nodes, &u.ray(j), b).abs())
                .fold(f64::INFINITY, f64::min);
            (inside, grad)
        }
        Err(_) => (false, 0.0),
    };
    Admissibility {
        a1,
        a2,
        r0,
        monotone: inv_c > 0.0,
        inv_c,
        near_axis_slope: near,
        boundary_gradient: grad,
    }
}

/// Smallest singular value of a dense matrix.
pub fn sigma_min(a: &Mat<f64>) -> f64 {
    let s = a
        .singular_values()
        .expect("singular value decomposition failed");
    s.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `I − J`.
pub fn identity_minus(j: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(j.nrows(), j.ncols(), |r, c| {
        if r == c {
            1.0 - j[(r, c)]
        } else {
            -j[(r, c)]
        }
    })
}

/// Whether the matrix has no coupling between Legendre blocks of size `n`.
pub fn is_block_diagonal(j: &Mat<f64>, n: usize) -> bool {
    let mut scale = 0.0f64;
    let mut off = 0.0f64;
    for r in 0..j.nrows() {
        for c in 0..j.ncols() {
            let v = j[(r, c)].abs();
            if r / n == c / n {
                scale = scale.max(v);
            } else {
                off = off.max(v);
            }
        }
    }
    off <= 1e-13 * scale.max(1e-300)
}

/// `σ_min(I − J)` for each diagonal block of size `n`.
pub fn block_sigma_min(j: &Mat<f64>, n: usize) -> Vec<f64> {
    (0..j.nrows() / n)
        .map(|b| {
            let blk = Mat::from_fn(n, n, |r, c| {
                let v = j[(b * n + r, b * n + c)];
                if r == c {
                    1.0 - v
                } else {
                    -v
                }
            });
            sigma_min(&blk)
        })
        .collect()
}

/// HL certificate for a linearization `J` in mode coordinates with blocks of size `n`.
pub fn certificate_from_matrix(j: &Mat<f64>, n: usize) -> (f64, Option<Vec<f64>>) {
    if is_block_diagonal(j, n) {
        let per = block_sigma_min(j, n);
        (per.iter().copied().fold(f64::INFINITY, f64::min), Some(per))
    } else {
        (sigma_min(&identity_minus(j)), None)
    }
}

/// Operator norm of a block in the ψ-weighted sup norm and the matching lower bound for `I − T`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightedBound {
    /// `‖T‖` in the norm `‖h/ψ‖_∞`.
    pub operator_norm: f64,
    /// `1 / ‖(I − T)^{-1}‖` in the same norm.
    pub inverse_bound: f64,
}

/// Weighted bounds for the diagonal block `b` (size `n`) of `J`; node 0 is dropped.
pub fn weighted_block_bound(j: &Mat<f64>, n: usize, b: usize, psi: &[f64]) -> WeightedBound {
    let m = n - 1;
    let t = Mat::from_fn(m, m, |r, c| {
        j[(b * n + r + 1, b * n + c + 1)] * psi[c + 1] / psi[r + 1]
    });
    let op = (0..m)
        .map(|r| (0..m).map(|c| t[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let a = identity_minus(&t);
    let inv = a.partial_piv_lu().inverse();
    let inv_norm = (0..m)
        .map(|r| (0..m).map(|c| inv[(r, c)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    WeightedBound {
        operator_norm: op,
        inverse_bound: 1.0 / inv_norm,
    }
}

/// `ψ` samples on the grid for the field `u` (`−∂u/∂r` on the ray nearest the equator).
pub fn psi_of(u: &AxiField) -> Vec<f64> {
    let g = &u.grid;
    let j = g.half_rays()[0].j;
    (0..g.n_r()).map(|i| -radial_slope(u, i, j)).collect()
}

/// `σ_min(I − DG(u))`, or `σ_min(I − D_uB − DG(u))` when an angular-momentum law is given.
pub fn hl_certificate(
    u: &AxiField,
    eos: &EquationOfState,
    u_o: f64,
    law: Option<(&RotationLaw, &ScaleSet)>,
) -> Result<f64> {
    let nl: Nonlinearity = eos.nonlinearity(u_o);
    let mut j = dg_matrix(u, &nl);
    if let Some((law, scale)) = law {
        if law.is_angular_momentum() {
            let b = frechet_b_matrix(law, &u.grid, &u.legendre_coeffs(), eos, scale)?;
            j = &j + &b;
        }
    }
    Ok(certificate_from_matrix(&j, u.grid.n_r()).0)
}
