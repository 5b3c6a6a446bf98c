//! Grid fields and their Legendre coefficients.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::interp::cubic_weights;
use crate::numerics::quad::legendre_table;

use super::grid::AxiGrid;

/// Values `u(r_i, ζ_j)` on an [`AxiGrid`], stored row-major in `(i, j)`.
#[derive(Debug, Clone)]
pub struct AxiField {
    pub grid: Arc<AxiGrid>,
    pub values: Vec<f64>,
}

/// Even Legendre coefficients `f_l(r_i)`, `l = 0, 2, …, L_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeField {
    pub l_max: usize,
    pub n_r: usize,
    /// Index `(l / 2) * n_r + i`.
    pub data: Vec<f64>,
}

impl ModeField {
    pub fn zeros(l_max: usize, n_r: usize) -> Self {
        Self {
            l_max,
            n_r,
            data: vec![0.0; (l_max / 2 + 1) * n_r],
        }
    }

    pub fn n_modes(&self) -> usize {
        self.l_max / 2 + 1
    }

    /// Radial samples of degree `l`.
    pub fn mode(&self, l: usize) -> &[f64] {
        let m = l / 2;
        &self.data[m * self.n_r..(m + 1) * self.n_r]
    }

    pub fn mode_mut(&mut self, l: usize) -> &mut [f64] {
        let m = l / 2;
        &mut self.data[m * self.n_r..(m + 1) * self.n_r]
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

impl AxiField {
    pub fn zeros(grid: Arc<AxiGrid>) -> Self {
        let n = grid.n_r() * grid.n_zeta();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn constant(grid: Arc<AxiGrid>, c: f64) -> Self {
        let n = grid.n_r() * grid.n_zeta();
        Self {
            grid,
            values: vec![c; n],
        }
    }

    pub fn from_fn(grid: Arc<AxiGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_r() * grid.n_zeta());
        for &r in &grid.r_nodes {
            for &z in &grid.zeta_nodes {
                values.push(f(r, z));
            }
        }
        Self { grid, values }
    }

    /// Spherically symmetric field from radial samples on the grid nodes.
    pub fn from_radial(grid: Arc<AxiGrid>, radial: &[f64]) -> Self {
        let nz = grid.n_zeta();
        let mut values = Vec::with_capacity(grid.n_r() * nz);
        for &v in radial {
            values.extend(std::iter::repeat_n(v, nz));
        }
        Self { grid, values }
    }

    /// `Σ_l f_l(r_i) P_l(ζ_j)`.
    pub fn from_modes(grid: Arc<AxiGrid>, modes: &ModeField) -> Self {
        let nz = grid.n_zeta();
        let mut values = vec![0.0; grid.n_r() * nz];
        for i in 0..grid.n_r() {
            for j in 0..nz {
                let mut s = 0.0;
                for l in (0..=modes.l_max.min(grid.l_max)).step_by(2) {
                    s += modes.mode(l)[i] * grid.p(l, j);
                }
                values[i * nz + j] = s;
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_zeta() + j]
    }

    /// Radial samples along the ray `ζ_j`.
    pub fn ray(&self, j: usize) -> Vec<f64> {
        (0..self.grid.n_r()).map(|i| self.at(i, j)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &AxiField, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn sup_diff(&self, other: &AxiField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    /// `f_l(r_i) = (2l+1)/2 Σ_j w_j f(r_i, ζ_j) P_l(ζ_j)` for even `l ≤ L_max`.
    pub fn legendre_coeffs(&self) -> ModeField {
        let g = &self.grid;
        let mut out = ModeField::zeros(g.l_max, g.n_r());
        for l in (0..=g.l_max).step_by(2) {
            let c = (2 * l + 1) as f64 / 2.0;
            let m = out.mode_mut(l);
            for (i, mi) in m.iter_mut().enumerate() {
                let mut s = 0.0;
                for j in 0..g.n_zeta() {
                    s += g.zeta_weights[j] * self.at(i, j) * g.p(l, j);
                }
                *mi = c * s;
            }
        }
        out
    }

    /// Largest odd Legendre coefficient (degree < N_ζ).
    pub fn odd_content(&self) -> f64 {
        let g = &self.grid;
        let mut worst = 0.0f64;
        for l in (1..g.n_zeta()).step_by(2) {
            for i in 0..g.n_r() {
                let s: f64 = (0..g.n_zeta())
                    .map(|j| g.zeta_weights[j] * self.at(i, j) * g.p(l, j))
                    .sum();
                worst = worst.max(((2 * l + 1) as f64 / 2.0 * s).abs());
            }
        }
        worst
    }

    /// Largest violation of `u(r, −ζ) = u(r, ζ)`.
    pub fn asymmetry(&self) -> f64 {
        let g = &self.grid;
        let mut worst = 0.0f64;
        for i in 0..g.n_r() {
            for j in 0..g.n_zeta() {
                worst = worst.max((self.at(i, j) - self.at(i, g.mirror(j))).abs());
            }
        }
        worst
    }

    /// Largest spread of the values on the center row.
    pub fn center_spread(&self) -> f64 {
        let row = &self.values[..self.grid.n_zeta()];
        let (lo, hi) = row
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        hi - lo
    }

    /// Check equatorial symmetry and center consistency to `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.values.len() != self.grid.n_r() * self.grid.n_zeta() {
            return Err(Error::invalid("values", "length does not match the grid"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "non-finite entries"));
        }
        let a = self.asymmetry();
        if a > tol {
            return Err(Error::invalid(
                "values",
                format!("not equatorially symmetric (defect {a:e})"),
            ));
        }
        let c = self.center_spread();
        if c > tol {
            return Err(Error::invalid(
                "values",
                format!("center row not constant (spread {c:e})"),
            ));
        }
        Ok(())
    }

    /// Value at arbitrary `(r, ζ)`: local cubic in `r`, polynomial interpolation through all ζ nodes.
    pub fn eval(&self, r: f64, zeta: f64) -> f64 {
        let g = &self.grid;
        let nz = g.n_zeta();
        let (s, w) = cubic_weights(&g.r_nodes, r);
        let mut ray = vec![0.0; nz];
        for (j, v) in ray.iter_mut().enumerate() {
            *v = (0..4).map(|a| w[a] * self.at(s + a, j)).sum();
        }
        interpolate_in_zeta(g, &ray, zeta)
    }

    /// Radial samples along an arbitrary direction ζ.
    pub fn along(&self, zeta: f64) -> Vec<f64> {
        let g = &self.grid;
        let pz = legendre_table(g.n_zeta() - 1, zeta);
        (0..g.n_r())
            .map(|i| {
                let mut acc = 0.0;
                for (l, pl) in pz.iter().enumerate() {
                    let c: f64 = (0..g.n_zeta())
                        .map(|j| g.zeta_weights[j] * self.at(i, j) * g.p(l, j))
                        .sum();
                    acc += (2 * l + 1) as f64 / 2.0 * c * pl;
                }
                acc
            })
            .collect()
    }
}

/// Evaluate at `zeta` the polynomial of degree `N_ζ − 1` through ray values at the ζ nodes.
pub fn interpolate_in_zeta(g: &AxiGrid, ray: &[f64], zeta: f64) -> f64 {
    let nz = g.n_zeta();
    let pz = legendre_table(nz - 1, zeta);
    let mut acc = 0.0;
    for (l, pl) in pz.iter().enumerate() {
        let c: f64 = (0..nz)
            .map(|j| g.zeta_weights[j] * ray[j] * g.p(l, j))
            .sum();
        acc += (2 * l + 1) as f64 / 2.0 * c * pl;
    }
    acc
}


/// Fast off-grid evaluation from even Legendre coefficients with local radial cubics.
#[derive(Debug, Clone)]
pub struct ModeEvaluator {
    pub r_nodes: Vec<f64>,
    pub degrees: Vec<usize>,
    /// `coeffs[d][i]` is the coefficient of degree `degrees[d]` at node `i`.
    pub coeffs: Vec<Vec<f64>>,
}

impl ModeEvaluator {
    pub fn from_modes(r_nodes: &[f64], modes: &ModeField) -> Self {
        let degrees: Vec<usize> = (0..=modes.l_max).step_by(2).collect();
        let coeffs = degrees.iter().map(|&l| modes.mode(l).to_vec()).collect();
        Self {
            r_nodes: r_nodes.to_vec(),
            degrees,
            coeffs,
        }
    }

    /// All even degrees resolved by the ζ nodes.
    pub fn from_field(field: &AxiField) -> Self {
        let g = &field.grid;
        let nz = g.n_zeta();
        let degrees: Vec<usize> = (0..nz).step_by(2).collect();
        let coeffs = degrees
            .iter()
            .map(|&l| {
                (0..g.n_r())
                    .map(|i| {
                        let s: f64 = (0..nz)
                            .map(|j| g.zeta_weights[j] * field.at(i, j) * g.p(l, j))
                            .sum();
                        (2 * l + 1) as f64 / 2.0 * s
                    })
                    .collect()
            })
            .collect();
        Self {
            r_nodes: g.r_nodes.clone(),
            degrees,
            coeffs,
        }
    }

    pub fn max_degree(&self) -> usize {
        *self.degrees.last().unwrap()
    }

    pub fn eval(&self, r: f64, zeta: f64) -> f64 {
        let (s, w) = cubic_weights(&self.r_nodes, r);
        let p = legendre_table(self.max_degree(), zeta);
        let mut acc = 0.0;
        for (d, &l) in self.degrees.iter().enumerate() {
            let c = &self.coeffs[d];
            acc += p[l] * (w[0] * c[s] + w[1] * c[s + 1] + w[2] * c[s + 2] + w[3] * c[s + 3]);
        }
        acc
    }
}
