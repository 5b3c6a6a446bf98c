//! Tensor grids in (r, ζ) and radial node placement.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quad::{gauss_legendre, legendre_table};

/// Nodes on `[0, r_inf]` with `ξ₁` as a node, clustered at the center and at `ξ₁`.
pub fn radial_nodes(xi1: f64, r_inf: f64, n: usize) -> Vec<f64> {
    assert!(n >= 8 && r_inf > xi1 && xi1 > 0.0);
    let frac = (xi1 / r_inf).clamp(0.3, 0.85);
    let n_in = ((n - 1) as f64 * frac).round() as usize;
    let n_out = n - 1 - n_in;
    let a = 0.7;
    let mut r = Vec::with_capacity(n);
    for i in 0..=n_in {
        let t = i as f64 / n_in as f64;
        r.push(xi1 * (t - a * (2.0 * PI * t).sin() / (2.0 * PI)));
    }
    for i in 1..=n_out {
        let t = i as f64 / n_out as f64;
        r.push(xi1 + (r_inf - xi1) * (t - a * (PI * t).sin() / PI));
    }
    r[n_in] = xi1;
    r[n - 1] = r_inf;
    r
}

/// Uniform nodes on `[0, r_inf]`.
pub fn uniform_nodes(r_inf: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| r_inf * i as f64 / (n - 1) as f64).collect()
}

/// One representative of each `±ζ` pair, with its multiplicity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HalfRay {
    pub j: usize,
    pub factor: f64,
}

/// Radial nodes times Gauss–Legendre ζ nodes, with even Legendre modes up to `l_max`.
#[derive(Debug, Clone, Serialize)]
pub struct AxiGrid {
    pub r_nodes: Vec<f64>,
    pub zeta_nodes: Vec<f64>,
    pub zeta_weights: Vec<f64>,
    pub l_max: usize,
    #[serde(skip)]
    p_table: Vec<Vec<f64>>,
    #[serde(skip)]
    half: Vec<HalfRay>,
}

impl AxiGrid {
    pub fn new(r_nodes: Vec<f64>, n_zeta: usize, l_max: usize) -> Result<Self> {
        if r_nodes.len() < 4 {
            return Err(Error::invalid("N_r", "need at least 4 radial nodes"));
        }
        if r_nodes[0] != 0.0 {
            return Err(Error::invalid("r_nodes", "first node must be 0"));
        }
        if r_nodes.windows(2).any(|w| !(w[1] > w[0])) || !r_nodes.iter().all(|r| r.is_finite()) {
            return Err(Error::invalid(
                "r_nodes",
                "must be finite and strictly increasing",
            ));
        }
        if l_max % 2 != 0 {
            return Err(Error::invalid("L_max", "must be even"));
        }
        if n_zeta < l_max + 1 {
            return Err(Error::invalid(
                "N_zeta",
                format!("must be at least L_max + 1 = {}", l_max + 1),
            ));
        }
        let (zeta_nodes, zeta_weights) = gauss_legendre(n_zeta);
        let lt = l_max.max(n_zeta - 1);
        let p_table = zeta_nodes.iter().map(|&z| legendre_table(lt, z)).collect();
        let half = (n_zeta / 2..n_zeta)
            .map(|j| HalfRay {
                j,
                factor: if zeta_nodes[j] == 0.0 { 1.0 } else { 2.0 },
            })
            .collect();
        Ok(Self {
            r_nodes,
            zeta_nodes,
            zeta_weights,
            l_max,
            p_table,
            half,
        })
    }

    /// Grid adapted to a profile with first zero `xi1`.
    pub fn for_profile(
        xi1: f64,
        r_inf: f64,
        n_r: usize,
        n_zeta: usize,
        l_max: usize,
    ) -> Result<Self> {
        if !(r_inf > xi1) {
            return Err(Error::invalid("r_inf", "must exceed xi1"));
        }
        if n_r < 8 {
            return Err(Error::invalid("N_r", "need at least 8 radial nodes"));
        }
        Self::new(radial_nodes(xi1, r_inf, n_r), n_zeta, l_max)
    }

    pub fn n_r(&self) -> usize {
        self.r_nodes.len()
    }

    pub fn n_zeta(&self) -> usize {
        self.zeta_nodes.len()
    }

    /// Number of retained even modes.
    pub fn n_modes(&self) -> usize {
        self.l_max / 2 + 1
    }

    pub fn r_inf(&self) -> f64 {
        *self.r_nodes.last().unwrap()
    }

    /// `P_l(ζ_j)` for `l ≤ max(L_max, N_ζ − 1)`.
    #[inline]
    pub fn p(&self, l: usize, j: usize) -> f64 {
        self.p_table[j][l]
    }

    pub fn half_rays(&self) -> &[HalfRay] {
        &self.half
    }

    /// Index of the node mirrored through the equator.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.n_zeta() - 1 - j
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_zeta() + j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_contain_xi1_and_ends() {
        let r = radial_nodes(3.0, 4.5, 101);
        assert_eq!(r.len(), 101);
        assert_eq!(r[0], 0.0);
        assert_eq!(*r.last().unwrap(), 4.5);
        assert!(r.contains(&3.0));
        assert!(r.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zeta_nodes_pair_up() {
        let g = AxiGrid::new(uniform_nodes(1.0, 10), 9, 8).unwrap();
        for j in 0..9 {
            assert_eq!(g.zeta_nodes[j], -g.zeta_nodes[g.mirror(j)]);
            assert_eq!(g.zeta_weights[j], g.zeta_weights[g.mirror(j)]);
        }
        let s: f64 = g
            .half_rays()
            .iter()
            .map(|h| h.factor * g.zeta_weights[h.j])
            .sum();
        assert!((s - 2.0).abs() < 1e-14);
        assert!(AxiGrid::new(uniform_nodes(1.0, 10), 8, 8).is_err());
        assert!(AxiGrid::new(uniform_nodes(1.0, 10), 9, 7).is_err());
    }
}
