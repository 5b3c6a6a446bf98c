//! Direct tensor quadrature of the kernel integral, for validation.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::numerics::interp::cubic_weights;
use crate::numerics::quad::{legendre_table, GaussRule};

use super::field::AxiField;
use super::kernel::kernel_closed_form;

const PANEL_POINTS: usize = 6;
const GRADING_LEVELS: usize = 12;
const GRADING_RATIO: f64 = 0.2;

/// Panel breakpoints on `[a, b]` graded geometrically toward `x` (clamped into the interval).
fn graded_breaks(a: f64, b: f64, x: f64) -> Vec<f64> {
    let mut pts = vec![a, b];
    if x > a && x < b {
        pts.push(x);
    }
    for (lo, hi, toward_hi) in [(a, x, true), (x, b, false)] {
        if !(hi > lo) || x < a || x > b {
            continue;
        }
        let len = hi - lo;
        let mut d = len;
        for _ in 0..GRADING_LEVELS {
            d *= GRADING_RATIO;
            pts.push(if toward_hi { hi - d } else { lo + d });
        }
    }
    pts.sort_by(|p, q| p.partial_cmp(q).unwrap());
    pts.dedup();
    pts
}

fn panel_points(breaks: &[f64], rule: &GaussRule) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for w in breaks.windows(2) {
        out.extend(rule.on(w[0], w[1]));
    }
    out
}

/// `(1/4π) ∬ K(r, ζ, r', ζ') f(r', ζ') r'² dr' dζ'` at every grid node.
///
/// The source is the local radial cubic of the nodal values combined with
/// full polynomial interpolation in ζ. Panels are graded toward each target.
pub fn apply_k_direct(field: &AxiField) -> AxiField {
    let g = field.grid.clone();
    let nz = g.n_zeta();
    let nr = g.n_r();
    let rule = GaussRule::new(PANEL_POINTS);
    // Even ζ-Legendre coefficients per radial node.
    let degrees: Vec<usize> = (0..nz).step_by(2).collect();
    let coeffs: Vec<Vec<f64>> = (0..nr)
        .map(|i| {
            degrees
                .iter()
                .map(|&l| {
                    let s: f64 = (0..nz)
                        .map(|j| g.zeta_weights[j] * field.at(i, j) * g.p(l, j))
                        .sum();
                    (2 * l + 1) as f64 / 2.0 * s
                })
                .collect()
        })
        .collect();
    let lmax = *degrees.last().unwrap();

    let targets: Vec<(usize, usize)> = (0..nr)
        .flat_map(|i| g.half_rays().iter().map(move |h| (i, h.j)))
        .collect();
    let results: Vec<f64> = targets
        .par_iter()
        .map(|&(i, j)| {
            let r = g.r_nodes[i];
            let zeta = g.zeta_nodes[j];
            let mut rb = g.r_nodes.clone();
            let k = crate::numerics::interp::find_interval(&g.r_nodes, r);
            let mut extra = Vec::new();
            for kk in k.saturating_sub(1)..(k + 2).min(nr - 1) {
                extra.extend(graded_breaks(g.r_nodes[kk], g.r_nodes[kk + 1], r));
            }
            rb.extend(extra);
            rb.sort_by(|p, q| p.partial_cmp(q).unwrap());
            rb.dedup();
            let rpts = panel_points(&rb, &rule);
            let zpts = panel_points(&graded_breaks(-1.0, 1.0, zeta), &rule);
            let ptab: Vec<Vec<f64>> = zpts.iter().map(|&(z, _)| legendre_table(lmax, z)).collect();
            let mut acc = 0.0;
            for &(rp, wr) in &rpts {
                let (st, lw) = cubic_weights(&g.r_nodes, rp);
                let c: Vec<f64> = (0..degrees.len())
                    .map(|d| (0..4).map(|a| lw[a] * coeffs[st + a][d]).sum())
                    .collect();
                let mut line = 0.0;
                for (b, &(zp, wz)) in zpts.iter().enumerate() {
                    let f: f64 = degrees
                        .iter()
                        .enumerate()
                        .map(|(d, &l)| c[d] * ptab[b][l])
                        .sum();
                    if f != 0.0 {
                        line += wz * f * kernel_closed_form(r, zeta, rp, zp);
                    }
                }
                acc += wr * rp * rp * line;
            }
            acc / (4.0 * PI)
        })
        .collect();

    let mut out = AxiField::zeros(g.clone());
    for (&(i, j), v) in targets.iter().zip(results) {
        out.values[g.idx(i, j)] = v;
        out.values[g.idx(i, g.mirror(j))] = v;
    }
    out
}
