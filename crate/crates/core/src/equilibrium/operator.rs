//! The nonlinear map `G(u) = 1 + K(f∘u) − K(f∘u)(0,0)` and its linearization.

use faer::Mat;

use crate::eos::{EquationOfState, Nonlinearity};
use crate::numerics::interp::stencil_start;
use crate::potential::field::{AxiField, ModeField};
use crate::potential::multipole::RayPlan;

/// `G(u)` in retained Legendre modes.
pub fn g_modes(u: &AxiField, law: &Nonlinearity) -> ModeField {
    let plan = RayPlan::positive_part(u);
    let vals: Vec<f64> = plan.interpolate(u).into_iter().map(|v| law.f(v)).collect();
    let mut out = plan.moments(&vals).potential_centered(&u.grid.r_nodes);
    out.mode_mut(0).iter_mut().for_each(|v| *v += 1.0);
    out
}

/// `G(u)` on the grid.
pub fn apply_g(u: &AxiField, eos: &EquationOfState, u_o: f64) -> AxiField {
    AxiField::from_modes(u.grid.clone(), &g_modes(u, &eos.nonlinearity(u_o)))
}

/// `DG(u)h = K(f'(u)h) − K(f'(u)h)(0,0)` in retained modes.
pub fn dg_modes(u: &AxiField, h: &AxiField, law: &Nonlinearity) -> ModeField {
    let plan = RayPlan::positive_part(u);
    let uq = plan.interpolate(u);
    let hq = plan.interpolate(h);
    let vals: Vec<f64> = uq
        .iter()
        .zip(&hq)
        .map(|(&a, &b)| law.fprime(a) * b)
        .collect();
    plan.moments(&vals).potential_centered(&u.grid.r_nodes)
}

/// `DG(u)h` on the grid.
pub fn frechet_g_apply(u: &AxiField, h: &AxiField, eos: &EquationOfState, u_o: f64) -> AxiField {
    AxiField::from_modes(u.grid.clone(), &dg_modes(u, h, &eos.nonlinearity(u_o)))
}

/// Dense matrix of `DG(u)` acting on retained-mode coordinates `(l/2)·N_r + i`.
pub fn dg_matrix(u: &AxiField, law: &Nonlinearity) -> Mat<f64> {
    let grid = &u.grid;
    let plan = RayPlan::positive_part(u);
    let uq = plan.interpolate(u);
    let nr = grid.n_r();
    let nk = nr - 1;
    let nm = grid.n_modes();
    let nn = nm * nr;
    // Per (block, interval): weights on the four stencil nodes.
    let mut bin = vec![[0.0f64; 4]; nm * nm * nk];
    let mut bout = vec![[0.0f64; 4]; nm * nm * nk];
    let mut a_in = vec![[0.0f64; 4]; nm];
    let mut a_out = vec![[0.0f64; 4]; nm];
    let mut off = 0;
    for (h, hr) in grid.half_rays().iter().enumerate() {
        let coef: Vec<f64> = (0..nm)
            .map(|m| {
                let l = 2 * m;
                hr.factor * (2 * l + 1) as f64 / 2.0 * grid.zeta_weights[hr.j] * grid.p(l, hr.j)
            })
            .collect();
        let pcol: Vec<f64> = (0..nm).map(|m| grid.p(2 * m, hr.j)).collect();
        for k in 0..nk {
            let seg = plan.segment(h, k);
            if seg.is_empty() {
                continue;
            }
            a_in.iter_mut().for_each(|v| *v = [0.0; 4]);
            a_out.iter_mut().for_each(|v| *v = [0.0; 4]);
            let mut any = false;
            for p in seg {
                let fp = law.fprime(uq[off]);
                off += 1;
                if fp == 0.0 {
                    continue;
                }
                any = true;
                let v = fp * p.w;
                let s2 = p.s * p.s;
                let mut up = v * s2;
                let mut down = v * p.s;
                for m in 0..nm {
                    for a in 0..4 {
                        a_in[m][a] += up * p.lw[a];
                        a_out[m][a] += down * p.lw[a];
                    }
                    up *= s2;
                    down /= s2;
                }
            }
            if !any {
                continue;
            }
            for m in 0..nm {
                for mp in 0..nm {
                    let c = coef[m] * pcol[mp];
                    let idx = (m * nm + mp) * nk + k;
                    for a in 0..4 {
                        bin[idx][a] += c * a_in[m][a];
                        bout[idx][a] += c * a_out[m][a];
                    }
                }
            }
        }
    }

    let r = &grid.r_nodes;
    let mut mat = Mat::<f64>::zeros(nn, nn);
    let mut pin = vec![0.0; nr];
    let mut pout = vec![0.0; nr];
    let mut total = vec![0.0; nr];
    for m in 0..nm {
        let l = 2 * m;
        let inv = 1.0 / (2 * l + 1) as f64;
        for mp in 0..nm {
            let base = (m * nm + mp) * nk;
            pin.iter_mut().for_each(|v| *v = 0.0);
            pout.iter_mut().for_each(|v| *v = 0.0);
            total.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..nk {
                let st = stencil_start(nr, k);
                for a in 0..4 {
                    total[st + a] += bout[base + k][a];
                }
            }
            for i in 1..nr {
                let st = stencil_start(nr, i - 1);
                for a in 0..4 {
                    pin[st + a] += bin[base + i - 1][a];
                    pout[st + a] += bout[base + i - 1][a];
                }
                let ri = r[i];
                let row = m * nr + i;
                let col0 = mp * nr;
                if l == 0 {
                    for c in 0..nr {
                        mat[(row, col0 + c)] = pin[c] / ri - pout[c];
                    }
                } else {
                    let lo = ri.powi(-(l as i32 + 1));
                    let hi = ri.powi(l as i32);
                    for c in 0..nr {
                        mat[(row, col0 + c)] = inv * (lo * pin[c] + hi * (total[c] - pout[c]));
                    }
                }
            }
        }
    }
    mat
}
