//! The potential operator through its Legendre multipole expansion.

use std::sync::{Arc, OnceLock};

use crate::numerics::interp::{lagrange4, stencil_start};
use crate::numerics::quad::GaussRule;

use super::field::{AxiField, ModeField};
use super::grid::AxiGrid;

const INTERVAL_POINTS: usize = 4;
const ROOT_POINTS: usize = 8;

fn interval_rule() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| GaussRule::new(INTERVAL_POINTS))
}

fn root_rule() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| GaussRule::new(ROOT_POINTS))
}

/// A radial quadrature point with the cubic interpolation weights of its interval.
#[derive(Debug, Clone, Copy)]
pub struct QPoint {
    pub s: f64,
    pub w: f64,
    pub lw: [f64; 4],
}

/// Radial quadrature along each half-ray, interval by interval.
#[derive(Debug, Clone)]
pub struct RayPlan {
    pub grid: Arc<AxiGrid>,
    pub points: Vec<QPoint>,
    /// Offsets into `points` for segment `h * (n_r - 1) + k`.
    pub seg: Vec<usize>,
}

impl RayPlan {
    pub fn n_intervals(&self) -> usize {
        self.grid.n_r() - 1
    }

    #[inline]
    pub fn segment(&self, h: usize, k: usize) -> &[QPoint] {
        let s = h * self.n_intervals() + k;
        &self.points[self.seg[s]..self.seg[s + 1]]
    }

    /// Gauss points on every interval of every ray.
    pub fn plain(grid: Arc<AxiGrid>) -> Self {
        Self::build(grid, None)
    }

    /// Quadrature of integrands supported where `u > 0`.
    ///
    /// Intervals where `u` is nonpositive at both ends are dropped; intervals
    /// holding a sign change are integrated up to the root of the cubic interpolant.
    pub fn positive_part(u: &AxiField) -> Self {
        Self::build(u.grid.clone(), Some(u))
    }

    fn build(grid: Arc<AxiGrid>, u: Option<&AxiField>) -> Self {
        let r = &grid.r_nodes;
        let n = r.len();
        let mut points = Vec::with_capacity(grid.half_rays().len() * (n - 1) * INTERVAL_POINTS);
        let mut seg = vec![0];
        for hr in grid.half_rays() {
            let ray = u.map(|u| u.ray(hr.j));
            for k in 0..n - 1 {
                let st = stencil_start(n, k);
                let (a, b) = (r[k], r[k + 1]);
                let push = |points: &mut Vec<QPoint>, s: f64, w: f64| {
                    points.push(QPoint {
                        s,
                        w,
                        lw: lagrange4(r, st, s),
                    })
                };
                match &ray {
                    None => {
                        for (s, w) in interval_rule().on(a, b) {
                            push(&mut points, s, w);
                        }
                    }
                    Some(v) => {
                        let (ua, ub) = (v[k], v[k + 1]);
                        if ua > 0.0 && ub > 0.0 {
                            for (s, w) in interval_rule().on(a, b) {
                                push(&mut points, s, w);
                            }
                        } else if ua > 0.0 || ub > 0.0 {
                            let p = |x: f64| {
                                let lw = lagrange4(r, st, x);
                                (0..4).map(|c| lw[c] * v[st + c]).sum::<f64>()
                            };
                            let root = interval_root(p, a, b, ua > 0.0);
                            if ua > 0.0 {
                                let len = root - a;
                                for (t, w) in root_rule().on(0.0, 1.0) {
                                    let q = 1.0 - t;
                                    push(&mut points, root - len * q * q, w * 2.0 * len * q);
                                }
                            } else {
                                let len = b - root;
                                for (t, w) in root_rule().on(0.0, 1.0) {
                                    let q = 1.0 - t;
                                    push(&mut points, root + len * q * q, w * 2.0 * len * q);
                                }
                            }
                        }
                    }
                }
                seg.push(points.len());
            }
        }
        Self { grid, points, seg }
    }

    /// Values of a grid field at every plan point.
    pub fn interpolate(&self, field: &AxiField) -> Vec<f64> {
        let n = self.grid.n_r();
        let mut out = Vec::with_capacity(self.points.len());
        for (h, hr) in self.grid.half_rays().iter().enumerate() {
            for k in 0..n - 1 {
                let st = stencil_start(n, k);
                for p in self.segment(h, k) {
                    out.push((0..4).map(|c| p.lw[c] * field.at(st + c, hr.j)).sum());
                }
            }
        }
        out
    }

    /// Values of `f(r, ζ)` at every plan point.
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        for (h, hr) in self.grid.half_rays().iter().enumerate() {
            let z = self.grid.zeta_nodes[hr.j];
            for k in 0..self.n_intervals() {
                for p in self.segment(h, k) {
                    out.push(f(p.s, z));
                }
            }
        }
        out
    }

    /// Inner and outer radial moments of per-point source values, per mode and interval.
    pub fn moments(&self, vals: &[f64]) -> Moments {
        let g = &self.grid;
        let nk = self.n_intervals();
        let nm = g.n_modes();
        let mut inner = vec![0.0; nm * nk];
        let mut outer = vec![0.0; nm * nk];
        let mut ray_in = vec![0.0; nm];
        let mut ray_out = vec![0.0; nm];
        let mut off = 0;
        for (h, hr) in g.half_rays().iter().enumerate() {
            let coef: Vec<f64> = (0..nm)
                .map(|m| {
                    let l = 2 * m;
                    hr.factor * (2 * l + 1) as f64 / 2.0 * g.zeta_weights[hr.j] * g.p(l, hr.j)
                })
                .collect();
            for k in 0..nk {
                ray_in.iter_mut().for_each(|v| *v = 0.0);
                ray_out.iter_mut().for_each(|v| *v = 0.0);
                for p in self.segment(h, k) {
                    let v = vals[off] * p.w;
                    off += 1;
                    let s2 = p.s * p.s;
                    let mut up = v * s2;
                    let mut down = v * p.s;
                    for m in 0..nm {
                        ray_in[m] += up;
                        ray_out[m] += down;
                        up *= s2;
                        down /= s2;
                    }
                }
                for m in 0..nm {
                    inner[m * nk + k] += coef[m] * ray_in[m];
                    outer[m * nk + k] += coef[m] * ray_out[m];
                }
            }
        }
        Moments {
            n_modes: nm,
            n_intervals: nk,
            inner,
            outer,
        }
    }
}

/// Root of `p` in `[a, b]` by bisection; `positive_left` gives the sign at `a`.
fn interval_root(p: impl Fn(f64) -> f64, a: f64, b: f64, positive_left: bool) -> f64 {
    let (mut lo, mut hi) = (a, b);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (p(mid) > 0.0) == positive_left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫ f_l s^{l+2} ds` and `∫ f_l s^{1−l} ds` over each node interval.
#[derive(Debug, Clone)]
pub struct Moments {
    pub n_modes: usize,
    pub n_intervals: usize,
    pub inner: Vec<f64>,
    pub outer: Vec<f64>,
}

impl Moments {
    /// `(Kf)_l(r_i)` at every node.
    pub fn potential(&self, r_nodes: &[f64]) -> ModeField {
        let nk = self.n_intervals;
        let n = nk + 1;
        let mut out = ModeField::zeros(2 * (self.n_modes - 1), n);
        for m in 0..self.n_modes {
            let l = 2 * m;
            let inn = &self.inner[m * nk..(m + 1) * nk];
            let outr = &self.outer[m * nk..(m + 1) * nk];
            let mut suffix = vec![0.0; n];
            for k in (0..nk).rev() {
                suffix[k] = suffix[k + 1] + outr[k];
            }
            let dst = out.mode_mut(l);
            let mut prefix = 0.0;
            let inv = 1.0 / (2 * l + 1) as f64;
            for i in 0..n {
                if i > 0 {
                    prefix += inn[i - 1];
                }
                let r = r_nodes[i];
                dst[i] = if r == 0.0 {
                    if l == 0 {
                        suffix[0]
                    } else {
                        0.0
                    }
                } else {
                    inv * (prefix * r.powi(-(l as i32 + 1)) + suffix[i] * r.powi(l as i32))
                };
            }
        }
        out
    }

    /// `(Kf)(0, 0)`.
    pub fn center_value(&self) -> f64 {
        self.outer[..self.n_intervals]
            .iter()
            .rev()
            .fold(0.0, |a, v| a + v)
    }

    /// `(Kf)_l(r_i) − δ_{l0} (Kf)(0, 0)`, with the monopole difference formed without cancellation.
    pub fn potential_centered(&self, r_nodes: &[f64]) -> ModeField {
        let mut out = self.potential(r_nodes);
        let nk = self.n_intervals;
        let dst = out.mode_mut(0);
        let (mut pin, mut pout) = (0.0, 0.0);
        dst[0] = 0.0;
        for i in 1..=nk {
            pin += self.inner[i - 1];
            pout += self.outer[i - 1];
            dst[i] = pin / r_nodes[i] - pout;
        }
        out
    }
}

/// `Kf` for a grid field `f`, interpolated radially by local cubics.
pub fn apply_k_multipole(field: &AxiField) -> AxiField {
    let grid = field.grid.clone();
    let plan = RayPlan::plain(grid.clone());
    let vals = plan.interpolate(field);
    let modes = plan.moments(&vals).potential(&grid.r_nodes);
    AxiField::from_modes(grid, &modes)
}

/// `Kf` in Legendre modes for `f` given pointwise.
pub fn apply_k_function_modes(grid: Arc<AxiGrid>, f: impl Fn(f64, f64) -> f64) -> ModeField {
    let plan = RayPlan::plain(grid.clone());
    let vals = plan.sample(f);
    plan.moments(&vals).potential(&grid.r_nodes)
}

/// `Kf` on the grid for `f` given pointwise.
pub fn apply_k_function(grid: Arc<AxiGrid>, f: impl Fn(f64, f64) -> f64) -> AxiField {
    let modes = apply_k_function_modes(grid.clone(), f);
    AxiField::from_modes(grid, &modes)
}

/// `K(F(u))` for a nonlinearity vanishing on `u ≤ 0`, with root-aware radial quadrature.
pub fn apply_k_positive_part(u: &AxiField, f: impl Fn(f64) -> f64) -> (ModeField, f64) {
    let plan = RayPlan::positive_part(u);
    let vals: Vec<f64> = plan.interpolate(u).into_iter().map(f).collect();
    let mom = plan.moments(&vals);
    (mom.potential(&u.grid.r_nodes), mom.center_value())
}
