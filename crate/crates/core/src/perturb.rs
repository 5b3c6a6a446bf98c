//! First-order response to slow uniform rotation.
//!
//! Legendre modes of the response solve `[−r⁻²(r²y')' + j(j+1)/r²] y = q y`
//! with `q = f'(θ)`, through the integral representation
//! `y = (2j+1)⁻¹ [A r^j + r^{−j−1} ∫₀^r q y s^{j+2} ds + r^j ∫_r^ξ₁ q y s^{1−j} ds]`.

use std::sync::{Arc, OnceLock};

use faer::linalg::solvers::Solve;
use faer::Mat;
use log::warn;
use serde::Serialize;

use crate::equilibrium::checks::identity_minus;
use crate::equilibrium::operator::dg_matrix;
use crate::equilibrium::solver::{extended_theta, EquilibriumSolution};
use crate::error::{Error, Result};
use crate::numerics::ode::{dp_step, integrate_until, StepControl, Stop};
use crate::numerics::quad::{legendre, GaussRule};
use crate::potential::field::{AxiField, ModeField};
use crate::potential::grid::AxiGrid;
use crate::radial::{RadialProfile, SERIES_RADIUS};

const PANELS: usize = 160;
const ORDER: usize = 4;

fn rule() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| GaussRule::new(ORDER))
}

/// `∫_{-1}^{x} L_b(t) dt` for the Lagrange basis on the reference Gauss nodes.
fn lagrange_integrals(x: f64) -> [f64; ORDER] {
    let nodes = &rule().nodes;
    let mut out = [0.0; ORDER];
    for (b, o) in out.iter_mut().enumerate() {
        *o = rule().integrate(-1.0, x, |t| {
            let mut v = 1.0;
            for c in 0..ORDER {
                if c != b {
                    v *= (t - nodes[c]) / (nodes[b] - nodes[c]);
                }
            }
            v
        });
    }
    out
}

fn partial_table() -> &'static [[f64; ORDER]; ORDER] {
    static T: OnceLock<[[f64; ORDER]; ORDER]> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = [[0.0; ORDER]; ORDER];
        for (a, row) in t.iter_mut().enumerate() {
            *row = lagrange_integrals(rule().nodes[a]);
        }
        t
    })
}

/// Panel quadrature on `[0, ξ₁]` in `t` with `s = ξ₁(1 − (1 − t)²)`.
#[derive(Debug, Clone)]
struct ModeGrid {
    xi1: f64,
    /// Radii at the panel Gauss points, panel-major.
    s: Vec<f64>,
    /// `ds/dt` at the points.
    ds: Vec<f64>,
    /// `q(s) = f'(θ(s))`.
    q: Vec<f64>,
    psi: Vec<f64>,
}

impl ModeGrid {
    fn new(profile: &RadialProfile) -> Self {
        let xi1 = profile.xi1;
        let law = profile.nonlinearity();
        let h = 1.0 / PANELS as f64;
        let n = PANELS * ORDER;
        let (mut s, mut ds, mut q, mut psi) = (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        );
        for p in 0..PANELS {
            for (t, _) in rule().on(p as f64 * h, (p + 1) as f64 * h) {
                let w = 1.0 - t;
                let r = xi1 * (1.0 - w * w);
                s.push(r);
                ds.push(2.0 * xi1 * w);
                q.push(law.fprime(profile.theta_at(r).0));
                psi.push(psi_value(profile, r));
            }
        }
        Self { xi1, s, ds, q, psi }
    }

    fn len(&self) -> usize {
        self.s.len()
    }

    /// Inner and outer integrals of `q y` for degree `j` at every point and
    /// the total inner integral.
    fn moments(&self, j: usize, y: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let n = self.len();
        let h = 0.5 / PANELS as f64;
        let jf = j as i32;
        let fin: Vec<f64> = (0..n)
            .map(|k| self.q[k] * y[k] * self.s[k].powi(jf + 2) * self.ds[k])
            .collect();
        let fout: Vec<f64> = (0..n)
            .map(|k| self.q[k] * y[k] * self.s[k].powi(1 - jf) * self.ds[k])
            .collect();
        let tab = partial_table();
        let w = &rule().weights;
        let mut inner = vec![0.0; n];
        let mut prefix_out = vec![0.0; n];
        let (mut cin, mut cout) = (0.0, 0.0);
        for p in 0..PANELS {
            let o = p * ORDER;
            for a in 0..ORDER {
                let (mut si, mut so) = (0.0, 0.0);
                for b in 0..ORDER {
                    si += tab[a][b] * fin[o + b];
                    so += tab[a][b] * fout[o + b];
                }
                inner[o + a] = cin + h * si;
                prefix_out[o + a] = cout + h * so;
            }
            for b in 0..ORDER {
                cin += h * w[b] * fin[o + b];
                cout += h * w[b] * fout[o + b];
            }
        }
        let outer = prefix_out.iter().map(|v| cout - v).collect();
        (inner, outer, cin)
    }

    /// Panel coordinate of `r ∈ [0, ξ₁]`.
    fn locate(&self, r: f64) -> (usize, f64) {
        let t = 1.0 - (1.0 - (r / self.xi1).clamp(0.0, 1.0)).sqrt();
        let p = ((t * PANELS as f64) as usize).min(PANELS - 1);
        let x = 2.0 * (t * PANELS as f64 - p as f64) - 1.0;
        (p, x.clamp(-1.0, 1.0))
    }
}

fn psi_value(profile: &RadialProfile, r: f64) -> f64 {
    if r <= SERIES_RADIUS {
        profile.nonlinearity().f(1.0) * r / 3.0
    } else {
        profile.psi_at(r)
    }
}

/// One Legendre mode of the linear response.
#[derive(Debug, Clone, Serialize)]
pub struct ModeSolution {
    pub j: usize,
    pub a_coef: f64,
    /// Sample radii on `[0, r_∞]` (the profile nodes).
    pub r_nodes: Vec<f64>,
    pub h: Vec<f64>,
    /// `H = h/ψ` on `(0, ξ₁]`, paired with `h_r_nodes`.
    pub big_h: Vec<f64>,
    pub h_r_nodes: Vec<f64>,
    pub iterations: usize,
    #[serde(skip)]
    rep: Option<Arc<Representation>>,
}

/// Converged unknowns and the data needed to evaluate the representation anywhere.
#[derive(Debug, Clone)]
struct Representation {
    grid: ModeGrid,
    j: usize,
    a_coef: f64,
    center: bool,
    y: Vec<f64>,
    src: Option<SourceKind>,
}

/// Inhomogeneities supported by [`solve_mode`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SourceKind {
    /// `r²/6`, the isotropic part of the rigid-rotation forcing.
    IsotropicRotation,
}

impl SourceKind {
    fn value(&self, r: f64) -> f64 {
        match self {
            SourceKind::IsotropicRotation => r * r / 6.0,
        }
    }
}

impl Representation {
    fn eval(&self, r: f64) -> f64 {
        let g = &self.grid;
        let j = self.j as i32;
        let inv = 1.0 / (2 * self.j + 1) as f64;
        let src = self.src.map_or(0.0, |s| s.value(r));
        let (_, _, total_in) = g.moments(self.j, &self.y);
        let (inner, outer_prefix) = if r >= g.xi1 {
            (total_in, None)
        } else {
            let (p, x) = g.locate(r);
            let li = lagrange_integrals(x);
            let h = 0.5 / PANELS as f64;
            let (mut cin, mut cout) = (0.0, 0.0);
            let w = &rule().weights;
            for pp in 0..p {
                for b in 0..ORDER {
                    let k = pp * ORDER + b;
                    let c = h * w[b] * g.q[k] * self.y[k] * g.ds[k];
                    cin += c * g.s[k].powi(j + 2);
                    cout += c * g.s[k].powi(1 - j);
                }
            }
            for b in 0..ORDER {
                let k = p * ORDER + b;
                let c = h * li[b] * g.q[k] * self.y[k] * g.ds[k];
                cin += c * g.s[k].powi(j + 2);
                cout += c * g.s[k].powi(1 - j);
            }
            (cin, Some(cout))
        };
        let total_out = total_outer(g, self.j, &self.y);
        let outer = outer_prefix.map_or(0.0, |c| total_out - c);
        if r == 0.0 {
            let base = if self.j == 0 { total_out } else { 0.0 };
            let center = if self.center { total_out } else { 0.0 };
            return src + inv * (base - center);
        }
        let mut v = inv * (self.a_coef * r.powi(j) + inner * r.powi(-j - 1) + outer * r.powi(j));
        if self.center {
            v -= inv * total_out;
        }
        src + v
    }
}

impl ModeSolution {
    /// `h_j(r)` anywhere in `[0, ∞)`.
    pub fn eval(&self, r: f64) -> f64 {
        match &self.rep {
            Some(rep) => rep.eval(r),
            None => 0.0,
        }
    }

    /// `sup |h_j|` over the sample radii.
    pub fn sup_norm(&self) -> f64 {
        self.h.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}

/// Fixed-point settings for [`solve_mode`].
#[derive(Debug, Clone, Copy)]
pub struct ModeOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ModeOptions {
    fn default() -> Self {
        Self {
            damping: 1.0,
            tol: 1e-14,
            max_iter: 5000,
        }
    }
}

fn representation_map(
    g: &ModeGrid,
    j: usize,
    a: f64,
    center: bool,
    src: Option<SourceKind>,
    y: &[f64],
) -> Vec<f64> {
    let (inner, outer, _) = g.moments(j, y);
    let inv = 1.0 / (2 * j + 1) as f64;
    let jf = j as i32;
    let c0 = if center { total_outer(g, j, y) } else { 0.0 };
    (0..g.len())
        .map(|k| {
            let r = g.s[k];
            let s = src.map_or(0.0, |s| s.value(r));
            s + inv * (a * r.powi(jf) + inner[k] * r.powi(-jf - 1) + outer[k] * r.powi(jf) - c0)
        })
        .collect()
}

fn total_outer(g: &ModeGrid, j: usize, y: &[f64]) -> f64 {
    let h = 0.5 / PANELS as f64;
    let w = &rule().weights;
    let jf = j as i32;
    (0..g.len())
        .map(|k| h * w[k % ORDER] * g.q[k] * y[k] * g.ds[k] * g.s[k].powi(1 - jf))
        .sum()
}

/// Solve one mode by fixed-point iteration on its integral representation.
///
/// `center` subtracts the value at the origin (used for `j = 0`).
/// Homogeneous problems (`a_coef = 0`, no source) start from `r^j` so that
/// the iteration is exercised.
pub fn solve_mode(
    profile: &RadialProfile,
    j: usize,
    source: Option<SourceKind>,
    a_coef: f64,
    center: bool,
    opts: &ModeOptions,
) -> Result<ModeSolution> {
    if j % 2 == 1 {
        return Err(Error::invalid(
            "j",
            "odd modes vanish by equatorial symmetry",
        ));
    }
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::invalid("damping", "must lie in (0, 1]"));
    }
    let g = ModeGrid::new(profile);
    let n = g.len();
    let homogeneous = a_coef == 0.0 && source.is_none();
    let mut y: Vec<f64> = if homogeneous {
        g.s.iter().map(|r| (r / g.xi1).powi(j as i32)).collect()
    } else {
        vec![0.0; n]
    };
    let scale = |y: &[f64]| y.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut iterations = 0;
    loop {
        let ty = representation_map(&g, j, a_coef, center, source, &y);
        let mut change = 0.0f64;
        for (yk, tk) in y.iter_mut().zip(&ty) {
            let next = (1.0 - opts.damping) * *yk + opts.damping * tk;
            change = change.max((next - *yk).abs());
            *yk = next;
        }
        iterations += 1;
        let s = scale(&y);
        if change <= opts.tol * s.max(1.0) || (homogeneous && s < 1e-30) {
            break;
        }
        if iterations >= opts.max_iter || !change.is_finite() {
            return Err(Error::ModeNonConvergence { j, iterations });
        }
    }
    let rep = Arc::new(Representation {
        grid: g,
        j,
        a_coef,
        center,
        y,
        src: source,
    });
    let r_nodes = profile.r_nodes.clone();
    let h: Vec<f64> = r_nodes.iter().map(|&r| rep.eval(r)).collect();
    let (h_r_nodes, big_h): (Vec<f64>, Vec<f64>) = r_nodes
        .iter()
        .zip(&h)
        .filter(|(&r, _)| r > 0.0 && r <= profile.xi1)
        .map(|(&r, &v)| (r, v / psi_value(profile, r)))
        .unzip();
    Ok(ModeSolution {
        j,
        a_coef,
        r_nodes,
        h,
        big_h,
        h_r_nodes,
        iterations,
        rep: Some(rep),
    })
}

/// `‖D⁻¹TD‖_∞` for the homogeneous representation map `T` of degree `j`, with `D = diag(ψ)`.
///
/// Uses the positive Nyström rule (full Gauss weights, kernel split at the
/// target), whose row sums approximate the continuous operator's.
pub fn iteration_lipschitz(profile: &RadialProfile, j: usize) -> f64 {
    let g = ModeGrid::new(profile);
    let n = g.len();
    let h = 0.5 / PANELS as f64;
    let w = &rule().weights;
    let inv = 1.0 / (2 * j + 1) as f64;
    let jf = j as i32;
    let mut worst = 0.0f64;
    for r in 0..n {
        let x = g.s[r];
        let mut sum = 0.0;
        for c in 0..n {
            let s = g.s[c];
            let k = if s <= x {
                x.powi(-jf - 1) * s.powi(jf + 2)
            } else {
                x.powi(jf) * s.powi(1 - jf)
            };
            sum += h * w[c % ORDER] * g.ds[c] * g.q[c] * k * g.psi[c];
        }
        worst = worst.max(inv * sum / g.psi[r]);
    }
    worst
}

/// Mode solution by shooting: the regular solution scaled to the far-field condition.
///
/// For `center` (j = 0 with the isotropic source) the regular particular solution
/// with `y(0) = 0` is returned.
pub fn shoot_mode(
    profile: &RadialProfile,
    j: usize,
    a_coef: f64,
    source: Option<SourceKind>,
    tol: f64,
) -> Result<ShotMode> {
    let law = profile.nonlinearity();
    let jf = j as f64;
    let ll = jf * (jf + 1.0);
    let forced = source.is_some();
    let f = move |r: f64, y: &[f64; 4]| {
        let q = law.fprime(y[0]);
        let rhs = if forced { 1.0 } else { 0.0 };
        [
            y[1],
            -law.f(y[0]) - 2.0 * y[1] / r,
            y[3],
            rhs - 2.0 * y[3] / r + (ll / (r * r) - q) * y[2],
        ]
    };
    let r0 = SERIES_RADIUS;
    let (th, dth) = profile.theta_at(r0);
    let q0 = law.fprime(1.0);
    let (y0, dy0) = if forced {
        // y = r²/6 + c r⁴, (20c) = −q0/6 at leading order
        let c = -q0 / 120.0;
        (
            r0 * r0 / 6.0 + c * r0.powi(4),
            r0 / 3.0 + 4.0 * c * r0.powi(3),
        )
    } else {
        let c = -q0 / (4.0 * jf + 6.0);
        (
            r0.powi(j as i32) * (1.0 + c * r0 * r0),
            jf * r0.powf(jf - 1.0) + (jf + 2.0) * c * r0.powi(j as i32 + 1),
        )
    };
    let mut ctl = StepControl::new(tol);
    ctl.h_init = 1e-3;
    let mut trace = Vec::new();
    match integrate_until(
        &f,
        r0,
        [th, dth, y0, dy0],
        profile.xi1,
        &ctl,
        |_, _| 1.0,
        &mut trace,
    )? {
        Stop::End => {}
        Stop::Event { t, .. } => return Err(Error::StepFailure { r: t }),
    }
    let (xe, ye) = *trace.last().unwrap();
    let (y, dy) = (ye[2], ye[3]);
    let scale = if forced {
        1.0
    } else {
        // exterior: y = a r^j + b r^{−j−1}; (2j+1) a is the far-field constant
        let a = (y * (jf + 1.0) + xe * dy) / ((2.0 * jf + 1.0) * xe.powi(j as i32));
        if a == 0.0 {
            return Err(Error::Domain(
                "regular solution has no growing exterior part".into(),
            ));
        }
        a_coef / ((2.0 * jf + 1.0) * a)
    };
    let ext = if forced {
        // y − r²/6 = c + d/r outside
        let c = y - xe * xe / 6.0 + xe * (dy - xe / 3.0);
        let d = -(dy - xe / 3.0) * xe * xe;
        [c, d]
    } else {
        let a = (y * (jf + 1.0) + xe * dy) / ((2.0 * jf + 1.0) * xe.powi(j as i32));
        let b = (y - a * xe.powi(j as i32)) * xe.powi(j as i32 + 1);
        [a, b]
    };
    Ok(ShotMode {
        j,
        forced,
        scale,
        ext,
        xi1: profile.xi1,
        law,
        trace,
        q0,
    })
}

/// Result of [`shoot_mode`].
#[derive(Debug, Clone)]
pub struct ShotMode {
    pub j: usize,
    forced: bool,
    pub scale: f64,
    ext: [f64; 2],
    xi1: f64,
    law: crate::eos::Nonlinearity,
    trace: Vec<(f64, [f64; 4])>,
    q0: f64,
}

impl ShotMode {
    pub fn eval(&self, r: f64) -> f64 {
        let jf = self.j as f64;
        let raw = if r >= self.xi1 {
            if self.forced {
                r * r / 6.0 + self.ext[0] + self.ext[1] / r
            } else {
                self.ext[0] * r.powi(self.j as i32) + self.ext[1] * r.powi(-(self.j as i32) - 1)
            }
        } else if r <= self.trace[0].0 {
            if self.forced {
                r * r / 6.0 - self.q0 / 120.0 * r.powi(4)
            } else {
                r.powi(self.j as i32) * (1.0 - self.q0 / (4.0 * jf + 6.0) * r * r)
            }
        } else {
            let law = self.law;
            let ll = jf * (jf + 1.0);
            let forced = self.forced;
            let f = move |r: f64, y: &[f64; 4]| {
                let q = law.fprime(y[0]);
                let rhs = if forced { 1.0 } else { 0.0 };
                [
                    y[1],
                    -law.f(y[0]) - 2.0 * y[1] / r,
                    y[3],
                    rhs - 2.0 * y[3] / r + (ll / (r * r) - q) * y[2],
                ]
            };
            let k = match self
                .trace
                .binary_search_by(|p| p.0.partial_cmp(&r).unwrap())
            {
                Ok(i) => return self.scale * self.trace[i].1[2],
                Err(i) => i - 1,
            };
            let (t, y) = self.trace[k];
            dp_step(&f, t, &y, r - t).0[2]
        };
        self.scale * raw
    }
}

/// The rotational response `h = h₀ + h₂ P₂` and its cross-checks.
#[derive(Debug, Clone, Serialize)]
pub struct HField {
    pub nu: f64,
    pub xi1: f64,
    pub mu1: f64,
    pub h0: ModeSolution,
    pub h2: ModeSolution,
    /// `sup |h₂ − h₂(shooting)|` over the sample radii.
    pub shooting_gap: f64,
}

impl HField {
    pub fn eval(&self, r: f64, zeta: f64) -> f64 {
        self.h0.eval(r) + self.h2.eval(r) * legendre(2, zeta)
    }
}

/// `h₀` from the isotropic forcing (centered, `j = 0`) and `h₂` from the
/// quadrupolar forcing (`j = 2`, `A = −5/6`), with a shooting cross-check.
pub fn compute_h_field(profile: &RadialProfile) -> Result<HField> {
    let nu = profile.nonlinearity().nu;
    if !(nu > 1.0 && nu < 5.0) {
        return Err(Error::invalid("nu", "perturbation theory needs 1 < nu < 5"));
    }
    let h0 = solve_mode(
        profile,
        0,
        Some(SourceKind::IsotropicRotation),
        0.0,
        true,
        &ModeOptions::default(),
    )?;
    let opts = ModeOptions {
        damping: 0.5,
        ..ModeOptions::default()
    };
    let h2 = match solve_mode(profile, 2, None, -5.0 / 6.0, false, &opts) {
        Ok(m) => m,
        Err(e @ Error::ModeNonConvergence { .. }) => {
            warn!("{e}; falling back to shooting");
            let shot = shoot_mode(profile, 2, -5.0 / 6.0, None, 1e-12)?;
            let h: Vec<f64> = profile.r_nodes.iter().map(|&r| shot.eval(r)).collect();
            let (h_r_nodes, big_h) = profile
                .r_nodes
                .iter()
                .zip(&h)
                .filter(|(&r, _)| r > 0.0 && r <= profile.xi1)
                .map(|(&r, &v)| (r, v / psi_value(profile, r)))
                .unzip();
            ModeSolution {
                j: 2,
                a_coef: -5.0 / 6.0,
                r_nodes: profile.r_nodes.clone(),
                h,
                big_h,
                h_r_nodes,
                iterations: 0,
                rep: None,
            }
        }
        Err(e) => return Err(e),
    };
    let shot = shoot_mode(profile, 2, -5.0 / 6.0, None, 1e-12)?;
    let shooting_gap = profile
        .r_nodes
        .iter()
        .zip(&h2.h)
        .map(|(&r, &v)| (v - shot.eval(r)).abs())
        .fold(0.0, f64::max);
    Ok(HField {
        nu,
        xi1: profile.xi1,
        mu1: profile.mu1,
        h0,
        h2,
        shooting_gap,
    })
}

/// `h` from the discretized resolvent `(I − DG(θ))⁻¹ g₁` on `grid`, in retained modes.
pub fn resolvent_h_field(profile: &RadialProfile, grid: Arc<AxiGrid>) -> Result<ModeField> {
    let theta = extended_theta(profile, grid.clone());
    let a = identity_minus(&dg_matrix(&theta, &profile.nonlinearity()));
    let g1 = AxiField::from_fn(grid.clone(), |r, z| 0.25 * r * r * (1.0 - z * z)).legendre_coeffs();
    let rhs = Mat::from_fn(g1.data.len(), 1, |r, _| g1.data[r]);
    let x = a.partial_piv_lu().solve(&rhs);
    let mut out = ModeField::zeros(grid.l_max, grid.n_r());
    for (o, v) in out.data.iter_mut().zip(x.col(0).iter()) {
        if !v.is_finite() {
            return Err(Error::SingularLinearization {
                sigma_min: 0.0,
                threshold: 0.0,
            });
        }
        *o = *v;
    }
    Ok(out)
}

/// First-order boundary and oblateness.
#[derive(Debug, Clone, Serialize)]
pub struct OblatenessReport {
    pub nu: f64,
    pub xi1: f64,
    pub mu1: f64,
    pub beta: f64,
    pub h0_at_xi1: f64,
    pub h2_at_xi1: f64,
    pub zeta: Vec<f64>,
    /// `Ξ₁(ζ)` at `zeta`.
    pub xi1_of_zeta: Vec<f64>,
    /// `dσ/dβ = −(3/2)(ξ₁/μ₁) h₂(ξ₁)`.
    pub sigma_linear: f64,
    /// `σ_linear · β`.
    pub sigma: f64,
    pub sigma_measured: Option<f64>,
}

/// `Ξ₁(ζ) = ξ₁ + (ξ₁²/μ₁) h(ξ₁, ζ) β` and `σ = −(3/2)(ξ₁/μ₁) h₂(ξ₁) β`.
pub fn oblateness(
    profile: &RadialProfile,
    h: &HField,
    beta: f64,
    zeta: &[f64],
) -> Result<OblatenessReport> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::invalid("beta", "must be finite and nonnegative"));
    }
    if beta > 0.05 {
        warn!("beta = {beta} is outside the slow-rotation regime");
    }
    let (xi1, mu1) = (profile.xi1, profile.mu1);
    let h0 = h.h0.eval(xi1);
    let h2 = h.h2.eval(xi1);
    let sigma_linear = -1.5 * xi1 / mu1 * h2;
    if !(sigma_linear > 0.0) {
        warn!("non-positive oblateness slope {sigma_linear}");
    }
    Ok(OblatenessReport {
        nu: h.nu,
        xi1,
        mu1,
        beta,
        h0_at_xi1: h0,
        h2_at_xi1: h2,
        zeta: zeta.to_vec(),
        xi1_of_zeta: zeta
            .iter()
            .map(|&z| xi1 + xi1 * xi1 / mu1 * h.eval(xi1, z) * beta)
            .collect(),
        sigma_linear,
        sigma: sigma_linear * beta,
        sigma_measured: None,
    })
}

/// `(R(0) − R(±1)) / ξ₁` of a full solution.
pub fn measured_oblateness(sol: &EquilibriumSolution, xi1: f64) -> Result<f64> {
    Ok((sol.equatorial_radius()? - sol.polar_radius()?) / xi1)
}
