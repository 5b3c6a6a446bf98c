//! Rotation laws and the centrifugal potential.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::eos::{beta_of_omega, EquationOfState, Nonlinearity, ScaleSet};
use crate::error::{Error, Result};
use crate::numerics::interp::{
    cubic_weights, find_interval, hermite, hermite_basis, MonotoneCubic,
};
use crate::numerics::quad::{legendre_table, GaussRule};
use crate::potential::field::{AxiField, ModeEvaluator, ModeField};
use crate::potential::grid::AxiGrid;

/// Prescribed rotation, in physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum RotationLaw {
    Constant {
        omega: f64,
    },
    /// `Ω` sampled at cylindrical radii `varpi`.
    Differential {
        varpi: Vec<f64>,
        omega: Vec<f64>,
    },
    /// Specific angular momentum `j` sampled at cylinder masses `m`.
    AngularMomentum {
        m: Vec<f64>,
        j: Vec<f64>,
    },
}

impl RotationLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            RotationLaw::Constant { omega } => {
                if !(omega.is_finite() && *omega >= 0.0) {
                    return Err(Error::invalid("omega", "must be finite and nonnegative"));
                }
            }
            RotationLaw::Differential { varpi, omega } => {
                MonotoneCubic::new(varpi.clone(), omega.clone())?;
                if varpi[0] < 0.0 {
                    return Err(Error::invalid("varpi", "must be nonnegative"));
                }
                if omega.iter().any(|w| *w < 0.0) {
                    return Err(Error::invalid("omega", "must be nonnegative"));
                }
            }
            RotationLaw::AngularMomentum { m, j } => {
                let interp = MonotoneCubic::new(m.clone(), j.clone())?;
                if m[0] != 0.0 || j[0] != 0.0 {
                    return Err(Error::invalid("j", "table must start at m = 0 with j = 0"));
                }
                let norm = interp.sup_abs() + interp.sup_abs_derivative();
                if !norm.is_finite() {
                    return Err(Error::invalid(
                        "j",
                        "norm sup|j| + sup|dj/dm| is not finite",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn is_angular_momentum(&self) -> bool {
        matches!(self, RotationLaw::AngularMomentum { .. })
    }

    /// `j(m)` table scaled by a constant factor.
    pub fn scaled_j(&self, factor: f64) -> Option<RotationLaw> {
        match self {
            RotationLaw::AngularMomentum { m, j } => Some(RotationLaw::AngularMomentum {
                m: m.clone(),
                j: j.iter().map(|v| v * factor).collect(),
            }),
            _ => None,
        }
    }
}

/// The dimensionless centrifugal potential `b(ϖ)`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind")]
pub enum BProfile {
    /// `b = c ϖ²`.
    Quadratic { c: f64 },
    /// `b(ϖ) = u_O⁻¹ ∫₀^{aϖ} Ω² s ds` with `Ω` interpolated monotonically.
    Differential {
        omega: MonotoneCubic,
        /// `∫₀^{x_k} Ω² s ds` at the knots.
        cumulative: Vec<f64>,
        a_len: f64,
        u_o: f64,
    },
    /// Hermite table of values and slopes; constant-slope growth past the end is not used.
    Table {
        w: Vec<f64>,
        b: Vec<f64>,
        db: Vec<f64>,
    },
}

fn gauss4() -> &'static GaussRule {
    static R: std::sync::OnceLock<GaussRule> = std::sync::OnceLock::new();
    R.get_or_init(|| GaussRule::new(4))
}

impl BProfile {
    pub fn value_and_slope(&self, w: f64) -> (f64, f64) {
        match self {
            BProfile::Quadratic { c } => (c * w * w, 2.0 * c * w),
            BProfile::Differential {
                omega,
                cumulative,
                a_len,
                u_o,
            } => {
                let x = a_len * w;
                let xs = omega.xs();
                let integ = |s: f64| {
                    let o = omega.eval(s);
                    o * o * s
                };
                let total = if x <= xs[0] {
                    let o = omega.eval(xs[0]);
                    0.5 * o * o * x * x
                } else if x >= *xs.last().unwrap() {
                    let last = *xs.last().unwrap();
                    let o = omega.eval(last);
                    cumulative.last().unwrap() + 0.5 * o * o * (x * x - last * last)
                } else {
                    let k = find_interval(xs, x);
                    cumulative[k] + gauss4().integrate(xs[k], x, integ)
                };
                (total / u_o, a_len * integ(x) / u_o)
            }
            BProfile::Table { w: ws, b, db } => {
                let last = ws.len() - 1;
                if w >= ws[last] {
                    // b' = K j² / ϖ³ past the table: j constant there.
                    let c = db[last] * ws[last].powi(3);
                    let v = b[last] + 0.5 * c * (1.0 / (ws[last] * ws[last]) - 1.0 / (w * w));
                    return (v, c / w.powi(3));
                }
                let k = find_interval(ws, w);
                hermite(ws[k], ws[k + 1], b[k], b[k + 1], db[k], db[k + 1], w)
            }
        }
    }

    pub fn value(&self, w: f64) -> f64 {
        self.value_and_slope(w).0
    }
}

/// Centrifugal potential and its field `g(r, ζ) = b(r√(1−ζ²))`.
#[derive(Debug, Clone)]
pub struct CentrifugalField {
    pub b: BProfile,
    pub g: AxiField,
}

impl CentrifugalField {
    pub fn new(b: BProfile, grid: Arc<AxiGrid>) -> Self {
        let g = AxiField::from_fn(grid, |r, z| b.value(r * (1.0 - z * z).max(0.0).sqrt()));
        Self { b, g }
    }

    pub fn zero(grid: Arc<AxiGrid>) -> Self {
        Self::new(BProfile::Quadratic { c: 0.0 }, grid)
    }

    /// Uniform rotation with dimensionless parameter `β`: `b = βϖ²/4`.
    pub fn rigid(beta: f64, grid: Arc<AxiGrid>) -> Self {
        Self::new(BProfile::Quadratic { c: beta / 4.0 }, grid)
    }

    pub fn modes(&self) -> ModeField {
        self.g.legendre_coeffs()
    }

    /// Sampled `(ϖ, b, db/dϖ)` on the given abscissae.
    pub fn table(&self, ws: &[f64]) -> Vec<(f64, f64, f64)> {
        ws.iter()
            .map(|&w| {
                let (v, d) = self.b.value_and_slope(w);
                (w, v, d)
            })
            .collect()
    }
}

/// Centrifugal field of a constant or differential law.
pub fn b_from_omega(
    law: &RotationLaw,
    scale: &ScaleSet,
    eos: &EquationOfState,
    grid: Arc<AxiGrid>,
) -> Result<CentrifugalField> {
    law.validate()?;
    match law {
        RotationLaw::Constant { omega } => {
            let beta = beta_of_omega(*omega, scale, eos)?;
            Ok(CentrifugalField::rigid(beta, grid))
        }
        RotationLaw::Differential { varpi, omega } => {
            let interp = MonotoneCubic::new(varpi.clone(), omega.clone())?;
            let xs = interp.xs().to_vec();
            let mut cumulative = vec![0.0; xs.len()];
            let o0 = interp.eval(xs[0]);
            cumulative[0] = 0.5 * o0 * o0 * xs[0] * xs[0];
            for k in 0..xs.len() - 1 {
                let part = gauss4().integrate(xs[k], xs[k + 1], |s| {
                    let o = interp.eval(s);
                    o * o * s
                });
                cumulative[k + 1] = cumulative[k] + part;
            }
            let b = BProfile::Differential {
                omega: interp,
                cumulative,
                a_len: scale.a_len,
                u_o: scale.u_o,
            };
            Ok(CentrifugalField::new(b, grid))
        }
        RotationLaw::AngularMomentum { .. } => Err(Error::invalid(
            "rotation",
            "angular-momentum laws depend on the solution; use b_from_j",
        )),
    }
}

/// `(4πG)^{-3/2} (Aγ/(γ−1))^{ν/2} u_O^{(3−ν)/2}`: physical mass of unit dimensionless mass.
pub fn mass_prefactor(eos: &EquationOfState, scale: &ScaleSet) -> f64 {
    let k = eos.a_const * eos.gamma / (eos.gamma - 1.0);
    (4.0 * PI * scale.g_grav).powf(-1.5)
        * k.powf(0.5 * eos.nu)
        * scale.u_o.powf(0.5 * (3.0 - eos.nu))
}

const M_PANELS: usize = 64;
const Z_POINTS: usize = 32;

fn z_rule() -> &'static GaussRule {
    static R: std::sync::OnceLock<GaussRule> = std::sync::OnceLock::new();
    R.get_or_init(|| GaussRule::new(Z_POINTS))
}

/// Quadrature points `(r, ζ, weight)` on the line `ϖ = const`, covering both hemispheres of the support.
fn z_line(ev: &ModeEvaluator, varpi: f64, r_inf: f64) -> Line {
    let at = |z: f64| {
        let r = (varpi * varpi + z * z).sqrt();
        if r == 0.0 {
            ev.eval(0.0, 0.0)
        } else {
            ev.eval(r, z / r)
        }
    };
    let zmax = (r_inf * r_inf - varpi * varpi).max(0.0).sqrt();
    if zmax == 0.0 || at(0.0) <= 0.0 {
        return Vec::new();
    }
    let steps = 128;
    let dz = zmax / steps as f64;
    let mut top = zmax;
    for s in 1..=steps {
        let z = s as f64 * dz;
        if at(z) <= 0.0 {
            let (mut lo, mut hi) = (z - dz, z);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if at(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            top = 0.5 * (lo + hi);
            break;
        }
    }
    let mut pts = Vec::with_capacity(Z_POINTS);
    for (t, w) in z_rule().on(0.0, 1.0) {
        let q = 1.0 - t;
        let z = top - top * q * q;
        let r = (varpi * varpi + z * z).sqrt();
        let zeta = if r == 0.0 { 0.0 } else { z / r };
        pts.push((r, zeta, 2.0 * w * 2.0 * top * q));
    }
    pts
}

/// Points `(r, ζ, weight)` of one vertical line.
type Line = Vec<(f64, f64, f64)>;

/// Integration lines of the cylinder-mass table.
#[derive(Debug, Clone)]
struct CylinderPlan {
    r_eq: f64,
    w_nodes: Vec<f64>,
    /// Per panel: `(ϖ, dϖ weight, line points)` at its Gauss abscissae.
    panel_lines: Vec<Vec<(f64, f64, Line)>>,
    /// Lines at the table nodes.
    node_lines: Vec<Line>,
}

fn equatorial_radius(ev: &ModeEvaluator) -> Option<f64> {
    let r = &ev.r_nodes;
    if ev.eval(0.0, 0.0) <= 0.0 {
        return None;
    }
    let mut prev = 0.0;
    for &x in r.iter().skip(1) {
        if ev.eval(x, 0.0) <= 0.0 {
            let (mut lo, mut hi) = (prev, x);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if ev.eval(mid, 0.0) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = x;
    }
    Some(*r.last().unwrap())
}

impl CylinderPlan {
    fn new(ev: &ModeEvaluator) -> Option<Self> {
        let r_inf = *ev.r_nodes.last().unwrap();
        let r_eq = equatorial_radius(ev)?;
        let map = |tau: f64| r_eq * (1.0 - (1.0 - tau) * (1.0 - tau));
        let dmap = |tau: f64| 2.0 * r_eq * (1.0 - tau);
        let w_nodes: Vec<f64> = (0..=M_PANELS)
            .map(|k| map(k as f64 / M_PANELS as f64))
            .collect();
        let mut panel_lines = Vec::with_capacity(M_PANELS);
        for k in 0..M_PANELS {
            let a = k as f64 / M_PANELS as f64;
            let b = (k + 1) as f64 / M_PANELS as f64;
            let lines = gauss4()
                .on(a, b)
                .map(|(tau, w)| {
                    let varpi = map(tau);
                    (varpi, w * dmap(tau), z_line(ev, varpi, r_inf))
                })
                .collect();
            panel_lines.push(lines);
        }
        let node_lines = w_nodes.iter().map(|&w| z_line(ev, w, r_inf)).collect();
        Some(Self {
            r_eq,
            w_nodes,
            panel_lines,
            node_lines,
        })
    }
}

/// Physical mass inside cylinders `ϖ' ≤ ϖ` (ϖ dimensionless).
#[derive(Debug, Clone, Serialize)]
pub struct CylinderMass {
    /// Dimensionless abscissae of the table, ending at the equatorial radius.
    pub w_nodes: Vec<f64>,
    /// Dimensionless cylinder mass `2π ∫∫ f ϖ dϖ dz` at the nodes.
    pub m_scaled: Vec<f64>,
    /// Its slope `2πϖ ∫ f dz`.
    pub dm_scaled: Vec<f64>,
    pub prefactor: f64,
    pub r_eq: f64,
}

impl CylinderMass {
    /// Dimensionless cylinder mass and slope at `ϖ`.
    pub fn scaled_at(&self, w: f64) -> (f64, f64) {
        let last = self.w_nodes.len() - 1;
        if w >= self.w_nodes[last] {
            return (self.m_scaled[last], 0.0);
        }
        let k = find_interval(&self.w_nodes, w);
        hermite(
            self.w_nodes[k],
            self.w_nodes[k + 1],
            self.m_scaled[k],
            self.m_scaled[k + 1],
            self.dm_scaled[k],
            self.dm_scaled[k + 1],
            w,
        )
    }

    /// Physical mass within `ϖ`.
    pub fn at(&self, w: f64) -> f64 {
        self.prefactor * self.scaled_at(w).0
    }

    pub fn total(&self) -> f64 {
        self.prefactor * self.m_scaled.last().copied().unwrap_or(0.0)
    }

    /// Samples `(ϖ, m)` in dimensionless radius and physical mass.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.w_nodes
            .iter()
            .zip(&self.m_scaled)
            .map(|(&w, &m)| (w, self.prefactor * m))
            .collect()
    }
}

fn line_integral(pts: &[(f64, f64, f64)], ev: &ModeEvaluator, law: &Nonlinearity) -> f64 {
    pts.iter().map(|&(r, z, w)| w * law.f(ev.eval(r, z))).sum()
}

fn cylinder_mass_from(
    ev: &ModeEvaluator,
    law: &Nonlinearity,
    prefactor: f64,
) -> (CylinderMass, Option<CylinderPlan>) {
    let plan = match CylinderPlan::new(ev) {
        Some(p) => p,
        None => {
            return (
                CylinderMass {
                    w_nodes: vec![0.0, *ev.r_nodes.last().unwrap()],
                    m_scaled: vec![0.0, 0.0],
                    dm_scaled: vec![0.0, 0.0],
                    prefactor,
                    r_eq: 0.0,
                },
                None,
            )
        }
    };
    let mut m = vec![0.0; plan.w_nodes.len()];
    for (k, lines) in plan.panel_lines.iter().enumerate() {
        let part: f64 = lines
            .iter()
            .map(|(varpi, w, pts)| w * 2.0 * PI * varpi * line_integral(pts, ev, law))
            .sum();
        m[k + 1] = m[k] + part;
    }
    let dm = plan
        .node_lines
        .iter()
        .zip(&plan.w_nodes)
        .map(|(pts, &w)| 2.0 * PI * w * line_integral(pts, ev, law))
        .collect();
    (
        CylinderMass {
            w_nodes: plan.w_nodes.clone(),
            m_scaled: m,
            dm_scaled: dm,
            prefactor,
            r_eq: plan.r_eq,
        },
        Some(plan),
    )
}

/// Mass within cylinders about the rotation axis for the scaled enthalpy `u`.
pub fn mass_within_cylinder(
    u: &AxiField,
    eos: &EquationOfState,
    scale: &ScaleSet,
) -> Result<CylinderMass> {
    eos.validate()?;
    let ev = ModeEvaluator::from_field(u);
    Ok(cylinder_mass_from(
        &ev,
        &eos.nonlinearity(scale.u_o),
        mass_prefactor(eos, scale),
    )
    .0)
}

/// Abscissae for the `b` table: the mass-table nodes, then uniform panels to `r_inf`.
fn b_nodes(mass: &CylinderMass, r_inf: f64) -> Vec<f64> {
    let mut w = mass.w_nodes.clone();
    let last = *w.last().unwrap();
    if r_inf > last {
        let n = 32;
        for k in 1..=n {
            w.push(last + (r_inf - last) * k as f64 / n as f64);
        }
    }
    w
}

/// Data shared by `b_from_j` and its linearization.
struct JSetup {
    jfun: MonotoneCubic,
    mass: CylinderMass,
    plan: Option<CylinderPlan>,
    ev: ModeEvaluator,
    nl: Nonlinearity,
    /// `1 / (u_O a²)`.
    kfac: f64,
    wb: Vec<f64>,
}

fn j_setup(
    law: &RotationLaw,
    ev: ModeEvaluator,
    eos: &EquationOfState,
    scale: &ScaleSet,
    r_inf: f64,
) -> Result<JSetup> {
    law.validate()?;
    let (m, j) = match law {
        RotationLaw::AngularMomentum { m, j } => (m, j),
        _ => {
            return Err(Error::invalid(
                "rotation",
                "b_from_j needs an angular-momentum law",
            ))
        }
    };
    let jfun = MonotoneCubic::new(m.clone(), j.clone())?;
    let nl = eos.nonlinearity(scale.u_o);
    let (mass, plan) = cylinder_mass_from(&ev, &nl, mass_prefactor(eos, scale));
    let wb = b_nodes(&mass, r_inf);
    Ok(JSetup {
        jfun,
        mass,
        plan,
        ev,
        nl,
        kfac: 1.0 / (scale.u_o * scale.a_len * scale.a_len),
        wb,
    })
}

impl JSetup {
    fn integrand(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let m = self.mass.prefactor * self.mass.scaled_at(t).0;
        let j = self.jfun.eval(m);
        self.kfac * j * j / (t * t * t)
    }

    fn check_axis(&self) -> Result<()> {
        let t1 = self.wb[1];
        let (a, b) = (self.integrand(1e-3 * t1), self.integrand(1e-2 * t1));
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::DivergentAxisIntegral);
        }
        if a > 0.0 && b > 0.0 {
            let slope = (b / a).log10();
            if slope <= -0.95 {
                return Err(Error::DivergentAxisIntegral);
            }
        }
        Ok(())
    }

    fn profile(&self) -> BProfile {
        let n = self.wb.len();
        let mut b = vec![0.0; n];
        let mut db = vec![0.0; n];
        for k in 0..n - 1 {
            b[k + 1] = b[k] + gauss4().integrate(self.wb[k], self.wb[k + 1], |t| self.integrand(t));
            db[k + 1] = self.integrand(self.wb[k + 1]);
        }
        db[0] = 0.0;
        BProfile::Table {
            w: self.wb.clone(),
            b,
            db,
        }
    }
}

/// Centrifugal field of an angular-momentum law evaluated on the enthalpy field `u`.
pub fn b_from_j(
    law: &RotationLaw,
    u: &AxiField,
    eos: &EquationOfState,
    scale: &ScaleSet,
    grid: Arc<AxiGrid>,
) -> Result<CentrifugalField> {
    let setup = j_setup(law, ModeEvaluator::from_field(u), eos, scale, grid.r_inf())?;
    setup.check_axis()?;
    Ok(CentrifugalField::new(setup.profile(), grid))
}

/// As [`b_from_j`] for `u` given by its retained Legendre modes.
pub(crate) fn b_from_j_modes(
    law: &RotationLaw,
    grid: &Arc<AxiGrid>,
    u: &ModeField,
    eos: &EquationOfState,
    scale: &ScaleSet,
) -> Result<CentrifugalField> {
    let setup = j_setup(
        law,
        ModeEvaluator::from_modes(&grid.r_nodes, u),
        eos,
        scale,
        grid.r_inf(),
    )?;
    setup.check_axis()?;
    Ok(CentrifugalField::new(setup.profile(), grid.clone()))
}

/// Matrix of `h ↦ P_L D_uB(j, u) h` in retained-mode coordinates (`(l/2)·N_r + i`).
pub(crate) fn frechet_b_matrix(
    law: &RotationLaw,
    grid: &Arc<AxiGrid>,
    u: &ModeField,
    eos: &EquationOfState,
    scale: &ScaleSet,
) -> Result<Mat<f64>> {
    let setup = j_setup(
        law,
        ModeEvaluator::from_modes(&grid.r_nodes, u),
        eos,
        scale,
        grid.r_inf(),
    )?;
    setup.check_axis()?;
    let nr = grid.n_r();
    let nm = grid.n_modes();
    let nn = nm * nr;
    let Some(plan) = &setup.plan else {
        return Ok(Mat::zeros(nn, nn));
    };
    let lmax = grid.l_max;

    // Row of d(line integral)/d(mode values) for a line.
    let line_row = |pts: &[(f64, f64, f64)], row: &mut [f64]| {
        for &(r, z, w) in pts {
            let fp = setup.nl.fprime(setup.ev.eval(r, z));
            if fp == 0.0 {
                continue;
            }
            let (st, lw) = cubic_weights(&grid.r_nodes, r);
            let p = legendre_table(lmax, z);
            for m in 0..nm {
                let c = w * fp * p[2 * m];
                for a in 0..4 {
                    row[m * nr + st + a] += c * lw[a];
                }
            }
        }
    };

    // δm at table nodes and δ(dm/dϖ) at table nodes, as rows over the unknowns.
    let nw = plan.w_nodes.len();
    let mut dm = Mat::<f64>::zeros(nw, nn);
    let mut ddm = Mat::<f64>::zeros(nw, nn);
    let mut acc = vec![0.0; nn];
    let mut tmp = vec![0.0; nn];
    for (k, lines) in plan.panel_lines.iter().enumerate() {
        for (varpi, w, pts) in lines {
            tmp.iter_mut().for_each(|v| *v = 0.0);
            line_row(pts, &mut tmp);
            let c = w * 2.0 * PI * varpi;
            for (a, t) in acc.iter_mut().zip(&tmp) {
                *a += c * t;
            }
        }
        for (col, &v) in acc.iter().enumerate() {
            dm[(k + 1, col)] = v;
        }
    }
    for (k, pts) in plan.node_lines.iter().enumerate() {
        tmp.iter_mut().for_each(|v| *v = 0.0);
        line_row(pts, &mut tmp);
        let c = 2.0 * PI * plan.w_nodes[k];
        for (col, &v) in tmp.iter().enumerate() {
            ddm[(k, col)] = c * v;
        }
    }

    // Linearized integrand at t: 2 K j(m) j'(m) P_m δm(t) / t³, with δm from the Hermite table.
    let dint_row = |t: f64, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        if t <= 0.0 {
            return;
        }
        let m = setup.mass.prefactor * setup.mass.scaled_at(t).0;
        let (j, dj) = setup.jfun.eval_with_derivative(m);
        let c = 2.0 * setup.kfac * j * dj * setup.mass.prefactor / (t * t * t);
        if c == 0.0 {
            return;
        }
        if t >= *plan.w_nodes.last().unwrap() {
            for (col, o) in out.iter_mut().enumerate() {
                *o = c * dm[(nw - 1, col)];
            }
            return;
        }
        let k = find_interval(&plan.w_nodes, t);
        let hb = hermite_basis(plan.w_nodes[k], plan.w_nodes[k + 1], t);
        for (col, o) in out.iter_mut().enumerate() {
            *o = c
                * (hb[0] * dm[(k, col)]
                    + hb[1] * dm[(k + 1, col)]
                    + hb[2] * ddm[(k, col)]
                    + hb[3] * ddm[(k + 1, col)]);
        }
    };

    // δb and δb' at the b-table nodes.
    let wb = &setup.wb;
    let nb = wb.len();
    let mut db = Mat::<f64>::zeros(nb, nn);
    let mut ddb = Mat::<f64>::zeros(nb, nn);
    let mut run = vec![0.0; nn];
    let mut row = vec![0.0; nn];
    for k in 0..nb - 1 {
        for (t, w) in gauss4().on(wb[k], wb[k + 1]) {
            dint_row(t, &mut row);
            for (a, v) in run.iter_mut().zip(&row) {
                *a += w * v;
            }
        }
        dint_row(wb[k + 1], &mut row);
        for col in 0..nn {
            db[(k + 1, col)] = run[col];
            ddb[(k + 1, col)] = row[col];
        }
    }
    // Past the table end the integrand is K j(M)² / t³ with M the total mass.
    let m_tot = setup.mass.total();
    let (j_tot, dj_tot) = setup.jfun.eval_with_derivative(m_tot);
    let last = nb - 1;
    let tail_rows: Vec<f64> = (0..nn)
        .map(|col| 2.0 * setup.kfac * j_tot * dj_tot * setup.mass.prefactor * dm[(nw - 1, col)])
        .collect();

    // Projection onto retained modes: P_L D_uB h at (l, r_i).
    let mut out = Mat::<f64>::zeros(nn, nn);
    for i in 0..nr {
        let r = grid.r_nodes[i];
        for hr in grid.half_rays() {
            let z = grid.zeta_nodes[hr.j];
            let w = r * (1.0 - z * z).max(0.0).sqrt();
            if w == 0.0 {
                continue;
            }
            // coefficients of δb(w) over the table rows
            let mut terms: Vec<(usize, f64, bool)> = Vec::new();
            let mut tail = 0.0;
            if w >= wb[last] {
                terms.push((last, 1.0, true));
                terms.push((last, 0.0, false));
                tail = 0.5 * (1.0 / (wb[last] * wb[last]) - 1.0 / (w * w));
            } else {
                let k = find_interval(wb, w);
                let hb = hermite_basis(wb[k], wb[k + 1], w);
                terms.push((k, hb[0], true));
                terms.push((k + 1, hb[1], true));
                terms.push((k, hb[2], false));
                terms.push((k + 1, hb[3], false));
            }
            for m in 0..nm {
                let l = 2 * m;
                let c = hr.factor * (2 * l + 1) as f64 / 2.0
                    * grid.zeta_weights[hr.j]
                    * grid.p(l, hr.j);
                if c == 0.0 {
                    continue;
                }
                let rowi = m * nr + i;
                for &(k, wgt, is_val) in &terms {
                    if wgt == 0.0 {
                        continue;
                    }
                    let src = if is_val { &db } else { &ddb };
                    for col in 0..nn {
                        out[(rowi, col)] += c * wgt * src[(k, col)];
                    }
                }
                if tail != 0.0 {
                    for col in 0..nn {
                        out[(rowi, col)] += c * tail * tail_rows[col];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `D_uB(j, u) h`, projected onto the retained Legendre modes of the grid.
pub fn frechet_b_apply(
    law: &RotationLaw,
    u: &AxiField,
    h: &AxiField,
    eos: &EquationOfState,
    scale: &ScaleSet,
) -> Result<AxiField> {
    let grid = u.grid.clone();
    let um = u.legendre_coeffs();
    let hm = h.legendre_coeffs();
    let mat = frechet_b_matrix(law, &grid, &um, eos, scale)?;
    let n = hm.data.len();
    let mut out = ModeField::zeros(grid.l_max, grid.n_r());
    for r in 0..n {
        let mut s = 0.0;
        for c in 0..n {
            s += mat[(r, c)] * hm.data[c];
        }
        out.data[r] = s;
    }
    Ok(AxiField::from_modes(grid, &out))
}
