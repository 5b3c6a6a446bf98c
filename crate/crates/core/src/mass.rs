//! Total mass, its dependence on the central density, and constant-mass curves.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eos::{beta_of_omega, EosKind, EquationOfState, ScaleSet};
use crate::equilibrium::solver::{extended_theta, solve_equilibrium, SolveOptions};
use crate::error::{Error, Result};
use crate::numerics::roots::brent;
use crate::potential::field::AxiField;
use crate::potential::grid::AxiGrid;
use crate::potential::multipole::RayPlan;
use crate::radial::solve_lane_emden;
use crate::rotation::{mass_prefactor, CentrifugalField};

/// `2π ∬ f(u) r² dr dζ` over the support of `u`.
pub fn total_mass_dimensionless(u: &AxiField, eos: &EquationOfState, u_o: f64) -> f64 {
    let law = eos.nonlinearity(u_o);
    let plan = RayPlan::positive_part(u);
    let vals = plan.interpolate(u);
    let g = &u.grid;
    let nk = g.n_r() - 1;
    let mut total = 0.0;
    let mut off = 0;
    for (h, hr) in g.half_rays().iter().enumerate() {
        let mut ray = 0.0;
        for k in 0..nk {
            for p in plan.segment(h, k) {
                ray += p.w * law.f(vals[off]) * p.s * p.s;
                off += 1;
            }
        }
        total += hr.factor * g.zeta_weights[hr.j] * ray;
    }
    2.0 * std::f64::consts::PI * total
}

/// `(Aγ / (4πG(γ−1)))^{3/2}`: the mass scale of the γ-law.
pub fn polytrope_mass_scale(eos: &EquationOfState, g_grav: f64) -> f64 {
    let k = eos.a_const * eos.gamma / (eos.gamma - 1.0);
    (k / (4.0 * std::f64::consts::PI * g_grav)).powf(1.5)
}

/// Exponent `(3γ − 4)/2` of `M ∝ ρ_O^{(3γ−4)/2}` at fixed `β`.
pub fn mass_exponent(eos: &EquationOfState) -> f64 {
    0.5 * (3.0 * eos.gamma - 4.0)
}

/// One point of the mass–central-density relation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MassPoint {
    pub rho_o: f64,
    pub omega2: f64,
    pub beta: f64,
    /// Dimensionless mass `2π∬ f(Θ) r² dr dζ`.
    pub m1: f64,
    pub m: f64,
    /// `∂M/∂ρ_O` at constant `Ω` (`NaN` until computed).
    pub dm_drho: f64,
}

/// `∂M/∂ρ_O|_Ω = P ρ_O^{e−1} (e M₁ − β ∂M₁/∂β)` with `e = (3γ−4)/2`.
pub fn dm_drho_at_constant_omega(
    point: &MassPoint,
    eos: &EquationOfState,
    g_grav: f64,
    dm1_dbeta: f64,
) -> f64 {
    let e = mass_exponent(eos);
    polytrope_mass_scale(eos, g_grav)
        * point.rho_o.powf(e - 1.0)
        * (e * point.m1 - point.beta * dm1_dbeta)
}

/// Grid used for each equilibrium solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub n_r: usize,
    pub n_zeta: usize,
    pub l_max: usize,
    /// `r_∞` in units of `ξ₁`.
    pub r_inf_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_r: 256,
            n_zeta: 32,
            l_max: 8,
            r_inf_factor: 1.5,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_r < 8 {
            return Err(Error::invalid("n_r", "must be at least 8"));
        }
        if self.l_max % 2 == 1 {
            return Err(Error::invalid("l_max", "must be even"));
        }
        if self.n_zeta < self.l_max + 1 {
            return Err(Error::invalid("n_zeta", "must exceed l_max"));
        }
        if !(self.r_inf_factor.is_finite() && self.r_inf_factor > 1.0) {
            return Err(Error::invalid("r_inf_factor", "must exceed 1"));
        }
        Ok(())
    }

    pub fn grid(&self, xi1: f64) -> Result<Arc<AxiGrid>> {
        self.validate()?;
        Ok(Arc::new(AxiGrid::for_profile(
            xi1,
            self.r_inf_factor * xi1,
            self.n_r,
            self.n_zeta,
            self.l_max,
        )?))
    }
}

/// Everything needed to turn `(ρ_O, Ω²)` into a mass by a full solve.
#[derive(Debug, Clone)]
pub struct MassModel {
    pub eos: EquationOfState,
    pub g_grav: f64,
    pub grid: GridSpec,
    pub opts: SolveOptions,
}

impl MassModel {
    pub fn new(
        eos: EquationOfState,
        g_grav: f64,
        grid: GridSpec,
        opts: SolveOptions,
    ) -> Result<Self> {
        eos.validate()?;
        grid.validate()?;
        opts.validate()?;
        if !(g_grav.is_finite() && g_grav > 0.0) {
            return Err(Error::invalid("G", "must be finite and positive"));
        }
        Ok(Self {
            eos,
            g_grav,
            grid,
            opts,
        })
    }

    /// Solve at central density `rho_o` and squared angular velocity `omega2`.
    pub fn point(&self, rho_o: f64, omega2: f64) -> Result<MassPoint> {
        if !(rho_o.is_finite() && rho_o > 0.0) {
            return Err(Error::invalid("rho_O", "must be finite and positive"));
        }
        if !(omega2.is_finite() && omega2 >= 0.0) {
            return Err(Error::invalid("Omega2", "must be finite and nonnegative"));
        }
        let scale = ScaleSet::from_central_density(&self.eos, rho_o, self.g_grav)?;
        let beta = beta_of_omega(omega2.sqrt(), &scale, &self.eos)?;
        let m1 = self.m1(&scale, beta)?;
        Ok(MassPoint {
            rho_o,
            omega2,
            beta,
            m1,
            m: mass_prefactor(&self.eos, &scale) * m1,
            dm_drho: f64::NAN,
        })
    }

    /// Dimensionless mass at central enthalpy `scale.u_o` and rotation parameter `beta`.
    pub fn m1(&self, scale: &ScaleSet, beta: f64) -> Result<f64> {
        let profile = solve_lane_emden(&self.eos, scale.u_o, 1e4, 1e-12)?;
        let grid = self.grid.grid(profile.xi1)?;
        let theta = extended_theta(&profile, grid.clone());
        let u = if beta == 0.0 {
            let sol = solve_equilibrium(
                &CentrifugalField::zero(grid),
                &self.eos,
                scale.u_o,
                &theta,
                &self.opts,
            )?;
            sol.u
        } else {
            let sol = solve_equilibrium(
                &CentrifugalField::rigid(beta, grid),
                &self.eos,
                scale.u_o,
                &theta,
                &self.opts,
            )?;
            sol.u
        };
        Ok(total_mass_dimensionless(&u, &self.eos, scale.u_o))
    }

    /// `∂M₁/∂β` by centered differences with step `h` (one-sided near `β = 0`).
    pub fn dm1_dbeta(&self, scale: &ScaleSet, beta: f64, h: f64) -> Result<f64> {
        if beta >= h {
            Ok((self.m1(scale, beta + h)? - self.m1(scale, beta - h)?) / (2.0 * h))
        } else {
            let (a, b, c) = (
                self.m1(scale, beta)?,
                self.m1(scale, beta + h)?,
                self.m1(scale, beta + 2.0 * h)?,
            );
            Ok((-3.0 * a + 4.0 * b - c) / (2.0 * h))
        }
    }

    /// Point with `∂M/∂ρ_O` filled in: by formula for the γ-law, by differences otherwise.
    pub fn point_with_derivative(&self, rho_o: f64, omega2: f64) -> Result<MassPoint> {
        let mut p = self.point(rho_o, omega2)?;
        p.dm_drho = match self.eos.kind {
            EosKind::Polytrope => {
                let scale = ScaleSet::from_central_density(&self.eos, rho_o, self.g_grav)?;
                let d = if p.beta == 0.0 {
                    0.0
                } else {
                    self.dm1_dbeta(&scale, p.beta, 1e-4)?
                };
                dm_drho_at_constant_omega(&p, &self.eos, self.g_grav, d)
            }
            EosKind::WhiteDwarf(_) => {
                let h = 1e-3 * rho_o;
                (self.point(rho_o + h, omega2)?.m - self.point(rho_o - h, omega2)?.m) / (2.0 * h)
            }
        };
        Ok(p)
    }
}

fn is_gamma_four_thirds(eos: &EquationOfState) -> bool {
    matches!(eos.kind, EosKind::Polytrope) && (eos.gamma - 4.0 / 3.0).abs() < 1e-12
}

/// Closed-form inversion of `M = P ρ_O^{(3γ−4)/2} M₁` at `Ω = 0`.
pub fn spherical_central_density(
    m_target: f64,
    eos: &EquationOfState,
    g_grav: f64,
    m1: f64,
) -> Result<f64> {
    if is_gamma_four_thirds(eos) {
        return Err(Error::GammaFourThirds);
    }
    Ok((m_target / (polytrope_mass_scale(eos, g_grav) * m1)).powf(1.0 / mass_exponent(eos)))
}

/// `ρ_O` with `M(ρ_O, Ω²) = m_target`, searched in `bracket`.
pub fn central_density_from_mass(
    model: &MassModel,
    m_target: f64,
    omega2: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    if is_gamma_four_thirds(&model.eos) {
        return Err(Error::GammaFourThirds);
    }
    if !(m_target.is_finite() && m_target > 0.0) {
        return Err(Error::invalid("M_target", "must be finite and positive"));
    }
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::invalid("bracket", "need 0 < lo < hi"));
    }
    if matches!(model.eos.kind, EosKind::WhiteDwarf(_)) {
        let mid = (lo * hi).sqrt();
        let d = model.point_with_derivative(mid, 0.0)?.dm_drho;
        if !(d.abs() > 0.0) || !d.is_finite() {
            return Err(Error::StationaryMass { derivative: d });
        }
    }
    let f = |x: f64| -> Result<f64> { Ok(model.point(x.exp(), omega2)?.m / m_target - 1.0) };
    let x = brent(f, lo.ln(), hi.ln(), 1e-12, 1e-9, 200)?;
    Ok(x.exp())
}

/// A point of the constant-mass curve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvePoint {
    pub omega2: f64,
    pub beta: f64,
    pub rho_o: f64,
    pub m1: f64,
    pub m: f64,
}

/// The curve `Ω² ↦ ρ_O` of configurations with mass `m_bar`, points evaluated in parallel.
pub fn constant_mass_curve(
    model: &MassModel,
    m_bar: f64,
    omega2: &[f64],
    bracket: (f64, f64),
) -> Result<Vec<CurvePoint>> {
    omega2
        .par_iter()
        .map(|&w2| {
            let rho = central_density_from_mass(model, m_bar, w2, bracket)?;
            let p = model.point(rho, w2)?;
            Ok(CurvePoint {
                omega2: w2,
                beta: p.beta,
                rho_o: rho,
                m1: p.m1,
                m: p.m,
            })
        })
        .collect()
}

/// Whether `ρ_O ↦ M(ρ_O, Ω²)` is strictly monotone on `samples` log-spaced points of `bracket`.
pub fn bracket_is_monotone(
    model: &MassModel,
    omega2: f64,
    bracket: (f64, f64),
    samples: usize,
) -> Result<bool> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || samples < 2 {
        return Err(Error::invalid(
            "bracket",
            "need 0 < lo < hi and at least two samples",
        ));
    }
    let step = (hi / lo).ln() / (samples - 1) as f64;
    let ms = (0..samples)
        .into_par_iter()
        .map(|k| Ok(model.point(lo * (step * k as f64).exp(), omega2)?.m))
        .collect::<Result<Vec<f64>>>()?;
    let d: Vec<f64> = ms.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(d.iter().all(|&x| x > 0.0) || d.iter().all(|&x| x < 0.0))
}

/// Monotonicity summary of a constant-mass curve.
#[derive(Debug, Clone, Serialize)]
pub struct CurveMonotonicity {
    /// Per point, whether the bracket search saw a monotone mass.
    pub bracket_monotone: Vec<bool>,
    /// Largest `β` of the leading run of points with a monotone bracket.
    pub largest_monotone_beta: Option<f64>,
    /// Sign of successive `ρ_O` differences along increasing `Ω²`: 1, -1 or 0 when mixed.
    pub rho_trend: i32,
}

/// Samples the bracket of each curve point and the trend of `ρ_O` along the curve.
pub fn curve_monotonicity(
    model: &MassModel,
    points: &[CurvePoint],
    bracket: (f64, f64),
    samples: usize,
) -> Result<CurveMonotonicity> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].omega2.total_cmp(&points[b].omega2));
    let mut bracket_monotone = vec![false; points.len()];
    let mut largest = None;
    let mut leading = true;
    for &i in &order {
        let ok = bracket_is_monotone(model, points[i].omega2, bracket, samples)?;
        bracket_monotone[i] = ok;
        leading &= ok;
        if leading {
            largest = Some(points[i].beta);
        }
    }
    let d: Vec<f64> = order
        .windows(2)
        .map(|w| points[w[1]].rho_o - points[w[0]].rho_o)
        .collect();
    let rho_trend = if d.iter().all(|&x| x > 0.0) {
        1
    } else if d.iter().all(|&x| x < 0.0) {
        -1
    } else {
        0
    };
    Ok(CurveMonotonicity {
        bracket_monotone,
        largest_monotone_beta: largest,
        rho_trend,
    })
}

/// CSV with columns `Omega2,beta,rho_O,M1,M`.
pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("Omega2,beta,rho_O,M1,M\n");
    for p in points {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.omega2, p.beta, p.rho_o, p.m1, p.m
        );
    }
    s
}
