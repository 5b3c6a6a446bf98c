//! Newton–Kantorovich iteration for `u = g + G(u)` and β continuation.

use std::fmt::Write as _;
use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::Mat;
use log::{debug, info};
use serde::{Serialize, Serializer};

use crate::eos::{EquationOfState, ScaleSet};
use crate::error::{Error, Result};
use crate::potential::field::{AxiField, ModeField};
use crate::potential::grid::AxiGrid;
use crate::radial::RadialProfile;
use crate::rotation::{b_from_j_modes, frechet_b_matrix, CentrifugalField, RotationLaw};

use super::checks::{
    certificate_from_matrix, check_admissibility, free_boundary, identity_minus, Admissibility,
};
use super::operator::{dg_matrix, g_modes};

/// Iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Picard relaxation `ω`.
    pub damping: f64,
    pub newton: bool,
    pub hl_threshold: f64,
    /// `r₀` as a fraction of the equatorial radius of the initial guess.
    pub r0_fraction: f64,
    /// Compute the invertibility certificate after convergence.
    pub certify: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 60,
            damping: 0.5,
            newton: true,
            hl_threshold: 1e-3,
            r0_fraction: 0.05,
            certify: true,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::invalid("tol", "must be finite and positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("damping", "must lie in (0, 1]"));
        }
        if !(self.hl_threshold.is_finite() && self.hl_threshold >= 0.0) {
            return Err(Error::invalid(
                "hl_threshold",
                "must be finite and nonnegative",
            ));
        }
        if !(self.r0_fraction > 0.0 && self.r0_fraction < 1.0) {
            return Err(Error::invalid("r0_fraction", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// A converged admissible solution and its diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSolution {
    #[serde(serialize_with = "field_samples")]
    pub u: AxiField,
    /// Retained Legendre modes of `u`.
    #[serde(skip)]
    pub modes: ModeField,
    pub zeta_nodes: Vec<f64>,
    pub r_of_zeta: Vec<f64>,
    pub residual_history: Vec<f64>,
    pub admissibility: Admissibility,
    /// Smallest singular value of `I − J` at the solution (`NaN` when not computed).
    pub hl_sigma_min: f64,
    /// Per-block values when the linearization decouples.
    pub hl_blocks: Option<Vec<f64>>,
    pub beta: Option<f64>,
}

#[derive(Serialize)]
struct Samples<'a> {
    r_nodes: &'a [f64],
    zeta_nodes: &'a [f64],
    /// `values[i][j] = u(r_i, ζ_j)`.
    values: Vec<&'a [f64]>,
}

fn field_samples<S: Serializer>(u: &AxiField, s: S) -> std::result::Result<S::Ok, S::Error> {
    let g = &u.grid;
    Samples {
        r_nodes: &g.r_nodes,
        zeta_nodes: &g.zeta_nodes,
        values: u.values.chunks(g.n_zeta()).collect(),
    }
    .serialize(s)
}

impl EquilibriumSolution {
    pub fn residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }

    /// Equatorial radius `R(0)` from the interpolated field.
    pub fn equatorial_radius(&self) -> Result<f64> {
        super::checks::boundary_along(&self.u, 0.0, self.admissibility.r0)
    }

    /// Polar radius `R(±1)`.
    pub fn polar_radius(&self) -> Result<f64> {
        super::checks::boundary_along(&self.u, 1.0, self.admissibility.r0)
    }

    /// CSV matrix: header `r,u(zeta_0),…`, one row per radial node.
    pub fn u_csv(&self) -> String {
        let g = &self.u.grid;
        let mut s = String::from("r");
        for z in &g.zeta_nodes {
            let _ = write!(s, ",{z:.16e}");
        }
        s.push('\n');
        for i in 0..g.n_r() {
            let _ = write!(s, "{:.16e}", g.r_nodes[i]);
            for j in 0..g.n_zeta() {
                let _ = write!(s, ",{:.16e}", self.u.at(i, j));
            }
            s.push('\n');
        }
        s
    }
}

/// `θ` inside `ξ₁` continued harmonically outside, on every ray.
pub fn extended_theta(profile: &RadialProfile, grid: Arc<AxiGrid>) -> AxiField {
    let vals: Vec<f64> = grid
        .r_nodes
        .iter()
        .map(|&r| profile.theta_at(r).0)
        .collect();
    AxiField::from_radial(grid, &vals)
}

fn equator_radius_guess(u: &AxiField) -> f64 {
    let g = &u.grid;
    let j = g.half_rays()[0].j;
    (1..g.n_r())
        .find(|&i| u.at(i, j) <= 0.0)
        .map(|i| g.r_nodes[i])
        .unwrap_or(g.r_inf())
}

fn residual_modes(u: &ModeField, g: &ModeField, gu: &ModeField) -> ModeField {
    let mut out = u.clone();
    for ((o, a), b) in out.data.iter_mut().zip(&g.data).zip(&gu.data) {
        *o -= a + b;
    }
    out
}

fn grid_sup(grid: &Arc<AxiGrid>, m: &ModeField) -> f64 {
    AxiField::from_modes(grid.clone(), m).sup_norm()
}

/// Source term: fixed, or recomputed from the iterate for angular-momentum laws.
enum Source<'a> {
    Fixed(ModeField),
    Angular {
        law: &'a RotationLaw,
        scale: &'a ScaleSet,
    },
}

struct Problem<'a> {
    grid: Arc<AxiGrid>,
    eos: &'a EquationOfState,
    u_o: f64,
    source: Source<'a>,
}

impl Problem<'_> {
    fn source(&self, u: &ModeField) -> Result<ModeField> {
        match &self.source {
            Source::Fixed(g) => Ok(g.clone()),
            Source::Angular { law, scale } => {
                Ok(b_from_j_modes(law, &self.grid, u, self.eos, scale)?.modes())
            }
        }
    }

    /// `(residual modes, sup-norm on the grid)`.
    fn residual(&self, u: &ModeField) -> Result<(ModeField, f64)> {
        let field = AxiField::from_modes(self.grid.clone(), u);
        let law = self.eos.nonlinearity(self.u_o);
        let gu = g_modes(&field, &law);
        let r = residual_modes(u, &self.source(u)?, &gu);
        let n = grid_sup(&self.grid, &r);
        Ok((r, n))
    }

    /// Linearization `J` of `g + G` at `u`.
    fn jacobian(&self, u: &ModeField) -> Result<Mat<f64>> {
        let field = AxiField::from_modes(self.grid.clone(), u);
        let j = dg_matrix(&field, &self.eos.nonlinearity(self.u_o));
        if let Source::Angular { law, scale } = &self.source {
            let b = frechet_b_matrix(law, &self.grid, u, self.eos, scale)?;
            return Ok(&j + &b);
        }
        Ok(j)
    }

    fn solve(&self, init: &AxiField, opts: &SolveOptions) -> Result<EquilibriumSolution> {
        opts.validate()?;
        self.eos.validate()?;
        let r0 = opts.r0_fraction * equator_radius_guess(init);
        let mut u = init.legendre_coeffs();
        let (mut res, mut norm) = self.residual(&u)?;
        let mut history = vec![norm];
        let mut stalled = 0;
        let mut iter = 0;
        while norm > opts.tol {
            if iter >= opts.max_iter || !norm.is_finite() {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    residual: norm,
                });
            }
            iter += 1;
            let mut accepted = None;
            if opts.newton {
                let a = identity_minus(&self.jacobian(&u)?);
                let rhs = Mat::from_fn(res.data.len(), 1, |r, _| -res.data[r]);
                let delta = a.partial_piv_lu().solve(&rhs);
                if delta.col(0).iter().all(|v| v.is_finite()) {
                    let mut lambda = 1.0;
                    while lambda >= 1.0 / 64.0 {
                        let mut trial = u.clone();
                        for (t, d) in trial.data.iter_mut().zip(delta.col(0).iter()) {
                            *t += lambda * d;
                        }
                        let (tr, tn) = self.residual(&trial)?;
                        if tn < (1.0 - 1e-4 * lambda) * norm {
                            accepted = Some((trial, tr, tn));
                            break;
                        }
                        lambda *= 0.5;
                    }
                    debug!("newton step {iter}: lambda {lambda}");
                }
            }
            let (nu, nr, nn) = match accepted {
                Some(t) => t,
                None => {
                    // u ← (1 − ω)u + ω(g + G(u)) = u − ω·residual
                    let mut trial = u.clone();
                    for (t, r) in trial.data.iter_mut().zip(&res.data) {
                        *t -= opts.damping * r;
                    }
                    let (tr, tn) = self.residual(&trial)?;
                    (trial, tr, tn)
                }
            };
            if nn >= norm {
                stalled += 1;
                if stalled >= 5 {
                    return Err(Error::NoConvergence {
                        iterations: iter,
                        residual: nn,
                    });
                }
            } else {
                stalled = 0;
            }
            u = nu;
            res = nr;
            norm = nn;
            history.push(norm);
            debug!("iteration {iter}: residual {norm:e}");
        }
        info!("converged after {iter} iterations, residual {norm:e}");
        let field = AxiField::from_modes(self.grid.clone(), &u);
        let admissibility = check_admissibility(&field, r0);
        let r_of_zeta = if admissibility.a2 {
            free_boundary(&field, r0)?
        } else {
            vec![f64::NAN; self.grid.n_zeta()]
        };
        let (hl_sigma_min, hl_blocks) = if opts.certify {
            let j = self.jacobian(&u)?;
            let (s, blocks) = certificate_from_matrix(&j, self.grid.n_r());
            if s < opts.hl_threshold {
                return Err(Error::SingularLinearization {
                    sigma_min: s,
                    threshold: opts.hl_threshold,
                });
            }
            (s, blocks)
        } else {
            (f64::NAN, None)
        };
        Ok(EquilibriumSolution {
            zeta_nodes: self.grid.zeta_nodes.clone(),
            u: field,
            modes: u,
            r_of_zeta,
            residual_history: history,
            admissibility,
            hl_sigma_min,
            hl_blocks,
            beta: None,
        })
    }
}

/// Solve `u = g + G(u)` for a fixed centrifugal field, starting from `init`.
pub fn solve_equilibrium(
    g: &CentrifugalField,
    eos: &EquationOfState,
    u_o: f64,
    init: &AxiField,
    opts: &SolveOptions,
) -> Result<EquilibriumSolution> {
    let (a, b) = (&g.g.grid, &init.grid);
    if !Arc::ptr_eq(a, b)
        && (a.r_nodes != b.r_nodes || a.zeta_nodes != b.zeta_nodes || a.l_max != b.l_max)
    {
        return Err(Error::invalid(
            "init",
            "grid differs from the centrifugal field's grid",
        ));
    }
    init.validate(1e-8)?;
    let p = Problem {
        grid: init.grid.clone(),
        eos,
        u_o,
        source: Source::Fixed(g.modes()),
    };
    let mut sol = p.solve(init, opts)?;
    if let crate::rotation::BProfile::Quadratic { c } = g.b {
        sol.beta = Some(4.0 * c);
    }
    Ok(sol)
}

/// Solve `u = B(j, u) + G(u)` for an angular-momentum law.
pub fn solve_equilibrium_j(
    law: &RotationLaw,
    eos: &EquationOfState,
    scale: &ScaleSet,
    init: &AxiField,
    opts: &SolveOptions,
) -> Result<EquilibriumSolution> {
    law.validate()?;
    if !law.is_angular_momentum() {
        return Err(Error::invalid(
            "rotation",
            "expected an angular-momentum law",
        ));
    }
    init.validate(1e-8)?;
    let p = Problem {
        grid: init.grid.clone(),
        eos,
        u_o: scale.u_o,
        source: Source::Angular { law, scale },
    };
    p.solve(init, opts)
}

/// Sequential solves over a β schedule; stops at the first failure.
#[derive(Debug)]
pub struct Continuation {
    pub solutions: Vec<EquilibriumSolution>,
    pub failure: Option<Error>,
}

impl Continuation {
    pub fn into_result(self) -> Result<Vec<EquilibriumSolution>> {
        match self.failure {
            None => Ok(self.solutions),
            Some(e) => Err(e),
        }
    }
}

/// Uniform-rotation solves along `schedule`, each warm-started from the previous one.
pub fn continuation_in_beta(
    schedule: &[f64],
    eos: &EquationOfState,
    u_o: f64,
    init: &AxiField,
    opts: &SolveOptions,
) -> Continuation {
    let mut out = Continuation {
        solutions: Vec::with_capacity(schedule.len()),
        failure: None,
    };
    if let Some(k) = schedule.windows(2).position(|w| !(w[1] > w[0])) {
        out.failure = Some(Error::invalid(
            "schedule",
            format!("must be increasing (entry {} is not)", k + 1),
        ));
        return out;
    }
    if schedule
        .first()
        .is_some_and(|b| !(*b >= 0.0 && b.is_finite()))
    {
        out.failure = Some(Error::invalid(
            "schedule",
            "entries must be finite and nonnegative",
        ));
        return out;
    }
    let mut guess = init.clone();
    for &beta in schedule {
        let g = CentrifugalField::rigid(beta, init.grid.clone());
        match solve_equilibrium(&g, eos, u_o, &guess, opts) {
            Ok(sol) => {
                guess = sol.u.clone();
                out.solutions.push(sol);
            }
            Err(e) => {
                out.failure = Some(Error::Continuation {
                    beta,
                    source: Box::new(e),
                });
                break;
            }
        }
    }
    out
}
