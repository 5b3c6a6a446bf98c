//! Spherically symmetric solutions: the generalized Lane-Emden problem.

use std::fmt::Write as _;

use serde::Serialize;

use crate::eos::{EquationOfState, Nonlinearity};
use crate::error::{Error, Result};
use crate::numerics::ode::{dp_step, integrate_until, StepControl, Stop};
use crate::potential::grid::radial_nodes;

/// Start of the numerical integration; the series is used below it.
pub const SERIES_RADIUS: f64 = 1e-4;

/// Default number of nodes of a returned profile.
pub const DEFAULT_NODES: usize = 401;

/// A regular spherically symmetric solution and its harmonic exterior.
#[derive(Debug, Clone, Serialize)]
pub struct RadialProfile {
    pub r_nodes: Vec<f64>,
    pub theta: Vec<f64>,
    pub dtheta: Vec<f64>,
    pub xi1: f64,
    pub mu1: f64,
    pub psi: Vec<f64>,
    #[serde(skip)]
    law: Nonlinearity,
    #[serde(skip)]
    trace: Vec<(f64, [f64; 2])>,
}

fn rhs(law: Nonlinearity) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] {
    move |r, y| [y[1], -law.f(y[0]) - 2.0 * y[1] / r]
}

fn series(law: &Nonlinearity, r: f64) -> [f64; 2] {
    let f1 = law.f(1.0);
    let c4 = f1 * law.fprime(1.0) / 120.0;
    let r2 = r * r;
    [
        1.0 - f1 * r2 / 6.0 + c4 * r2 * r2,
        -f1 * r / 3.0 + 4.0 * c4 * r2 * r,
    ]
}

/// Solve `-(1/r²)(r²θ')' = f(θ)`, `θ(0) = 1`, `θ'(0) = 0`, up to its first zero.
///
/// The returned profile carries [`DEFAULT_NODES`] nodes on `[0, r_inf]`
/// clustered at the center and at `ξ₁`.
pub fn solve_lane_emden(
    eos: &EquationOfState,
    u_o: f64,
    r_inf: f64,
    tol: f64,
) -> Result<RadialProfile> {
    eos.validate()?;
    if !(u_o.is_finite() && u_o > 0.0) {
        return Err(Error::invalid("u_O", "must be finite and positive"));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tol", "must be finite and positive"));
    }
    if !(r_inf.is_finite() && r_inf > SERIES_RADIUS) {
        return Err(Error::invalid("r_inf", "must exceed the series radius"));
    }
    solve_with_law(eos.nonlinearity(u_o), r_inf, tol)
}

/// As [`solve_lane_emden`] with `r_∞ = 1.5 ξ₁` from a pilot solve.
pub fn solve_lane_emden_default(
    eos: &EquationOfState,
    u_o: f64,
    tol: f64,
) -> Result<RadialProfile> {
    let pilot = solve_lane_emden(eos, u_o, 1e4, tol)?;
    Ok(pilot.resampled_to_extent(1.5 * pilot.xi1))
}

pub(crate) fn solve_with_law(law: Nonlinearity, r_inf: f64, tol: f64) -> Result<RadialProfile> {
    let f = rhs(law);
    let mut ctl = StepControl::new(tol);
    ctl.h_init = 1e-3;
    let mut trace = Vec::new();
    let y0 = series(&law, SERIES_RADIUS);
    let stop = integrate_until(&f, SERIES_RADIUS, y0, r_inf, &ctl, |_, y| y[0], &mut trace)?;
    let (t, y, h) = match stop {
        Stop::End => return Err(Error::NoZeroFound { r_inf }),
        Stop::Event { t, y, h } => (t, y, h),
    };
    // Bisection on the length of a fresh step from the last accepted node.
    let (mut lo, mut hi) = (0.0, h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dp_step(&f, t, &y, mid).0[0] > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let end = dp_step(&f, t, &y, s).0;
    let xi1 = t + s;
    trace.push((xi1, [0.0, end[1]]));
    let mu1 = -xi1 * xi1 * end[1];
    let mut p = RadialProfile {
        r_nodes: Vec::new(),
        theta: Vec::new(),
        dtheta: Vec::new(),
        xi1,
        mu1,
        psi: Vec::new(),
        law,
        trace,
    };
    p.resample(radial_nodes(
        xi1,
        r_inf.max(xi1 * (1.0 + 1e-9)),
        DEFAULT_NODES,
    ));
    Ok(p)
}

impl RadialProfile {
    pub fn nonlinearity(&self) -> Nonlinearity {
        self.law
    }

    pub fn r_inf(&self) -> f64 {
        *self.r_nodes.last().unwrap()
    }

    /// `(θ(r), θ'(r))` anywhere in `[0, ∞)`.
    pub fn theta_at(&self, r: f64) -> (f64, f64) {
        if r <= SERIES_RADIUS {
            let [v, d] = series(&self.law, r);
            return (v, d);
        }
        if r >= self.xi1 {
            return (harmonic_value(self.mu1, self.xi1, r), -self.mu1 / (r * r));
        }
        let k = match self
            .trace
            .binary_search_by(|p| p.0.partial_cmp(&r).unwrap())
        {
            Ok(i) => return (self.trace[i].1[0], self.trace[i].1[1]),
            Err(i) => i - 1,
        };
        let (t, y) = self.trace[k];
        let out = dp_step(&rhs(self.law), t, &y, r - t).0;
        (out[0], out[1])
    }

    /// `ψ(r) = −θ'(r)`.
    pub fn psi_at(&self, r: f64) -> f64 {
        -self.theta_at(r).1
    }

    /// Re-evaluate the profile on new nodes.
    pub fn resample(&mut self, nodes: Vec<f64>) {
        let vals: Vec<(f64, f64)> = nodes.iter().map(|&r| self.theta_at(r)).collect();
        self.theta = vals.iter().map(|v| v.0).collect();
        self.dtheta = vals.iter().map(|v| v.1).collect();
        self.psi = self.dtheta.iter().map(|d| -d).collect();
        self.r_nodes = nodes;
    }

    /// Copy of the profile on default nodes over `[0, r_inf]`.
    pub fn resampled_to_extent(&self, r_inf: f64) -> Self {
        let mut p = self.clone();
        p.resample(radial_nodes(self.xi1, r_inf, DEFAULT_NODES));
        p
    }

    /// Accepted integration nodes `(r, θ, θ')` up to and including `ξ₁`.
    pub fn integration_nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.trace.iter().map(|(r, y)| (*r, y[0], y[1]))
    }

    /// CSV with columns `r,theta,dtheta,psi`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,theta,dtheta,psi\n");
        for i in 0..self.r_nodes.len() {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.r_nodes[i], self.theta[i], self.dtheta[i], self.psi[i]
            );
        }
        s
    }
}

fn harmonic_value(mu1: f64, xi1: f64, r: f64) -> f64 {
    -mu1 * (1.0 / xi1 - 1.0 / r)
}

/// Exterior continuation `−μ₁(1/ξ₁ − 1/r)` for `r ≥ ξ₁`.
pub fn harmonic_extension(profile: &RadialProfile, r: f64) -> Result<f64> {
    if !(r >= profile.xi1) {
        return Err(Error::Domain(format!(
            "harmonic extension needs r >= xi1 = {}, got {r}",
            profile.xi1
        )));
    }
    Ok(harmonic_value(profile.mu1, profile.xi1, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn poly(nu: f64) -> EquationOfState {
        EquationOfState::polytrope_index(nu, 1.0).unwrap()
    }

    #[test]
    fn nu_one_is_sinc() {
        let p = solve_lane_emden(&poly(1.0), 1.0, 5.0, 1e-13).unwrap();
        assert!((p.xi1 - PI).abs() < 1e-10, "{}", p.xi1 - PI);
        assert!((p.mu1 - PI).abs() < 1e-10);
        for (i, &r) in p.r_nodes.iter().enumerate() {
            if r > 0.0 && r < PI {
                assert!((p.theta[i] - r.sin() / r).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn extension_is_c1() {
        let p = solve_lane_emden(&poly(1.5), 1.0, 6.0, 1e-12).unwrap();
        assert_eq!(harmonic_extension(&p, p.xi1).unwrap(), 0.0);
        assert!(harmonic_extension(&p, 1.0).is_err());
        let h = 1e-6;
        let right = (harmonic_extension(&p, p.xi1 + h).unwrap()) / h;
        let left = -p.theta_at(p.xi1 - h).0 / h;
        assert!((right - left).abs() < 1e-5);
    }

    #[test]
    fn missing_zero_is_reported() {
        assert!(matches!(
            solve_lane_emden(&poly(1.5), 1.0, 2.0, 1e-10),
            Err(Error::NoZeroFound { .. })
        ));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = solve_lane_emden(&poly(2.0), 1.0, 6.0, 1e-10).unwrap();
        let csv = p.to_csv();
        assert!(csv.starts_with("r,theta,dtheta,psi\n"));
        assert_eq!(csv.lines().count(), p.r_nodes.len() + 1);
    }
}
