//! Barotropic equations of state and the physical scaling constants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::roots::bisect;

/// White-dwarf constants: `P = A F(X)`, `rho = B X^3`, `X` the Fermi momentum over `mc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhiteDwarfParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum EosKind {
    Polytrope,
    WhiteDwarf(WhiteDwarfParams),
}

/// A barotropic pressure law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationOfState {
    pub kind: EosKind,
    pub gamma: f64,
    pub nu: f64,
    /// Pressure constant of the leading power law `P ~ A_const rho^gamma`.
    pub a_const: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and positive, got {v}"),
        ))
    }
}

impl EquationOfState {
    /// `P = a_const rho^gamma`, `1 < gamma <= 2`.
    pub fn polytrope(gamma: f64, a_const: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 1.0 && gamma <= 2.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must lie in (1, 2], got {gamma}"),
            ));
        }
        positive("A_const", a_const)?;
        Ok(Self {
            kind: EosKind::Polytrope,
            gamma,
            nu: 1.0 / (gamma - 1.0),
            a_const,
        })
    }

    /// Polytrope of index `nu >= 1`, keeping `nu` exact.
    pub fn polytrope_index(nu: f64, a_const: f64) -> Result<Self> {
        if !(nu.is_finite() && nu >= 1.0) {
            return Err(Error::invalid(
                "nu",
                format!("must be finite and >= 1, got {nu}"),
            ));
        }
        positive("A_const", a_const)?;
        Ok(Self {
            kind: EosKind::Polytrope,
            gamma: 1.0 + 1.0 / nu,
            nu,
            a_const,
        })
    }

    pub fn white_dwarf(a: f64, b: f64, c: f64) -> Result<Self> {
        positive("A", a)?;
        positive("B", b)?;
        positive("c", c)?;
        Ok(Self {
            kind: EosKind::WhiteDwarf(WhiteDwarfParams { a, b, c }),
            gamma: 5.0 / 3.0,
            nu: 1.5,
            a_const: 8.0 * a / (5.0 * b.powf(5.0 / 3.0)),
        })
    }

    /// Check the stored invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 1.0 && self.gamma <= 2.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must lie in (1, 2], got {}", self.gamma),
            ));
        }
        let nu = 1.0 / (self.gamma - 1.0);
        if (nu - self.nu).abs() > 1e-12 * nu {
            return Err(Error::invalid(
                "nu",
                format!("{} != 1/(gamma-1) = {nu}", self.nu),
            ));
        }
        positive("A_const", self.a_const)?;
        if let EosKind::WhiteDwarf(p) = self.kind {
            if self.nu != 1.5 {
                return Err(Error::invalid("gamma", "white dwarf requires gamma = 5/3"));
            }
            let expect = 8.0 * p.a / (5.0 * p.b.powf(5.0 / 3.0));
            if (expect - self.a_const).abs() > 1e-12 * expect {
                return Err(Error::invalid(
                    "A_const",
                    "white dwarf requires A_const = 8A/(5B^(5/3))",
                ));
            }
        }
        Ok(())
    }

    /// `kappa = B u_O / (16 A c^2)`, zero for the polytrope.
    pub fn kappa(&self, u_o: f64) -> f64 {
        match self.kind {
            EosKind::Polytrope => 0.0,
            EosKind::WhiteDwarf(p) => p.b * u_o / (16.0 * p.a * p.c * p.c),
        }
    }

    /// `Lambda_rho(xi)` for physical enthalpy `xi`.
    pub fn lambda_rho(&self, xi: f64) -> f64 {
        match self.kind {
            EosKind::Polytrope => 0.0,
            EosKind::WhiteDwarf(p) => {
                let k = p.b / (16.0 * p.a * p.c * p.c);
                (1.0 + k * xi).powf(1.5) - 1.0
            }
        }
    }

    /// `Lambda_rho'(xi) = [1 + (1/nu) xi d/dxi] Lambda_rho`.
    pub fn lambda_rho_prime(&self, xi: f64) -> f64 {
        match self.kind {
            EosKind::Polytrope => 0.0,
            EosKind::WhiteDwarf(p) => {
                let k = p.b / (16.0 * p.a * p.c * p.c);
                let s = 1.0 + k * xi;
                s.powf(1.5) - 1.0 + k * xi * s.sqrt()
            }
        }
    }

    /// The scaled nonlinearity for central enthalpy `u_o`.
    pub fn nonlinearity(&self, u_o: f64) -> Nonlinearity {
        Nonlinearity {
            nu: self.nu,
            kappa: self.kappa(u_o),
        }
    }

    /// `(Aγ/(γ−1))^{-ν}`, the density coefficient of the power law.
    pub fn density_coefficient(&self) -> f64 {
        (self.a_const * self.gamma / (self.gamma - 1.0)).powf(-self.nu)
    }

    /// Density at physical enthalpy `u`.
    pub fn density_of_enthalpy(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        self.density_coefficient() * u.powf(self.nu) * (1.0 + self.lambda_rho(u))
    }

    /// Inverse of [`Self::density_of_enthalpy`].
    pub fn enthalpy_of_density(&self, rho: f64) -> Result<f64> {
        positive("rho_O", rho)?;
        let u0 = (rho / self.density_coefficient()).powf(1.0 / self.nu);
        match self.kind {
            EosKind::Polytrope => Ok(u0),
            EosKind::WhiteDwarf(_) => {
                // Lambda_rho >= 0, so the root lies below the power-law value.
                let g = |lu: f64| (self.density_of_enthalpy(lu.exp()) / rho).ln();
                let mut lo = u0.ln() - 1.0;
                while g(lo) > 0.0 {
                    lo -= 1.0;
                }
                Ok(bisect(g, lo, u0.ln() + 1e-12, 1e-15)?.exp())
            }
        }
    }
}

/// Scaled nonlinearity `f(u) = (u∨0)^ν (1 + κu)^{3/2}` (κ = 0 for the polytrope).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub nu: f64,
    pub kappa: f64,
}

impl Nonlinearity {
    pub fn polytrope(nu: f64) -> Self {
        Self { nu, kappa: 0.0 }
    }

    #[inline]
    pub fn f(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let p = u.powf(self.nu);
        if self.kappa == 0.0 {
            p
        } else {
            p * (1.0 + self.kappa * u).powf(1.5)
        }
    }

    #[inline]
    pub fn fprime(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let p = self.nu * u.powf(self.nu - 1.0);
        if self.kappa == 0.0 {
            p
        } else {
            let ku = self.kappa * u;
            let s = 1.0 + ku;
            p * (s.powf(1.5) + ku * s.sqrt())
        }
    }

    #[inline]
    pub fn f_and_fprime(&self, u: f64) -> (f64, f64) {
        (self.f(u), self.fprime(u))
    }
}

fn checked_inputs(u: f64, u_o: f64) -> Result<()> {
    if !u.is_finite() {
        return Err(Error::Domain(format!("enthalpy must be finite, got {u}")));
    }
    if !(u_o.is_finite() && u_o > 0.0) {
        return Err(Error::Domain(format!(
            "central enthalpy must be positive, got {u_o}"
        )));
    }
    Ok(())
}

/// `f(u) = (u∨0)^ν (1 + Λ_ρ(u_O u))`.
pub fn f_of_u(u: f64, eos: &EquationOfState, u_o: f64) -> Result<f64> {
    checked_inputs(u, u_o)?;
    Ok(eos.nonlinearity(u_o).f(u))
}

/// `f'(u) = ν (u∨0)^{ν−1} (1 + Λ_ρ'(u_O u))`, zero for `u <= 0`.
pub fn fprime_of_u(u: f64, eos: &EquationOfState, u_o: f64) -> Result<f64> {
    checked_inputs(u, u_o)?;
    Ok(eos.nonlinearity(u_o).fprime(u))
}

/// Central state and unit system of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    pub u_o: f64,
    pub rho_o: f64,
    pub a_len: f64,
    pub g_grav: f64,
}

impl ScaleSet {
    pub fn from_central_enthalpy(eos: &EquationOfState, u_o: f64, g_grav: f64) -> Result<Self> {
        positive("u_O", u_o)?;
        positive("G", g_grav)?;
        let a_len = length_scale(eos, u_o, g_grav);
        Ok(Self {
            u_o,
            rho_o: eos.density_of_enthalpy(u_o),
            a_len,
            g_grav,
        })
    }

    pub fn from_central_density(eos: &EquationOfState, rho_o: f64, g_grav: f64) -> Result<Self> {
        let u_o = eos.enthalpy_of_density(rho_o)?;
        let mut s = Self::from_central_enthalpy(eos, u_o, g_grav)?;
        s.rho_o = rho_o;
        Ok(s)
    }
}

/// `a = (4πG)^{-1/2} (Aγ/(γ−1))^{ν/2} u_O^{(1−ν)/2}`.
pub fn length_scale(eos: &EquationOfState, u_o: f64, g_grav: f64) -> f64 {
    let k = eos.a_const * eos.gamma / (eos.gamma - 1.0);
    (4.0 * PI * g_grav).powf(-0.5) * k.powf(0.5 * eos.nu) * u_o.powf(0.5 * (1.0 - eos.nu))
}

/// Dimensionless rotation parameter for uniform rotation.
pub fn beta_of_omega(omega: f64, scale: &ScaleSet, eos: &EquationOfState) -> Result<f64> {
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::invalid(
            "Omega",
            format!("must be finite and nonnegative, got {omega}"),
        ));
    }
    let k = eos.a_const * eos.gamma / (eos.gamma - 1.0);
    Ok(omega * omega / (2.0 * PI * scale.g_grav) * k.powf(eos.nu) * scale.u_o.powf(-eos.nu))
}

/// Angular velocity with the given rotation parameter; inverse of [`beta_of_omega`].
pub fn omega_of_beta(beta: f64, scale: &ScaleSet, eos: &EquationOfState) -> f64 {
    let k = eos.a_const * eos.gamma / (eos.gamma - 1.0);
    (beta * 2.0 * PI * scale.g_grav * k.powf(-eos.nu) * scale.u_o.powf(eos.nu)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        let e = EquationOfState::polytrope_index(1.5, 1.0).unwrap();
        assert_eq!(f_of_u(-0.5, &e, 1.0).unwrap(), 0.0);
        assert_eq!(f_of_u(1.0, &e, 1.0).unwrap(), 1.0);
        let e2 = EquationOfState::polytrope_index(2.0, 1.0).unwrap();
        assert!((fprime_of_u(0.25, &e2, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(fprime_of_u(-1.0, &e2, 1.0).unwrap(), 0.0);
        assert!(f_of_u(f64::NAN, &e, 1.0).is_err());
    }

    #[test]
    fn white_dwarf_matches_density_formula() {
        let (a, b, c): (f64, f64, f64) = (2.0, 3.0, 0.7);
        let e = EquationOfState::white_dwarf(a, b, c).unwrap();
        e.validate().unwrap();
        let u_o = 0.01 * 16.0 * a * c * c / b;
        assert!((e.kappa(u_o) - 0.01).abs() < 1e-15);
        let f = f_of_u(1.0, &e, u_o).unwrap();
        assert!((f - 1.01f64.powf(1.5)).abs() < 1e-14);
        for &u in &[0.3f64, 1.0, 7.0] {
            let rho = b.powf(2.5) / (8.0 * a.powf(1.5))
                * u.powf(1.5)
                * (1.0 + b * u / (16.0 * a * c * c)).powf(1.5);
            assert!((e.density_of_enthalpy(u) - rho).abs() < 1e-12 * rho);
            let back = e.enthalpy_of_density(rho).unwrap();
            assert!((back - u).abs() < 1e-12 * u);
        }
    }

    #[test]
    fn white_dwarf_derivative_matches_finite_difference() {
        let e = EquationOfState::white_dwarf(1.0, 1.0, 1.0).unwrap();
        let n = e.nonlinearity(1.6);
        for &u in &[0.01, 0.4, 1.0] {
            let h = 1e-6;
            let fd = (n.f(u + h) - n.f(u - h)) / (2.0 * h);
            assert!((fd - n.fprime(u)).abs() < 1e-8 * (1.0 + fd.abs()));
        }
        let u = 1e-6;
        assert!((n.fprime(u) / n.f(u) * u - 1.5).abs() < 1e-5);
    }

    #[test]
    fn beta_forms_agree_for_polytrope() {
        let e = EquationOfState::polytrope(1.6, 0.8).unwrap();
        let s = ScaleSet::from_central_density(&e, 1.0, 1.0).unwrap();
        let om = (2.0 * PI).sqrt();
        assert!((beta_of_omega(om, &s, &e).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(beta_of_omega(0.0, &s, &e).unwrap(), 0.0);
        assert!((omega_of_beta(1.0, &s, &e) - om).abs() < 1e-14);
    }

    #[test]
    fn length_scale_closes_the_scaled_equation() {
        let e = EquationOfState::polytrope(1.5, 1.3).unwrap();
        let s = ScaleSet::from_central_enthalpy(&e, 0.7, 2.0).unwrap();
        // 4πG ρ_O a² / u_O = 1
        let v = 4.0 * PI * s.g_grav * s.rho_o * s.a_len * s.a_len / s.u_o;
        assert!((v - 1.0).abs() < 1e-13);
    }
}
