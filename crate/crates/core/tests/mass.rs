use std::f64::consts::PI;
use std::sync::Arc;

use rotstar::eos::{EquationOfState, ScaleSet};
use rotstar::equilibrium::{extended_theta, solve_equilibrium, SolveOptions};
use rotstar::mass::{
    bracket_is_monotone, central_density_from_mass, constant_mass_curve, curve_monotonicity,
    mass_exponent, spherical_central_density, total_mass_dimensionless, GridSpec, MassModel,
};
use rotstar::potential::grid::AxiGrid;
use rotstar::radial::solve_lane_emden_default;
use rotstar::rotation::{mass_within_cylinder, CentrifugalField};
use rotstar::Error;

#[test]
fn spherical_mass_is_four_pi_mu1() {
    for nu in [1.5, 3.0] {
        let eos = EquationOfState::polytrope_index(nu, 1.0).unwrap();
        let p = solve_lane_emden_default(&eos, 1.0, 1e-12).unwrap();
        let grid = Arc::new(AxiGrid::for_profile(p.xi1, 1.5 * p.xi1, 256, 32, 8).unwrap());
        let th = extended_theta(&p, grid.clone());
        let m1 = total_mass_dimensionless(&th, &eos, 1.0);
        assert!(
            (m1 / (4.0 * PI * p.mu1) - 1.0).abs() < 1e-6,
            "nu {nu}: {m1}"
        );
        let scale = ScaleSet::from_central_enthalpy(&eos, 1.0, 1.0).unwrap();
        let cyl = mass_within_cylinder(&th, &eos, &scale).unwrap();
        assert!((cyl.total() / cyl.prefactor / m1 - 1.0).abs() < 1e-8);
        let sol = solve_equilibrium(
            &CentrifugalField::rigid(1e-3, grid),
            &eos,
            1.0,
            &th,
            &SolveOptions::default(),
        )
        .unwrap();
        let m1r = total_mass_dimensionless(&sol.u, &eos, 1.0);
        let cyl = mass_within_cylinder(&sol.u, &eos, &scale).unwrap();
        assert!((cyl.total() / cyl.prefactor / m1r - 1.0).abs() < 1e-8);
        assert!(m1r > m1);
    }
}

fn model(gamma: f64) -> MassModel {
    let eos = EquationOfState::polytrope(gamma, 1.0).unwrap();
    let grid = GridSpec {
        n_r: 128,
        n_zeta: 16,
        ..GridSpec::default()
    };
    MassModel::new(eos, 1.0, grid, SolveOptions::default()).unwrap()
}

#[test]
fn nonrotating_mass_scales_with_the_polytropic_exponent() {
    let m = model(5.0 / 3.0);
    let a = m.point(0.5, 0.0).unwrap();
    let b = m.point(2.0, 0.0).unwrap();
    let slope = (b.m / a.m).ln() / 4.0f64.ln();
    assert!((slope - mass_exponent(&m.eos)).abs() < 1e-3, "{slope}");
    assert!((mass_exponent(&m.eos) - 0.5).abs() < 1e-12);
}

#[test]
fn gamma_four_thirds_is_rejected() {
    let m = model(4.0 / 3.0);
    assert!(matches!(
        central_density_from_mass(&m, 1.0, 0.0, (0.1, 10.0)),
        Err(Error::GammaFourThirds)
    ));
    assert!(matches!(
        spherical_central_density(1.0, &m.eos, 1.0, 1.0),
        Err(Error::GammaFourThirds)
    ));
}

#[test]
fn central_density_inverts_the_mass() {
    let m = model(5.0 / 3.0);
    let target = m.point(1.3, 0.0).unwrap().m;
    let rho = central_density_from_mass(&m, target, 0.0, (0.3, 3.0)).unwrap();
    assert!((rho / 1.3 - 1.0).abs() < 1e-6, "{rho}");
    let rho_rot = central_density_from_mass(&m, target, 1e-3, (0.3, 3.0)).unwrap();
    let check = m.point(rho_rot, 1e-3).unwrap().m;
    assert!((check / target - 1.0).abs() < 1e-6);
    assert!(rho_rot < rho);
    assert!(matches!(
        central_density_from_mass(&m, target, 0.0, (2.0, 3.0)),
        Err(Error::NoBracket { .. })
    ));
}

#[test]
fn analytic_derivative_matches_finite_difference() {
    let m = model(5.0 / 3.0);
    let w2 = 2e-3;
    let p = m.point_with_derivative(1.0, w2).unwrap();
    let h = 1e-3;
    let fd = (m.point(1.0 + h, w2).unwrap().m - m.point(1.0 - h, w2).unwrap().m) / (2.0 * h);
    assert!((p.dm_drho / fd - 1.0).abs() < 1e-4, "{} {fd}", p.dm_drho);
}

#[test]
fn curve_reports_monotone_brackets_and_density_trend() {
    let m = model(5.0 / 3.0);
    let target = m.point(1.0, 0.0).unwrap().m;
    let pts = constant_mass_curve(&m, target, &[0.0, 1e-3, 2e-3], (0.3, 3.0)).unwrap();
    assert!((pts[0].rho_o - 1.0).abs() < 1e-6);
    let mono = curve_monotonicity(&m, &pts, (0.3, 3.0), 4).unwrap();
    assert_eq!(mono.bracket_monotone, vec![true; 3]);
    assert_eq!(mono.largest_monotone_beta, Some(pts[2].beta));
    assert_eq!(mono.rho_trend, -1);
    assert!(bracket_is_monotone(&m, 0.0, (0.3, 0.3), 4).is_err());
}
