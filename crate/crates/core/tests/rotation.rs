use std::sync::Arc;

use rotstar::eos::{omega_of_beta, EquationOfState, ScaleSet};
use rotstar::equilibrium::{extended_theta, hl_certificate, solve_equilibrium_j, SolveOptions};
use rotstar::potential::field::AxiField;
use rotstar::potential::grid::AxiGrid;
use rotstar::radial::{solve_lane_emden_default, RadialProfile};
use rotstar::rotation::{
    b_from_j, b_from_omega, frechet_b_apply, mass_within_cylinder, RotationLaw,
};
use rotstar::Error;

struct Case {
    eos: EquationOfState,
    p: RadialProfile,
    grid: Arc<AxiGrid>,
    theta: AxiField,
    scale: ScaleSet,
}

fn case(n_r: usize) -> Case {
    let eos = EquationOfState::polytrope_index(1.5, 1.0).unwrap();
    let p = solve_lane_emden_default(&eos, 1.0, 1e-12).unwrap();
    let grid = Arc::new(AxiGrid::for_profile(p.xi1, 1.5 * p.xi1, n_r, 32, 8).unwrap());
    let theta = extended_theta(&p, grid.clone());
    let scale = ScaleSet::from_central_enthalpy(&eos, 1.0, 1.0).unwrap();
    Case {
        eos,
        p,
        grid,
        theta,
        scale,
    }
}

/// `j(m) = Ω a² R² (m/M)(1 + m/M)/2` on `[0, 2M]`.
fn smooth_law(c: &Case, omega: f64) -> RotationLaw {
    let cyl = mass_within_cylinder(&c.theta, &c.eos, &c.scale).unwrap();
    let mt = cyl.total();
    let m: Vec<f64> = (0..=200).map(|k| 2.0 * mt * k as f64 / 200.0).collect();
    let j = m
        .iter()
        .map(|x| omega * (c.scale.a_len * cyl.r_eq).powi(2) * 0.5 * x / mt * (1.0 + x / mt))
        .collect();
    RotationLaw::AngularMomentum { m, j }
}

#[test]
fn rigid_angular_momentum_round_trip() {
    let c = case(256);
    let omega = omega_of_beta(1e-3, &c.scale, &c.eos);
    let cyl = mass_within_cylinder(&c.theta, &c.eos, &c.scale).unwrap();
    let n = 400;
    let (mut m, mut j) = (vec![], vec![]);
    for k in 0..=n {
        let tau = k as f64 / n as f64;
        let w = cyl.r_eq * (1.0 - (1.0 - tau).powi(2));
        m.push(cyl.at(w));
        j.push(omega * (c.scale.a_len * w).powi(2));
    }
    let law = RotationLaw::AngularMomentum { m, j };
    let bj = b_from_j(&law, &c.theta, &c.eos, &c.scale, c.grid.clone()).unwrap();
    let bo = b_from_omega(
        &RotationLaw::Constant { omega },
        &c.scale,
        &c.eos,
        c.grid.clone(),
    )
    .unwrap();
    let norm = bo.b.value(cyl.r_eq);
    let worst = (0..=200)
        .map(|k| cyl.r_eq * k as f64 / 200.0)
        .map(|w| (bj.b.value(w) - bo.b.value(w)).abs() / norm)
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn angular_momentum_derivative_is_consistent() {
    let c = case(128);
    let law = smooth_law(&c, omega_of_beta(1e-3, &c.scale, &c.eos));
    let h = AxiField::from_fn(c.grid.clone(), |r, z| {
        0.1 * (r / c.p.xi1).powi(2) * (1.0 + 0.5 * z * z)
    });
    let d = frechet_b_apply(&law, &c.theta, &h, &c.eos, &c.scale).unwrap();
    let project = |f: &AxiField| AxiField::from_modes(c.grid.clone(), &f.legendre_coeffs());
    let b0 = project(
        &b_from_j(&law, &c.theta, &c.eos, &c.scale, c.grid.clone())
            .unwrap()
            .g,
    );
    let eps = [1e-2, 5e-3, 2.5e-3];
    let rem: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let up = c.theta.zip_with(&h, |a, b| a + e * b);
            let b1 = project(
                &b_from_j(&law, &up, &c.eos, &c.scale, c.grid.clone())
                    .unwrap()
                    .g,
            );
            let diff = b1.zip_with(&b0, |a, b| a - b);
            diff.zip_with(&d, |a, b| a - e * b).sup_norm()
        })
        .collect();
    for k in 0..eps.len() - 1 {
        let order = (rem[k] / rem[k + 1]).ln() / (eps[k] / eps[k + 1]).ln();
        assert!(order >= 1.0, "{rem:?}");
    }
    assert!(rem[0] < 1e-2 * eps[0] * d.sup_norm());
}

#[test]
fn angular_momentum_solve_is_admissible() {
    let c = case(128);
    let law = smooth_law(&c, omega_of_beta(1e-3, &c.scale, &c.eos));
    let sol =
        solve_equilibrium_j(&law, &c.eos, &c.scale, &c.theta, &SolveOptions::default()).unwrap();
    assert!(sol.admissibility.all(), "{:?}", sol.admissibility);
    assert!(sol.equatorial_radius().unwrap() > sol.polar_radius().unwrap());
    let sigma = hl_certificate(&sol.u, &c.eos, 1.0, Some((&law, &c.scale))).unwrap();
    assert!(sigma > 1e-3);
}

#[test]
fn laws_are_validated() {
    let bad = [
        RotationLaw::Constant { omega: -1.0 },
        RotationLaw::Differential {
            varpi: vec![0.0, 0.0],
            omega: vec![1.0, 1.0],
        },
        RotationLaw::Differential {
            varpi: vec![0.0, 1.0],
            omega: vec![1.0, -1.0],
        },
        RotationLaw::AngularMomentum {
            m: vec![0.5, 1.0],
            j: vec![0.0, 1.0],
        },
        RotationLaw::AngularMomentum {
            m: vec![0.0, 1.0],
            j: vec![f64::NAN, 1.0],
        },
    ];
    for law in bad {
        assert!(
            matches!(law.validate(), Err(Error::InvalidParameter { .. })),
            "{law:?}"
        );
    }
    let c = case(32);
    let j = RotationLaw::AngularMomentum {
        m: vec![0.0, 1.0],
        j: vec![0.0, 1.0],
    };
    assert!(b_from_omega(&j, &c.scale, &c.eos, c.grid.clone()).is_err());
}

#[test]
fn differential_law_with_flat_profile_is_rigid() {
    let c = case(64);
    let omega = omega_of_beta(1e-3, &c.scale, &c.eos);
    let varpi: Vec<f64> = (0..=20)
        .map(|k| 0.2 * k as f64 * c.scale.a_len * c.p.xi1)
        .collect();
    let flat = RotationLaw::Differential {
        omega: vec![omega; varpi.len()],
        varpi,
    };
    let a = b_from_omega(&flat, &c.scale, &c.eos, c.grid.clone()).unwrap();
    let b = b_from_omega(
        &RotationLaw::Constant { omega },
        &c.scale,
        &c.eos,
        c.grid.clone(),
    )
    .unwrap();
    assert!(
        a.g.sup_diff(&b.g) < 1e-12 * b.g.sup_norm().max(1e-300),
        "{}",
        a.g.sup_diff(&b.g)
    );
}
