use std::sync::Arc;
use std::time::Instant;

use rotstar::eos::EquationOfState;
use rotstar::equilibrium::checks::{boundary_on_ray, psi_of, weighted_block_bound};
use rotstar::equilibrium::{
    apply_g, check_admissibility, continuation_in_beta, dg_matrix, extended_theta, frechet_g_apply,
    free_boundary, hl_certificate, solve_equilibrium, SolveOptions,
};
use rotstar::potential::field::AxiField;
use rotstar::potential::grid::AxiGrid;
use rotstar::radial::{solve_lane_emden_default, RadialProfile};
use rotstar::rotation::CentrifugalField;
use rotstar::Error;

fn setup(nu: f64, n_r: usize) -> (EquationOfState, RadialProfile, Arc<AxiGrid>) {
    let eos = EquationOfState::polytrope_index(nu, 1.0).unwrap();
    let p = solve_lane_emden_default(&eos, 1.0, 1e-12).unwrap();
    let grid = Arc::new(AxiGrid::for_profile(p.xi1, 1.5 * p.xi1, n_r, 32, 8).unwrap());
    (eos, p, grid)
}

#[test]
fn spherical_solution_reproduces_lane_emden() {
    let (eos, p, grid) = setup(1.5, 256);
    let init = extended_theta(&p, grid.clone());
    let t = Instant::now();
    let sol = solve_equilibrium(
        &CentrifugalField::zero(grid.clone()),
        &eos,
        1.0,
        &init,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(t.elapsed().as_secs() < 60);
    let err = sol.u.sup_diff(&init);
    assert!(err <= 1e-5, "{err}");
    for r in &sol.r_of_zeta {
        assert!((r - p.xi1).abs() <= 1e-5, "{r} vs {}", p.xi1);
    }
    assert!(sol.admissibility.all());
    assert!((sol.u.at(0, 0) - 1.0).abs() < 1e-12);
}

#[test]
fn slow_rotation_is_oblate() {
    let (eos, p, grid) = setup(1.5, 256);
    let init = extended_theta(&p, grid.clone());
    let t = Instant::now();
    let sol = solve_equilibrium(
        &CentrifugalField::rigid(1e-3, grid.clone()),
        &eos,
        1.0,
        &init,
        &SolveOptions::default(),
    )
    .unwrap();
    assert!(t.elapsed().as_secs() < 60);
    let (re, rp) = (
        sol.equatorial_radius().unwrap(),
        sol.polar_radius().unwrap(),
    );
    let ratio = (re - rp) / p.xi1 / 1e-3;
    assert!((ratio - 5.78).abs() < 0.1, "{ratio}");
    assert!(sol.admissibility.all());
    assert!(sol.hl_sigma_min > 0.0);
    assert!(re > rp);
}

fn ray_of(f: impl Fn(f64) -> f64, n: usize, r_max: f64) -> (Vec<f64>, Vec<f64>) {
    let r: Vec<f64> = (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect();
    let v = r.iter().map(|&x| f(x)).collect();
    (r, v)
}

#[test]
fn boundary_of_linear_ray_is_one() {
    let (r, v) = ray_of(|x| 1.0 - x, 41, 2.0);
    let b = boundary_on_ray(&r, &v, 0.1, 0.0).unwrap();
    assert!((b - 1.0).abs() < 1e-12, "{b}");
}

#[test]
fn boundary_rejects_multiple_or_missing_crossings() {
    let (r, v) = ray_of(|x| (3.0 * x).cos(), 81, 4.0);
    assert!(matches!(
        boundary_on_ray(&r, &v, 0.05, 0.5),
        Err(Error::NoSignChange { .. })
    ));
    let (r, v) = ray_of(|x| 1.0 + x, 21, 2.0);
    assert!(matches!(
        boundary_on_ray(&r, &v, 0.05, 0.5),
        Err(Error::NoSignChange { .. })
    ));
    let (r, v) = ray_of(|x| -1.0 - x, 21, 2.0);
    assert!(boundary_on_ray(&r, &v, 0.05, 0.5).is_err());
}

#[test]
fn vacuum_input_gives_unit_potential_and_identity_certificate() {
    let (eos, _, grid) = setup(1.5, 64);
    let u = AxiField::from_fn(grid.clone(), |r, _| -0.1 - r);
    let g = apply_g(&u, &eos, 1.0);
    assert!(g.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    let sigma = hl_certificate(&u, &eos, 1.0, None).unwrap();
    assert!((sigma - 1.0).abs() < 1e-12, "{sigma}");
}

#[test]
fn constant_field_fails_radial_decrease() {
    let (_, _, grid) = setup(1.5, 64);
    let u = AxiField::constant(grid, 1.0);
    let a = check_admissibility(&u, 0.1);
    assert!(!a.a1 && !a.a2 && !a.all());
}

#[test]
fn lane_emden_profile_is_admissible() {
    let (_, p, grid) = setup(3.0, 128);
    let u = extended_theta(&p, grid);
    let a = check_admissibility(&u, 0.05 * p.xi1);
    assert!(a.all(), "{a:?}");
    assert!(a.boundary_gradient > 0.0);
    let bd = free_boundary(&u, 0.05 * p.xi1).unwrap();
    assert!(bd.iter().all(|b| (b - p.xi1).abs() < 1e-6));
}

fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

fn frechet_exponent(nu: f64) -> f64 {
    let (eos, p, grid) = setup(nu, 128);
    let u = extended_theta(&p, grid.clone());
    let h = AxiField::from_fn(grid, |r, z| {
        (1.0 + 0.5 * z * z) * (-(r / p.xi1).powi(2)).exp()
    });
    let g0 = apply_g(&u, &eos, 1.0);
    let dg = frechet_g_apply(&u, &h, &eos, 1.0);
    let eps = [1e-1, 5e-2, 2.5e-2, 1.25e-2, 6.25e-3];
    let rem: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let g1 = apply_g(&u.zip_with(&h, |a, b| a + e * b), &eos, 1.0);
            let mut worst = 0.0f64;
            for k in 0..g1.values.len() {
                worst = worst.max((g1.values[k] - g0.values[k] - e * dg.values[k]).abs());
            }
            worst
        })
        .collect();
    fit_slope(&eps, &rem)
}

#[test]
fn frechet_remainder_exponent() {
    for nu in [1.5, 2.5] {
        let k = frechet_exponent(nu);
        assert!(k >= nu.min(2.0) - 0.1, "nu {nu}: exponent {k}");
    }
}

#[test]
fn dg_matrix_matches_operator_application() {
    let (eos, p, grid) = setup(1.5, 64);
    let u = extended_theta(&p, grid.clone());
    let j = dg_matrix(&u, &eos.nonlinearity(1.0));
    let h = AxiField::from_fn(grid.clone(), |r, z| (1.0 + z * z) * (-r * r / 4.0).exp());
    let direct = frechet_g_apply(&u, &h, &eos, 1.0).legendre_coeffs();
    let hm = h.legendre_coeffs();
    let n = grid.n_r();
    for l in (0..=grid.l_max).step_by(2) {
        for i in 0..n {
            let row = (l / 2) * n + i;
            let mut v = 0.0;
            for c in 0..j.ncols() {
                v += j[(row, c)] * hm.mode(c / n * 2)[c % n];
            }
            assert!(
                (v - direct.mode(l)[i]).abs() < 1e-8,
                "l {l} i {i}: {v} vs {}",
                direct.mode(l)[i]
            );
        }
    }
}

#[test]
fn certificates_at_lane_emden_exceed_threshold() {
    for nu in [1.5, 3.0] {
        let (eos, p, grid) = setup(nu, 128);
        let u = extended_theta(&p, grid);
        let sigma = hl_certificate(&u, &eos, 1.0, None).unwrap();
        assert!(sigma > 1e-3, "nu {nu}: {sigma}");
    }
}

#[test]
fn quadrupole_block_is_a_weighted_contraction() {
    let (eos, p, grid) = setup(1.5, 128);
    let u = extended_theta(&p, grid.clone());
    let j = dg_matrix(&u, &eos.nonlinearity(1.0));
    let psi = psi_of(&u);
    let b = weighted_block_bound(&j, grid.n_r(), 2, &psi);
    assert!(b.operator_norm < 1.0, "{b:?}");
    assert!(b.inverse_bound >= 1.0 - b.operator_norm - 1e-12, "{b:?}");
}

#[test]
fn continuation_radius_grows_with_beta() {
    let (eos, p, grid) = setup(1.5, 128);
    let init = extended_theta(&p, grid);
    let sols = continuation_in_beta(
        &[0.0, 1e-4, 1e-3],
        &eos,
        1.0,
        &init,
        &SolveOptions::default(),
    )
    .into_result()
    .unwrap();
    let re: Vec<f64> = sols
        .iter()
        .map(|s| s.equatorial_radius().unwrap())
        .collect();
    assert!(re.windows(2).all(|w| w[1] > w[0]), "{re:?}");
    assert!(sols.iter().all(|s| s.admissibility.all()));
    let empty = continuation_in_beta(&[], &eos, 1.0, &init, &SolveOptions::default());
    assert!(empty.solutions.is_empty() && empty.failure.is_none());
    let bad = continuation_in_beta(&[1e-3, 1e-4], &eos, 1.0, &init, &SolveOptions::default());
    assert!(matches!(bad.failure, Some(Error::InvalidParameter { .. })));
}

#[test]
fn perturbed_initial_guess_converges_to_the_same_solution() {
    let (eos, p, grid) = setup(1.5, 128);
    let init = extended_theta(&p, grid.clone());
    let g = CentrifugalField::rigid(1e-3, grid.clone());
    let opts = SolveOptions::default();
    let reference = solve_equilibrium(&g, &eos, 1.0, &init, &opts).unwrap();
    let noisy = init.zip_with(
        &AxiField::from_fn(grid, |r, z| r * r * (3.0 * z * z - 1.0) * (7.0 * r).sin()),
        |a, b| a + 2e-3 * b,
    );
    let sol = solve_equilibrium(&g, &eos, 1.0, &noisy, &opts).unwrap();
    assert!(sol.u.sup_diff(&reference.u) < 1e-8);
}

#[test]
fn picard_iteration_reaches_the_newton_solution() {
    let (eos, p, grid) = setup(1.5, 64);
    let init = extended_theta(&p, grid.clone());
    let g = CentrifugalField::rigid(1e-3, grid);
    let newton = solve_equilibrium(&g, &eos, 1.0, &init, &SolveOptions::default()).unwrap();
    let opts = SolveOptions {
        newton: false,
        max_iter: 400,
        tol: 1e-9,
        ..SolveOptions::default()
    };
    let picard = solve_equilibrium(&g, &eos, 1.0, &init, &opts).unwrap();
    assert!(picard.residual_history.len() > newton.residual_history.len());
    assert!(picard.u.sup_diff(&newton.u) < 1e-7);
}

#[test]
fn invalid_options_are_rejected() {
    let (eos, p, grid) = setup(1.5, 32);
    let init = extended_theta(&p, grid.clone());
    let g = CentrifugalField::zero(grid);
    for opts in [
        SolveOptions {
            tol: -1.0,
            ..SolveOptions::default()
        },
        SolveOptions {
            damping: 0.0,
            ..SolveOptions::default()
        },
        SolveOptions {
            max_iter: 0,
            ..SolveOptions::default()
        },
    ] {
        assert!(matches!(
            solve_equilibrium(&g, &eos, 1.0, &init, &opts),
            Err(Error::InvalidParameter { .. })
        ));
    }
}

#[test]
fn solution_depends_continuously_on_beta() {
    let (eos, p, grid) = setup(1.5, 128);
    let init = extended_theta(&p, grid.clone());
    let opts = SolveOptions::default();
    let solve = |b: f64| {
        solve_equilibrium(
            &CentrifugalField::rigid(b, grid.clone()),
            &eos,
            1.0,
            &init,
            &opts,
        )
        .unwrap()
    };
    let a = solve(1e-3);
    let b = solve(1e-3 + 1e-5);
    let gap = a.u.sup_diff(&b.u);
    assert!(gap <= 10.0 * 1e-5, "{gap}");
    assert!(a.admissibility.boundary_gradient > 0.0);
    let h = &a.residual_history;
    assert!(h.len() >= 3, "{h:?}");
    let n = h.len();
    let order = (h[n - 1] / h[n - 2]).ln() / (h[n - 2] / h[n - 3]).ln();
    assert!(order >= 1.5 - 0.1, "{order} {h:?}");
}
