//! Randomized checks of the pointwise remainder bounds and of the flatness of `𝒦f` at the origin.

use std::sync::Arc;

use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotstar::eos::Nonlinearity;
use rotstar::numerics::quad::legendre;
use rotstar::potential::grid::radial_nodes;
use rotstar::potential::{apply_k_multipole, grad_at_origin, AxiField, AxiGrid};

const SAMPLES: u32 = 10_000;
const M: f64 = 2.0;
const INDICES: [f64; 4] = [1.3, 1.5, 2.5, 3.0];

fn remainder(nu: f64, u: f64, h: f64) -> f64 {
    let f = Nonlinearity::polytrope(nu);
    (f.f(u + h) - f.f(u) - f.fprime(u) * h).abs()
}

fn power_difference(nu: f64, u: f64, h: f64) -> f64 {
    let p = |x: f64| if x > 0.0 { x.powf(nu - 1.0) } else { 0.0 };
    (p(u + h) - p(u)).abs()
}

/// Constant in `|R| ≤ C|h|^{ν∧2}` on `|u|, |u+h| ≤ M`.
fn remainder_constant(nu: f64) -> f64 {
    if nu <= 2.0 {
        1.0
    } else {
        0.5 * nu * (nu - 1.0) * M.powf(nu - 2.0)
    }
}

/// Constant in `|Δ(u₊^{ν−1})| ≤ C|h|^{(ν−1)∧1}`.
fn holder_constant(nu: f64) -> f64 {
    if nu <= 2.0 {
        1.0
    } else {
        (nu - 1.0) * M.powf(nu - 2.0)
    }
}

fn pair() -> impl Strategy<Value = (f64, f64)> {
    (-M..=M, -M..=M).prop_map(|(u, v)| (u, v - u))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(SAMPLES))]

    #[test]
    fn remainder_bound_holds((u, h) in pair(), k in 0usize..4) {
        let nu = INDICES[k];
        let bound = remainder_constant(nu) * h.abs().powf(nu.min(2.0));
        prop_assert!(remainder(nu, u, h) <= bound * (1.0 + 1e-12) + 1e-300, "nu {} u {} h {}", nu, u, h);
    }

    #[test]
    fn power_is_holder_continuous((u, h) in pair(), k in 0usize..4) {
        let nu = INDICES[k];
        let bound = holder_constant(nu) * h.abs().powf((nu - 1.0).min(1.0));
        prop_assert!(power_difference(nu, u, h) <= bound * (1.0 + 1e-12) + 1e-300, "nu {} u {} h {}", nu, u, h);
    }
}

/// Slope of the log of the per-decade envelope of `err` against `log |h|`.
fn envelope_slope(err: impl Fn(f64, f64) -> f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decades = 6;
    let mut env = vec![0.0f64; decades];
    for n in 0..SAMPLES as usize {
        let d = n % decades;
        let mag = 10f64.powf(-(d as f64) - rng.random::<f64>());
        let h = if rng.random::<bool>() { mag } else { -mag };
        let u = rng.random_range((-M - h.min(0.0))..=(M - h.max(0.0)));
        env[d] = env[d].max(err(u, h));
    }
    let xs: Vec<f64> = (0..decades).map(|d| -(d as f64) * 10f64.ln()).collect();
    let ys: Vec<f64> = env.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / decades as f64;
    let my = ys.iter().sum::<f64>() / decades as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[test]
fn remainder_exponent_from_sampled_envelope() {
    for (k, nu) in INDICES.into_iter().enumerate() {
        let s = envelope_slope(|u, h| remainder(nu, u, h), 11 + k as u64);
        assert!(s >= nu.min(2.0) - 0.05, "nu {nu}: slope {s}");
    }
}

#[test]
fn holder_exponent_from_sampled_envelope() {
    for (k, nu) in INDICES.into_iter().enumerate() {
        let s = envelope_slope(|u, h| power_difference(nu, u, h), 23 + k as u64);
        assert!(s >= (nu - 1.0).min(1.0) - 0.05, "nu {nu}: slope {s}");
    }
}

#[test]
fn potential_is_flat_at_the_origin() {
    let grid = Arc::new(AxiGrid::new(radial_nodes(1.0, 1.5, 65), 8, 4).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..SAMPLES {
        let c: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let w: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.5..4.0));
        let f = AxiField::from_fn(grid.clone(), |r, z| {
            (0..3)
                .map(|k| c[k] * legendre(2 * k, z) * r.powi(2 * k as i32) * (-w[k] * r * r).exp())
                .sum()
        });
        let norm = f.sup_norm();
        let k = apply_k_multipole(&f);
        let scale: f64 = c.iter().map(|v| v.abs()).sum();
        assert!(grad_at_origin(&k) <= 1e-6 * scale, "{c:?} {w:?}");
        let r1 = grid.r_nodes[1];
        for j in 0..grid.n_zeta() {
            assert!((k.at(1, j) - k.at(0, j)).abs() <= norm * r1 * r1);
        }
    }
}
