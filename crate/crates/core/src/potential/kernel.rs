//! Azimuthally integrated Newtonian kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::quad::adaptive_gk15;

/// Complete elliptic integral of the first kind, `K(m)` with parameter `m = k²`.
pub fn ellip_k(m: f64) -> f64 {
    ellip_k_complement(1.0 - m)
}

/// `K(1 − m1)`, accurate when the complementary parameter `m1` is small.
pub fn ellip_k_complement(m1: f64) -> f64 {
    let mut a = 1.0;
    let mut b = m1.max(0.0).sqrt();
    for _ in 0..60 {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    PI / (2.0 * a)
}

/// `∫₀^{2π} dβ / √(A − B cos β)` given `d = A − B > 0` and `B ≥ 0`.
#[inline]
pub fn ring_integral(d: f64, b: f64) -> f64 {
    let s = d + 2.0 * b;
    4.0 * ellip_k_complement(d / s) / s.sqrt()
}

/// `(A − B, B)` with the difference formed without cancellation.
#[inline]
fn coefficients(r: f64, zeta: f64, rp: f64, zetap: f64) -> (f64, f64) {
    let sz = (1.0 - zeta * zeta).max(0.0).sqrt();
    let szp = (1.0 - zetap * zetap).max(0.0).sqrt();
    let half = 0.5 * (zeta.clamp(-1.0, 1.0).acos() - zetap.clamp(-1.0, 1.0).acos());
    let d = (r - rp) * (r - rp) + 4.0 * r * rp * half.sin().powi(2);
    (d, 2.0 * r * rp * sz * szp)
}

/// Kernel by the elliptic closed form, without the coincidence check.
#[inline]
pub fn kernel_closed_form(r: f64, zeta: f64, rp: f64, zetap: f64) -> f64 {
    let (d, b) = coefficients(r, zeta, rp, zetap);
    ring_integral(d, b)
}

/// `∫₀^{2π} dβ / |x − x'|` for points at `(r, ζ)` and `(r', ζ')` in the meridian half-plane.
pub fn kernel_eval(r: f64, zeta: f64, rp: f64, zetap: f64) -> Result<f64> {
    for (name, v) in [("r", r), ("r'", rp)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::invalid(name, "must be finite and nonnegative"));
        }
    }
    for (name, v) in [("zeta", zeta), ("zeta'", zetap)] {
        if !(v.is_finite() && (-1.0..=1.0).contains(&v)) {
            return Err(Error::invalid(name, "must lie in [-1, 1]"));
        }
    }
    let (d, b) = coefficients(r, zeta, rp, zetap);
    let scale = (r * r + rp * rp).max(f64::MIN_POSITIVE);
    if d <= 1e-28 * scale {
        return Err(Error::SingularPoint);
    }
    let f = move |beta: f64| {
        let s = (0.5 * beta).sin();
        1.0 / (d + 2.0 * b * s * s).sqrt()
    };
    // The integrand peaks at β = 0 and 2π; split at π.
    let closed = ring_integral(d, b);
    let v = 2.0 * adaptive_gk15(&f, 0.0, PI, 1e-13 * closed, 60);
    debug_assert!(
        (v - closed).abs() <= 1e-8 * closed,
        "kernel quadrature {v} vs closed form {closed}"
    );
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((kernel_eval(0.0, 0.3, 1.0, -0.2).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!((kernel_eval(1.0, 1.0, 1.0, -1.0).unwrap() - PI).abs() < 1e-12);
        assert!(matches!(
            kernel_eval(1.0, 0.5, 1.0, 0.5),
            Err(Error::SingularPoint)
        ));
    }

    #[test]
    fn adaptive_matches_closed_form() {
        for &(r, z, rp, zp) in &[
            (1.0, 0.1, 1.01, 0.12),
            (0.3, -0.9, 2.0, 0.4),
            (1.0, 0.0, 1.0, 1e-4),
        ] {
            let a = kernel_eval(r, z, rp, zp).unwrap();
            let b = kernel_closed_form(r, z, rp, zp);
            assert!((a - b).abs() < 1e-10 * b, "{a} {b}");
        }
    }
}
