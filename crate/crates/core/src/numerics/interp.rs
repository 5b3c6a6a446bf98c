//! Piecewise interpolation on strictly increasing node sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index `k` of the interval `[x_k, x_{k+1}]` containing `x` (clamped to the ends).
pub fn find_interval(nodes: &[f64], x: f64) -> usize {
    let n = nodes.len();
    debug_assert!(n >= 2);
    if x <= nodes[0] {
        return 0;
    }
    if x >= nodes[n - 1] {
        return n - 2;
    }
    match nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => i.min(n - 2),
        Err(i) => i - 1,
    }
}

/// First node of the four-point stencil used on interval `k`.
#[inline]
pub fn stencil_start(n: usize, k: usize) -> usize {
    debug_assert!(n >= 4);
    k.saturating_sub(1).min(n - 4)
}

/// Lagrange weights of the local cubic through `nodes[start..start+4]` at `x`.
#[inline]
pub fn lagrange4(nodes: &[f64], start: usize, x: f64) -> [f64; 4] {
    let p = &nodes[start..start + 4];
    let mut w = [1.0; 4];
    for a in 0..4 {
        for b in 0..4 {
            if a != b {
                w[a] *= (x - p[b]) / (p[a] - p[b]);
            }
        }
    }
    w
}

/// Derivative weights of the local cubic through `nodes[start..start+4]` at `x`.
pub fn lagrange4_derivative(nodes: &[f64], start: usize, x: f64) -> [f64; 4] {
    let p = &nodes[start..start + 4];
    let mut w = [0.0; 4];
    for a in 0..4 {
        let mut denom = 1.0;
        for b in 0..4 {
            if b != a {
                denom *= p[a] - p[b];
            }
        }
        let mut s = 0.0;
        for skip in 0..4 {
            if skip == a {
                continue;
            }
            let mut prod = 1.0;
            for b in 0..4 {
                if b != a && b != skip {
                    prod *= x - p[b];
                }
            }
            s += prod;
        }
        w[a] = s / denom;
    }
    w
}

/// Stencil start and weights for evaluating the piecewise local cubic at `x`.
#[inline]
pub fn cubic_weights(nodes: &[f64], x: f64) -> (usize, [f64; 4]) {
    let k = find_interval(nodes, x);
    let s = stencil_start(nodes.len(), k);
    (s, lagrange4(nodes, s, x))
}

/// Evaluate the piecewise local cubic interpolant of `(nodes, values)` at `x`.
pub fn cubic_eval(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let (s, w) = cubic_weights(nodes, x);
    (0..4).map(|a| w[a] * values[s + a]).sum()
}

/// Derivative of the piecewise local cubic interpolant at `x`.
pub fn cubic_derivative(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let k = find_interval(nodes, x);
    let s = stencil_start(nodes.len(), k);
    let w = lagrange4_derivative(nodes, s, x);
    (0..4).map(|a| w[a] * values[s + a]).sum()
}

/// Cubic Hermite value and derivative on [x0, x1].
#[inline]
pub fn hermite(x0: f64, x1: f64, f0: f64, f1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let v = h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    let d = dh00 * f0 + dh10 * d0 + dh01 * f1 + dh11 * d1;
    (v, d)
}

/// Coefficients of the Hermite basis at `x`: value weights for (f0, f1, d0, d1).
#[inline]
pub fn hermite_basis(x0: f64, x1: f64, x: f64) -> [f64; 4] {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    [
        2.0 * t3 - 3.0 * t2 + 1.0,
        -2.0 * t3 + 3.0 * t2,
        (t3 - 2.0 * t2 + t) * h,
        (t3 - t2) * h,
    ]
}

/// Monotone piecewise-cubic (Fritsch–Carlson) interpolant of sampled data.
///
/// Outside the sampled range the interpolant is held constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::invalid(
                "table",
                "abscissae and values differ in length",
            ));
        }
        if xs.len() < 2 {
            return Err(Error::invalid("table", "need at least two samples"));
        }
        if xs.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::invalid(
                "table",
                "abscissae must be strictly increasing",
            ));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::invalid("table", "non-finite sample"));
        }
        let n = xs.len();
        let delta: Vec<f64> = (0..n - 1)
            .map(|k| (ys[k + 1] - ys[k]) / (xs[k + 1] - xs[k]))
            .collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = delta[0];
            ds[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] <= 0.0 {
                    ds[k] = 0.0;
                } else {
                    let h0 = xs[k] - xs[k - 1];
                    let h1 = xs[k + 1] - xs[k];
                    let w1 = 2.0 * h1 + h0;
                    let w2 = h1 + 2.0 * h0;
                    ds[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            ds[0] = end_slope(xs[1] - xs[0], xs[2] - xs[1], delta[0], delta[1]);
            ds[n - 1] = end_slope(
                xs[n - 1] - xs[n - 2],
                xs[n - 2] - xs[n - 3],
                delta[n - 2],
                delta[n - 3],
            );
        }
        Ok(Self { xs, ys, ds })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with_derivative(x).1
    }

    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return (self.ys[0], if x == self.xs[0] { self.ds[0] } else { 0.0 });
        }
        if x >= self.xs[n - 1] {
            return (
                self.ys[n - 1],
                if x == self.xs[n - 1] {
                    self.ds[n - 1]
                } else {
                    0.0
                },
            );
        }
        let k = find_interval(&self.xs, x);
        hermite(
            self.xs[k],
            self.xs[k + 1],
            self.ys[k],
            self.ys[k + 1],
            self.ds[k],
            self.ds[k + 1],
            x,
        )
    }

    pub fn sup_abs(&self) -> f64 {
        self.ys.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn sup_abs_derivative(&self) -> f64 {
        self.ds.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_cubic_reproduces_cubics() {
        let nodes: Vec<f64> = (0..9).map(|i| (i as f64 * 0.37).powf(1.3)).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x - 0.1 * x * x * x;
        let df = |x: f64| -2.0 + x - 0.3 * x * x;
        let vals: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
        for k in 0..40 {
            let x = nodes[8] * k as f64 / 39.0;
            assert!((cubic_eval(&nodes, &vals, x) - f(x)).abs() < 1e-12);
            assert!((cubic_derivative(&nodes, &vals, x) - df(x)).abs() < 1e-10);
        }
    }

    #[test]
    fn monotone_cubic_preserves_monotone_data() {
        let xs = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = vec![0.0, 0.1, 0.1, 2.0, 2.1];
        let p = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = -1.0;
        for k in 0..=400 {
            let v = p.eval(4.0 * k as f64 / 400.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert_eq!(p.eval(10.0), 2.1);
    }

    #[test]
    fn monotone_cubic_rejects_bad_tables() {
        assert!(MonotoneCubic::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(MonotoneCubic::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn hermite_matches_endpoint_data() {
        let (v, d) = hermite(1.0, 2.0, 3.0, 5.0, -1.0, 0.5, 2.0);
        assert!((v - 5.0).abs() < 1e-15 && (d - 0.5).abs() < 1e-14);
        let b = hermite_basis(1.0, 2.0, 1.3);
        let (v2, _) = hermite(1.0, 2.0, 3.0, 5.0, -1.0, 0.5, 1.3);
        assert!((b[0] * 3.0 + b[1] * 5.0 + -b[2] + b[3] * 0.5 - v2).abs() < 1e-14);
    }
}
