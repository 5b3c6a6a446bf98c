//! Gauss–Legendre rules and Legendre polynomials.

use std::f64::consts::PI;

/// Nodes (ascending) and weights of the `n`-point Gauss–Legendre rule on [-1, 1].
///
/// Nodes are computed by Newton iteration on `P_n`; the returned rule is
/// exactly symmetric (`x[n-1-i] == -x[i]`, equal weights in each pair).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss rule needs at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess for the i-th largest root.
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n-1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, d)
}

/// Legendre polynomial `P_l(x)`.
pub fn legendre(l: usize, x: f64) -> f64 {
    legendre_with_derivative(l, x).0
}

/// `P_0(x), ..., P_lmax(x)` in one recurrence sweep.
pub fn legendre_table(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(lmax + 1);
    out.push(1.0);
    if lmax >= 1 {
        out.push(x);
    }
    for k in 2..=lmax {
        let kf = k as f64;
        let v = ((2.0 * kf - 1.0) * x * out[k - 1] - (kf - 1.0) * out[k - 2]) / kf;
        out.push(v);
    }
    out
}

/// A fixed Gauss–Legendre rule that can be mapped onto arbitrary intervals.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    /// Iterate over `(x, w)` for the rule mapped onto [a, b].
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (mid + half * t, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// Integral over [a, b] of an integrand with an algebraic zero at `b`
/// (`f ~ (b - x)^p`), using the substitution `x = b - (b - a)(1 - t)^2`.
pub fn integrate_to_root(rule: &GaussRule, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let len = b - a;
    rule.on(0.0, 1.0)
        .map(|(t, w)| {
            let s = 1.0 - t;
            let x = b - len * s * s;
            w * f(x) * 2.0 * len * s
        })
        .sum()
}

/// Adaptive Gauss–Kronrod (7–15) quadrature on [a, b].
pub fn adaptive_gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    const XGK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WGK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [
        0.129_484_966_168_869_7,
        0.279_705_391_489_276_7,
        0.381_830_050_505_118_9,
        0.417_959_183_673_469_4,
    ];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = h * XGK[k];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    kron *= h;
    gauss *= h;
    if depth == 0 || (kron - gauss).abs() <= tol.max(1e-15 * kron.abs()) {
        kron
    } else {
        adaptive_gk15(f, a, c, 0.5 * tol, depth - 1) + adaptive_gk15(f, c, b, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_to_degree_2n_minus_1() {
        for n in [1usize, 2, 4, 7, 16, 32] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn gauss_nodes_pair_symmetrically() {
        let (x, w) = gauss_legendre(32);
        for i in 0..32 {
            assert_eq!(x[i], -x[31 - i]);
            assert_eq!(w[i], w[31 - i]);
        }
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn legendre_values() {
        assert!((legendre(2, 0.3) - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        let t = legendre_table(6, 0.7);
        for (l, v) in t.iter().enumerate() {
            assert!((v - legendre(l, 0.7)).abs() < 1e-14);
        }
        assert!((legendre_with_derivative(4, 1.0).1 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn root_substitution_handles_holder_endpoint() {
        let rule = GaussRule::new(12);
        let v = integrate_to_root(&rule, 0.0, 1.0, |x| (1.0 - x).powf(1.5));
        assert!((v - 0.4).abs() < 1e-13);
    }

    #[test]
    fn adaptive_gk_on_peaked_integrand() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let v = adaptive_gk15(&f, -1.0, 1.0, 1e-12, 40);
        let exact = 2.0 / 1e-2 * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-8 * exact);
    }
}
