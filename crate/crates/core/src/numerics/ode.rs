//! Dormand–Prince 5(4) integrator for small fixed-size systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand–Prince step of size `h` from `(t, y)`.
///
/// Returns the fifth-order solution and the embedded error estimate.
pub fn dp_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let comb = |terms: &[(f64, &[f64; N])]| {
        let mut out = *y;
        for (c, k) in terms {
            for i in 0..N {
                out[i] += h * c * k[i];
            }
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + C2 * h, &comb(&[(A21, &k1)]));
    let k3 = f(t + C3 * h, &comb(&[(A31, &k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &comb(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &comb(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &comb(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
    );
    let y5 = comb(&[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(t + h, &y5);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y5, err)
}

/// Step-size control settings.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub tol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl StepControl {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            h_init: 1e-4,
            h_max: 0.05,
            h_min: 1e-14,
            max_steps: 2_000_000,
        }
    }
}

/// Outcome of [`integrate_until`].
pub enum Stop<const N: usize> {
    /// Reached `t_end`; the accepted trajectory is in the trace.
    End,
    /// The event function changed sign inside the step starting at `(t, y)`
    /// with accepted step size `h`.
    Event { t: f64, y: [f64; N], h: f64 },
}

/// Adaptive integration from `(t0, y0)` towards `t_end`, recording accepted
/// steps in `trace`, and stopping at the first step across which `event`
/// changes sign from positive.
pub fn integrate_until<const N: usize, F, E>(
    f: &F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    ctl: &StepControl,
    event: E,
    trace: &mut Vec<(f64, [f64; N])>,
) -> Result<Stop<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    E: Fn(f64, &[f64; N]) -> f64,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = ctl.h_init.min(ctl.h_max);
    trace.push((t, y));
    for _ in 0..ctl.max_steps {
        if t >= t_end {
            return Ok(Stop::End);
        }
        let h_try = h.min(t_end - t);
        let (y_new, err) = dp_step(f, t, &y, h_try);
        let mut e = 0.0f64;
        for i in 0..N {
            let sc = ctl.tol * (1.0 + y[i].abs().max(y_new[i].abs()));
            e = e.max((err[i] / sc).abs());
        }
        if !e.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.25;
            if h < ctl.h_min {
                return Err(Error::StepFailure { r: t });
            }
            continue;
        }
        if e <= 1.0 {
            if event(t + h_try, &y_new) <= 0.0 && event(t, &y) > 0.0 {
                return Ok(Stop::Event { t, y, h: h_try });
            }
            t += h_try;
            y = y_new;
            trace.push((t, y));
            let fac = if e == 0.0 {
                5.0
            } else {
                (0.9 * e.powf(-0.2)).clamp(0.2, 5.0)
            };
            h = (h_try * fac).min(ctl.h_max);
        } else {
            h = h_try * (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
            if h < ctl.h_min {
                return Err(Error::StepFailure { r: t });
            }
        }
    }
    Err(Error::StepFailure { r: t })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_single_steps_are_fifth_order() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let err = |h: f64| {
            let (y, _) = dp_step(&f, 0.0, &[1.0, 0.0], h);
            (y[0] - h.cos()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        // local error O(h^6)
        assert!(ratio > 50.0, "ratio {ratio}");
    }

    #[test]
    fn adaptive_run_tracks_exponential() {
        let f = |_t: f64, y: &[f64; 1]| [-y[0]];
        let mut trace = Vec::new();
        let ctl = StepControl::new(1e-12);
        let stop = integrate_until(&f, 0.0, [1.0], 3.0, &ctl, |_, _| 1.0, &mut trace).unwrap();
        assert!(matches!(stop, Stop::End));
        let (t, y) = *trace.last().unwrap();
        assert!((t - 3.0).abs() < 1e-14);
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }
}
