//! Adaptive Dormand–Prince 5(4) integrator for small complex systems.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Step-size control for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
    /// Smallest admissible step; going below it is reported as [`Error::StepUnderflow`].
    pub h_min: f64,
    /// Largest admissible step.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-300,
            h_min: 1e-12,
            h_max: 0.5,
            max_steps: 2_000_000,
        }
    }
}

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
// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[C64; N], terms: &[(f64, &[C64; N])], h: f64) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let s = c * h;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
///
/// `observe` is called after every accepted step with the new point.
pub fn integrate<const N: usize>(
    mut f: impl FnMut(f64, &[C64; N]) -> [C64; N],
    x0: f64,
    x1: f64,
    y0: [C64; N],
    tol: &Tolerance,
    mut observe: impl FnMut(f64, &[C64; N]),
) -> Result<[C64; N]> {
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = span.abs().min(tol.h_max).min(0.05) * dir;
    let mut k1 = f(x, &y);
    let mut steps = 0usize;
    loop {
        if (x1 - x) * dir <= 0.0 {
            break;
        }
        if (x + h - x1) * dir > 0.0 {
            h = x1 - x;
        }
        steps += 1;
        if steps > tol.max_steps {
            return Err(Error::StepUnderflow { position: x, step: h.abs() });
        }
        let k2 = f(x + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(x + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(x + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(
            x + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            x + h,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
        );
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let k7 = f(x + h, &y_new);
        // Errors are measured relative to the size of the whole state.
        let big = y.iter().chain(&y_new).map(|v| v.norm()).fold(0.0, f64::max);
        let mut err = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let scale = tol.atol + tol.rtol * big;
            err += (e.norm() / scale).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            if h.abs() < tol.h_min {
                return Err(Error::StepUnderflow { position: x, step: h.abs() });
            }
            continue;
        }
        if err <= 1.0 {
            x += h;
            y = y_new;
            k1 = k7;
            observe(x, &y);
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).abs().min(tol.h_max) * dir;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h.abs() < tol.h_min {
                return Err(Error::StepUnderflow { position: x, step: h.abs() });
            }
        }
    }
    Ok(y)
}

/// Integrates across the ordered `knots` (which must start at the initial point and end at the
/// final one), restarting the integrator at each knot so that jumps in the coefficients are never
/// stepped over.
pub fn integrate_through<const N: usize>(
    mut f: impl FnMut(f64, &[C64; N]) -> [C64; N],
    knots: &[f64],
    y0: [C64; N],
    tol: &Tolerance,
    mut observe: impl FnMut(f64, &[C64; N]),
) -> Result<[C64; N]> {
    let mut y = y0;
    for w in knots.windows(2) {
        y = integrate(&mut f, w[0], w[1], y, tol, &mut observe)?;
    }
    Ok(y)
}

/// Knots from `x0` to `x1` including every breakpoint strictly between them, in travel order.
pub fn knots_between(x0: f64, x1: f64, breakpoints: &[f64]) -> Vec<f64> {
    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
    let mut inner: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > lo && b < hi)
        .collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    if x0 > x1 {
        inner.reverse();
    }
    let mut knots = Vec::with_capacity(inner.len() + 2);
    knots.push(x0);
    knots.extend(inner);
    knots.push(x1);
    knots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_both_directions() {
        let tol = Tolerance::default();
        let rhs = |_: f64, y: &[C64; 2]| [y[1], -y[0]];
        let y = integrate(rhs, 0.0, 10.0, [C64::new(1.0, 0.0), C64::new(0.0, 0.0)], &tol, |_, _| {})
            .unwrap();
        assert!((y[0].re - 10f64.cos()).abs() < 1e-9);
        let back = integrate(rhs, 10.0, 0.0, y, &tol, |_, _| {}).unwrap();
        assert!((back[0].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn complex_exponential() {
        let tol = Tolerance::default();
        let w = C64::new(0.3, 2.0);
        let y = integrate(|_, y: &[C64; 1]| [w * y[0]], 0.0, 3.0, [C64::new(1.0, 0.0)], &tol, |_, _| {})
            .unwrap();
        assert!((y[0] - (w * 3.0).exp()).norm() < 1e-9 * (w * 3.0).exp().norm());
    }

    #[test]
    fn knots_are_ordered_in_travel_direction() {
        assert_eq!(knots_between(2.0, -1.0, &[0.0, 1.0, 5.0]), vec![2.0, 1.0, 0.0, -1.0]);
        assert_eq!(knots_between(-1.0, 2.0, &[1.0, 0.0, 1.0]), vec![-1.0, 0.0, 1.0, 2.0]);
    }
}
