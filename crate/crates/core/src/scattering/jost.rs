//! Jost and Weyl solutions in de-oscillated form.
//!
//! The right solution is written `psi_+ = e^{ikx} y` with `y -> 1` at `+inf`, so
//! `y'' = q y - 2ik y'`. The left solution is `Psi_- = e^{-i eta x} z` with
//! `eta = sqrt(lambda - floor)` and `z = 1` on the left tail, so
//! `z'' = (q - floor) z + 2i eta z'`. Both are integrated away from their normalisation end,
//! which is the stable direction whenever `Im k >= 0` and `Im eta >= 0`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numeric::ode::{self, Tolerance};
use crate::potential::Potential;

pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

pub(crate) fn tol() -> Tolerance {
    Tolerance::default()
}

/// Left edge where the left tail description takes over.
pub(crate) fn left_start(p: &Potential) -> Result<f64> {
    let (lo, _) = p.support();
    if lo.is_finite() {
        Ok(lo)
    } else {
        Err(Error::param(
            "potential",
            "the left tail is not eventually constant; truncate it first",
        ))
    }
}

pub(crate) fn right_start(p: &Potential) -> f64 {
    p.support().1
}

/// `(y, y')` of the right Faddeev function at `x`.
pub fn faddeev_right(p: &Potential, k: C64, x: f64) -> Result<[C64; 2]> {
    faddeev_right_observed(p, k, x, |_, _| {})
}

pub(crate) fn faddeev_right_observed(
    p: &Potential,
    k: C64,
    x: f64,
    observe: impl FnMut(f64, &[C64; 2]),
) -> Result<[C64; 2]> {
    let xr = right_start(p);
    let one = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    if x >= xr {
        return Ok(one);
    }
    let knots = ode::knots_between(xr, x, &p.breakpoints(x, xr));
    let two_ik = 2.0 * I * k;
    ode::integrate_through(
        |s, y: &[C64; 2]| [y[1], y[0] * p.eval(s) - two_ik * y[1]],
        &knots,
        one,
        &tol(),
        observe,
    )
}

/// `(z, z')` of the left Weyl function at `x`, for the given `eta` and tail level `floor`.
pub fn weyl_left(p: &Potential, eta: C64, floor: f64, x: f64) -> Result<[C64; 2]> {
    let xl = left_start(p)?;
    let one = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    if x <= xl {
        return Ok(one);
    }
    let knots = ode::knots_between(xl, x, &p.breakpoints(xl, x));
    let two_ieta = 2.0 * I * eta;
    ode::integrate_through(
        |s, z: &[C64; 2]| [z[1], z[0] * (p.eval(s) - floor) + two_ieta * z[1]],
        &knots,
        one,
        &tol(),
        |_, _| {},
    )
}

/// Right solution at `k = i kappa` with the running integral
/// `J(x) = int_{x_R}^{x} e^{-2 kappa (s - xm)} y(s)^2 ds`.
pub(crate) fn right_with_norm(p: &Potential, kappa: f64, xm: f64) -> Result<[C64; 3]> {
    let xr = right_start(p);
    let start = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    if xm >= xr {
        return Ok(start);
    }
    let knots = ode::knots_between(xr, xm, &p.breakpoints(xm, xr));
    ode::integrate_through(
        |s, y: &[C64; 3]| {
            [
                y[1],
                y[0] * p.eval(s) + 2.0 * kappa * y[1],
                y[0] * y[0] * (-2.0 * kappa * (s - xm)).exp(),
            ]
        },
        &knots,
        start,
        &tol(),
        |_, _| {},
    )
}

/// Left solution for `eta = i beta` with `J(x) = int_{x_L}^{x} e^{2 beta (s - xm)} z(s)^2 ds`.
pub(crate) fn left_with_norm(p: &Potential, beta: f64, floor: f64, xm: f64) -> Result<[C64; 3]> {
    let xl = left_start(p)?;
    let start = [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
    if xm <= xl {
        return Ok(start);
    }
    let knots = ode::knots_between(xl, xm, &p.breakpoints(xl, xm));
    ode::integrate_through(
        |s, z: &[C64; 3]| {
            [
                z[1],
                z[0] * (p.eval(s) - floor) - 2.0 * beta * z[1],
                z[0] * z[0] * (2.0 * beta * (s - xm)).exp(),
            ]
        },
        &knots,
        start,
        &tol(),
        |_, _| {},
    )
}

/// Scattering coefficients for real `k` from solutions matched at `x`, with
/// `eta` the left wavenumber (`eta = k` for short-range potentials).
///
/// Returns `(R, W)` where `W = e^{-i(k - eta)x} W(Psi_-, psi_+)`.
pub(crate) fn reflection_at(k: f64, eta: f64, x: f64, y: [C64; 2], z: [C64; 2]) -> (C64, C64) {
    let w = z[0] * y[1] - z[1] * y[0] + I * (k + eta) * z[0] * y[0];
    let yb = y[0].conj();
    let ypb = y[1].conj();
    let num = yb * z[1] - ypb * z[0] + I * (k - eta) * yb * z[0];
    let phase = C64::from_polar(1.0, -2.0 * k * x);
    (phase * num / w, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Catalog;

    #[test]
    fn free_solutions_are_trivial() {
        let p = Potential::from_catalog(&Catalog::Zero).unwrap();
        let y = faddeev_right(&p, C64::new(1.3, 0.2), -4.0).unwrap();
        assert_eq!(y[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn soliton_jost_function_closed_form() {
        // q = -2 sech^2 x has y(x, k) = (k + i tanh x) / (k + i).
        let p = Potential::from_catalog(&Catalog::OneSoliton { kappa: 1.0, c: 2.0 }).unwrap();
        for &k in &[C64::new(0.7, 0.0), C64::new(-2.0, 0.3), C64::new(0.0, 0.5)] {
            for &x in &[-3.0, 0.0, 1.5] {
                let y = faddeev_right(&p, k, x).unwrap();
                let want = (k + I * x.tanh()) / (k + I);
                assert!((y[0] - want).norm() < 1e-9, "k={k} x={x}: {} vs {want}", y[0]);
            }
        }
    }
}
