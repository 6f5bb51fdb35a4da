//! Discrete spectrum below the left floor: Sturm node counting isolates each eigenvalue, a
//! Wronskian sign change pins it down, and the norming constant comes from a matched quadrature.

use num_complex::Complex64 as C64;

use super::jost::{self, faddeev_right, faddeev_right_observed, weyl_left};
use crate::error::{Error, Result};
use crate::potential::Potential;

/// Eigenvalues closer together than this (in lambda) are reported as unresolved.
pub const RESOLUTION: f64 = 1e-10;
/// Eigenvalues closer to the floor than this are not searched for.
pub const TOP_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eigenvalue {
    pub lambda: f64,
    /// `sqrt(-lambda)`
    pub kappa: f64,
    /// Matching point near the peak of the eigenfunction.
    pub xm: f64,
}

struct Count {
    nodes: usize,
    peak: f64,
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Number of zeros of `psi_+(., lambda)` on the line, i.e. the number of eigenvalues below
/// `lambda`, plus the location of the rightmost hump of `psi_+`.
fn count(p: &Potential, lambda: f64, floor: f64) -> Result<Count> {
    let kappa = (-lambda).sqrt();
    let beta = (floor - lambda).sqrt();
    let xl = jost::left_start(p)?;
    let xr = jost::right_start(p);
    let mut nodes = 0usize;
    let mut last = 1i8;
    let mut best = f64::NEG_INFINITY;
    let mut peak = xr;
    let mut tracking = true;
    let y = faddeev_right_observed(p, C64::new(0.0, kappa), xl, |x, y| {
        let s = sign(y[0].re);
        if s != 0 && s != last {
            nodes += 1;
            last = s;
        }
        if tracking {
            let lg = -kappa * x + y[0].re.abs().max(1e-300).ln();
            if lg > best {
                best = lg;
                peak = x;
            } else if lg < best - 2.0 {
                tracking = false;
            }
        }
    })?;
    // On the left tail psi_+ = A e^{beta x} + B e^{-beta x}; one more zero iff sign(B) differs
    // from the sign at x_L.
    let at = sign(y[0].re);
    let far = sign(((beta + kappa) * y[0] - y[1]).re);
    if at != 0 && far != 0 && at != far {
        nodes += 1;
    }
    if xl >= xr {
        peak = xl;
    }
    Ok(Count { nodes, peak })
}

/// `e^{-(beta - kappa) xm} W(Psi_-, psi_+)` at `xm`; same sign as the Wronskian.
pub(crate) fn wronskian_scaled(p: &Potential, lambda: f64, floor: f64, xm: f64) -> Result<f64> {
    let kappa = (-lambda).sqrt();
    let beta = (floor - lambda).sqrt();
    let y = faddeev_right(p, C64::new(0.0, kappa), xm)?;
    let z = weyl_left(p, C64::new(0.0, beta), floor, xm)?;
    Ok((z[0] * y[1] - z[1] * y[0] - (kappa + beta) * z[0] * y[0]).re)
}

/// All eigenvalues below `floor - TOP_GAP`, sorted by increasing lambda.
pub fn eigenvalues(p: &Potential, floor: f64) -> Result<Vec<Eigenvalue>> {
    let top = floor - TOP_GAP * floor.abs().max(1.0);
    let mut lo = p.inf() - 1e-3;
    if lo >= top {
        return Ok(Vec::new());
    }
    let mut c_lo = count(p, lo, floor)?;
    while c_lo.nodes > 0 {
        lo = 2.0 * lo - 1.0;
        c_lo = count(p, lo, floor)?;
    }
    let c_hi = count(p, top, floor)?;
    let mut brackets = Vec::new();
    split(p, floor, (lo, 0), (top, c_hi.nodes, c_hi.peak), &mut brackets)?;
    brackets
        .into_iter()
        .map(|(a, b, xm)| {
            let fa = wronskian_scaled(p, a, floor, xm)?;
            let fb = wronskian_scaled(p, b, floor, xm)?;
            let lambda = if sign(fa) * sign(fb) > 0 {
                // The sign flip is lost in rounding only when the bracket is already tiny.
                0.5 * (a + b)
            } else {
                refine(p, floor, a, b, fa, xm)?
            };
            Ok(Eigenvalue { lambda, kappa: (-lambda).sqrt(), xm })
        })
        .collect()
}

fn split(
    p: &Potential,
    floor: f64,
    lo: (f64, usize),
    hi: (f64, usize, f64),
    out: &mut Vec<(f64, f64, f64)>,
) -> Result<()> {
    let n = hi.1 - lo.1;
    if n == 0 {
        return Ok(());
    }
    let mid = 0.5 * (lo.0 + hi.0);
    let c_mid = count(p, mid, floor)?;
    if n == 1 && hi.0 - lo.0 < 1e-6 * floor.abs().max(1.0) {
        out.push((lo.0, hi.0, c_mid.peak));
        return Ok(());
    }
    if hi.0 - lo.0 < RESOLUTION {
        return Err(Error::Unresolved { lo: lo.0, hi: hi.0, count: n, width: RESOLUTION });
    }
    split(p, floor, lo, (mid, c_mid.nodes, c_mid.peak), out)?;
    split(p, floor, (mid, c_mid.nodes), hi, out)
}

fn refine(p: &Potential, floor: f64, mut a: f64, mut b: f64, mut fa: f64, xm: f64) -> Result<f64> {
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if b - a <= 4.0 * f64::EPSILON * mid.abs().max(1.0) || mid == a || mid == b {
            break;
        }
        let fm = wronskian_scaled(p, mid, floor, xm)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if sign(fm) == sign(fa) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// `1 / int psi_+^2` for the eigenvalue, with `psi_+ ~ e^{-kappa x}` at `+inf`.
pub fn norming_constant(p: &Potential, e: &Eigenvalue, floor: f64) -> Result<f64> {
    let kappa = e.kappa;
    let beta = (floor - e.lambda).sqrt();
    let xm = e.xm;
    let xr = jost::right_start(p);
    let xl = jost::left_start(p)?;
    let r = jost::right_with_norm(p, kappa, xm)?;
    let l = jost::left_with_norm(p, beta, floor, xm)?;
    let i_plus = -r[2].re + (-2.0 * kappa * (xr - xm).max(0.0)).exp() / (2.0 * kappa);
    let i_minus = l[2].re + (2.0 * beta * (xl - xm).min(0.0)).exp() / (2.0 * beta);
    let ratio = r[0].re / l[0].re;
    let norm = (-2.0 * kappa * xm).exp() * (i_plus + ratio * ratio * i_minus);
    Ok(1.0 / norm)
}

/// The same constant from the Wronskian derivative:
/// `e^{2 kappa xm} z(xm) / (y(xm) dB/dlambda)`.
pub fn norming_from_wronskian(p: &Potential, e: &Eigenvalue, floor: f64) -> Result<f64> {
    let room = (floor - e.lambda).min(e.lambda - p.inf() + 1.0);
    let d = (1e-3 * e.lambda.abs().max(1.0)).min(0.2 * room);
    let f = |l: f64| wronskian_scaled(p, l, floor, e.xm);
    let deriv = (f(e.lambda - 2.0 * d)? - 8.0 * f(e.lambda - d)? + 8.0 * f(e.lambda + d)?
        - f(e.lambda + 2.0 * d)?)
        / (12.0 * d);
    let beta = (floor - e.lambda).sqrt();
    let y = faddeev_right(p, C64::new(0.0, e.kappa), e.xm)?;
    let z = weyl_left(p, C64::new(0.0, beta), floor, e.xm)?;
    Ok((2.0 * e.kappa * e.xm).exp() * z[0].re / (y[0].re * deriv))
}
