//! Weyl m-functions, the measure rho and the analytic split of the reflection coefficient.
//!
//! For a split point `a`, with `m_+ = psi_+'/psi_+` and `m_- = -Psi_-'/Psi_-` at `a`,
//! `R(k) = A_a(k) + r_a(k) e^{-2ika}` where `A_a = 2ik / (psi_+(a)^2 (m_+ + m_-))` and
//! `r_a = -conj(y(a)) / y(a)`. The measure `rho` lives on `i(0, h0]`: its absolutely
//! continuous part has density `psi_+(a, is)^{-2} (1/pi) Im[-1/(m_+ + m_-)](-s^2 + i0) 2s`
//! and its atoms sit at the bound states with masses equal to the norming constants.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::jost::{faddeev_right, reflection_at, weyl_left, I};
use super::spectrum::{self, Eigenvalue};
use super::{Atom, ReflectionSample};
use crate::error::{Error, Result};
use crate::numeric::sqrt_upper;
use crate::potential::{Potential, TailKind};

/// `|y(a)|` below this makes the split point invalid.
const NODE_TOL: f64 = 1e-8;

/// A solution `(f, f')` sits on a node when `|f|` is negligible next to `|f'|`.
fn at_node(f: [C64; 2]) -> bool {
    f[0].norm() <= 1e-12 * f[1].norm() || f[0].norm() == 0.0
}

/// `m_+(lambda, a) = ik + y'/y` with `k = sqrt(lambda)`, `Im k >= 0`.
pub fn m_plus(p: &Potential, lambda: C64, a: f64) -> Result<C64> {
    let k = sqrt_upper(lambda);
    let y = faddeev_right(p, k, a)?;
    if at_node(y) {
        return Err(Error::WeylNode { a, lambda: lambda.to_string() });
    }
    Ok(I * k + y[1] / y[0])
}

fn m_minus_fixed(p: &Potential, lambda: C64, a: f64, floor: f64) -> Result<C64> {
    let eta = sqrt_upper(lambda - floor);
    let z = weyl_left(p, eta, floor, a)?;
    if at_node(z) {
        return Err(Error::WeylNode { a, lambda: lambda.to_string() });
    }
    Ok(I * eta - z[1] / z[0])
}

/// Truncation points tried for a rough left tail: `min(a, cutoff) - 10 * 2^n`.
const TRUNCATION_STEPS: usize = 11;

/// `m_-(lambda, a)`. For a rough left tail the value is the limit of the truncated problems
/// on `[b, inf)`, taken along `b = a - 10, a - 20, a - 40, ...` until two consecutive values agree.
pub fn weyl_m_minus(p: &Potential, lambda: C64, a: f64) -> Result<C64> {
    match p.left_floor() {
        Some(floor) => m_minus_fixed(p, lambda, a, floor),
        None => {
            let start = a.min(p.left.cutoff);
            let mut prev: Option<C64> = None;
            let mut before = C64::default();
            for n in 0..TRUNCATION_STEPS {
                let b = start - 10.0 * (1u64 << n) as f64;
                let m = m_minus_fixed(&p.truncate_left(b), lambda, a, 0.0)?;
                if let Some(pm) = prev {
                    if (m - pm).norm() <= 1e-10 * m.norm().max(1.0) {
                        return Ok(m);
                    }
                    before = pm;
                }
                prev = Some(m);
            }
            let last = prev.unwrap_or_default();
            Err(Error::TruncationDiverged {
                previous: format!("{before}"),
                last: format!("{last}"),
            })
        }
    }
}

fn floor_of(p: &Potential) -> Result<f64> {
    p.left_floor().ok_or_else(|| {
        Error::param("potential", "rough left tail: use the truncated potential for real-axis data")
    })
}

/// One evaluation of the split at real `k > 0`.
#[derive(Clone, Copy, Debug)]
pub struct SplitTerms {
    pub k: f64,
    /// `A_a(k)`
    pub a_term: C64,
    /// `r_a(k)`
    pub r_term: C64,
    /// `A_a + r_a e^{-2ika}`
    pub reflection: C64,
    /// `T(k)` normalised by `Psi_- = e^{-i eta x}` on the left tail.
    pub transmission: C64,
    /// `| |R|^2 + (Im m_- / k) |T Psi_-(a)|^2 - 1 |`
    pub unitarity: f64,
}

/// Evaluates `A_a`, `r_a` and the reflection coefficient at real `k > 0`.
pub fn analytic_split(p: &Potential, a: f64, k: f64) -> Result<SplitTerms> {
    if k <= 0.0 {
        return Err(Error::param("k", "the split is evaluated on k > 0"));
    }
    let floor = floor_of(p)?;
    let lambda = C64::new(k * k, 0.0);
    let eta = sqrt_upper(C64::new(k * k - floor, 0.0));
    let y = faddeev_right(p, C64::new(k, 0.0), a)?;
    let z = weyl_left(p, eta, floor, a)?;
    if at_node(y) || at_node(z) {
        return Err(Error::WeylNode { a, lambda: lambda.to_string() });
    }
    let mp = I * k + y[1] / y[0];
    let mm = I * eta - z[1] / z[0];
    let d = mp + mm;
    let psi_a = C64::from_polar(1.0, k * a) * y[0];
    let a_term = 2.0 * I * k / (psi_a * psi_a * d);
    let r_term = -y[0].conj() / y[0];
    let reflection = a_term + r_term * C64::from_polar(1.0, -2.0 * k * a);
    let psi_minus = (-I * eta * a).exp() * z[0];
    let transmission = 2.0 * I * k / (psi_minus * psi_a * d);
    let unitarity = (reflection.norm_sqr() + 4.0 * k * mm.im / (y[0].norm_sqr() * d.norm_sqr())
        - 1.0)
        .abs();
    Ok(SplitTerms { k, a_term, r_term, reflection, transmission, unitarity })
}

/// Reflection data of a step-like potential on the given `k > 0`.
pub fn reflection_steplike(p: &Potential, a: f64, ks: &[f64]) -> Result<Vec<ReflectionSample>> {
    ks.par_iter()
        .map(|&k| {
            let s = analytic_split(p, a, k)?;
            Ok(ReflectionSample { k, r: s.reflection, t: s.transmission, residual: s.unitarity })
        })
        .collect()
}

/// `sup_k |R_split(k) - R_wronskian(k)|` where the second value comes from Wronskians
/// evaluated at `a - 1` instead of `a`.
pub fn analytic_split_check(p: &Potential, a: f64, ks: &[f64]) -> Result<f64> {
    analytic_split_check_with(p, a, ks, 1.0)
}

/// As [`analytic_split_check`] with the sign of the Fourier exponent `e^{-2ika}` set by `sign`
/// (`+1` correct, `-1` deliberately wrong).
pub fn analytic_split_check_with(p: &Potential, a: f64, ks: &[f64], sign: f64) -> Result<f64> {
    let floor = floor_of(p)?;
    let xw = a - 1.0;
    let worst = ks
        .par_iter()
        .map(|&k| {
            let s = analytic_split(p, a, k)?;
            let split = s.a_term + s.r_term * C64::from_polar(1.0, -2.0 * sign * k * a);
            let eta = (k * k - floor).sqrt();
            let y = faddeev_right(p, C64::new(k, 0.0), xw)?;
            let z = weyl_left(p, C64::new(eta, 0.0), floor, xw)?;
            let (r, _) = reflection_at(k, eta, xw, y, z);
            Ok((split - r).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// The measure `rho`.
#[derive(Clone, Debug, Default)]
pub struct RhoMeasure {
    pub split_point: f64,
    pub atoms: Vec<Atom>,
    /// `(s, density)` pairs.
    pub density: Vec<(f64, f64)>,
}

/// Height `h` of the left step (`q -> -h^2` at `-inf`); zero for short-range potentials.
pub fn step_height(p: &Potential) -> Result<f64> {
    Ok((-floor_of(p)?).max(0.0).sqrt())
}

/// `psi_+(a, is) = e^{-sa} y(a, is)`, with the node check.
fn psi_at(p: &Potential, s: f64, a: f64) -> Result<f64> {
    let y = faddeev_right(p, C64::new(0.0, s), a)?;
    let psi = (-s * a).exp() * y[0].re;
    if y[0].re.abs() < NODE_TOL {
        return Err(Error::InvalidSplitPoint { a, s });
    }
    Ok(psi)
}

/// `m_+ + m_-` at `lambda`, the `+i0` limit being taken through the branch of the square roots.
fn m_sum(p: &Potential, lambda: C64, a: f64, floor: f64) -> Result<C64> {
    Ok(m_plus(p, lambda, a)? + m_minus_fixed(p, lambda, a, floor)?)
}

/// Density of `rho` at `s`, evaluated directly on the boundary `lambda = -s^2 + i0`.
pub fn rho_density(p: &Potential, a: f64, s: f64) -> Result<f64> {
    let floor = floor_of(p)?;
    let h = (-floor).max(0.0).sqrt();
    if s <= 0.0 || s >= h {
        return Ok(0.0);
    }
    let psi = psi_at(p, s, a)?;
    // lambda + i0 with lambda - floor = h^2 - s^2 > 0: eta is the positive root.
    let d = m_sum(p, C64::new(-s * s, 0.0), a, floor)?;
    Ok((-1.0 / d).im / std::f64::consts::PI * 2.0 * s / (psi * psi))
}

/// Density of `rho` at `s` from `lambda = -s^2 + i eps`, `eps = 1e-2, 5e-3, 2.5e-3`, with
/// Richardson extrapolation. The pole contributions of `atoms` are subtracted first.
pub fn rho_density_extrapolated(p: &Potential, a: f64, s: f64, atoms: &[Atom]) -> Result<f64> {
    let floor = floor_of(p)?;
    let psi = psi_at(p, s, a)?;
    let eps = [1e-2, 5e-3, 2.5e-3];
    // mu-masses of the atoms: rho-mass times psi(a, i kappa)^2
    let poles: Vec<(f64, f64)> = atoms
        .iter()
        .map(|at| Ok((-at.kappa * at.kappa, at.mass * psi_at(p, at.kappa, a)?.powi(2))))
        .collect::<Result<_>>()?;
    let mut g = [0.0; 3];
    for (gi, &e) in g.iter_mut().zip(&eps) {
        let lambda = C64::new(-s * s, e);
        let f = -1.0 / m_sum(p, lambda, a, floor)?;
        let pole: f64 = poles.iter().map(|&(l, m)| m * e / ((l + s * s).powi(2) + e * e)).sum();
        *gi = f.im - pole;
    }
    let d1 = g[0] - g[1];
    let d2 = g[1] - g[2];
    let noise = 1e-12 * g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if d1.abs() > noise && d2.abs() > noise && d1.signum() != d2.signum() {
        return Err(Error::Extrapolation {
            s,
            trace: eps.iter().copied().zip(g.iter().copied()).collect(),
        });
    }
    let r1 = 2.0 * g[1] - g[0];
    let r2 = 2.0 * g[2] - g[1];
    let g0 = (4.0 * r2 - r1) / 3.0;
    Ok(g0 / std::f64::consts::PI * 2.0 * s / (psi * psi))
}

/// Atoms of `rho`: bound states below the floor with masses from the Wronskian derivative.
pub fn rho_atoms(p: &Potential, a: f64) -> Result<Vec<Atom>> {
    let floor = floor_of(p)?;
    let eig: Vec<Eigenvalue> = spectrum::eigenvalues(p, floor)?;
    let mut atoms: Vec<Atom> = eig
        .par_iter()
        .map(|e| {
            psi_at(p, e.kappa, a)?;
            Ok(Atom { kappa: e.kappa, mass: spectrum::norming_from_wronskian(p, e, floor)? })
        })
        .collect::<Result<_>>()?;
    atoms.sort_by(|x, y| x.kappa.total_cmp(&y.kappa));
    Ok(atoms)
}

/// Atoms and density of `rho` for split point `a`; the density is sampled at `s_grid`.
pub fn rho_measure(p: &Potential, a: f64, s_grid: &[f64]) -> Result<RhoMeasure> {
    let atoms = rho_atoms(p, a)?;
    let density = s_grid
        .par_iter()
        .map(|&s| Ok((s, rho_density(p, a, s)?)))
        .collect::<Result<_>>()?;
    Ok(RhoMeasure { split_point: a, atoms, density })
}

/// Whether the left tail is a constant step (as opposed to zero, decaying or rough).
pub fn is_step(p: &Potential) -> bool {
    matches!(p.left.kind, TailKind::ConstantStep { level } if level < 0.0)
}
