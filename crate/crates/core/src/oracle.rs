//! Periodic pseudospectral KdV solver used as an independent check of the IST pipeline.
//!
//! In Fourier space `q_t - 6 q q_x + q_xxx = 0` reads `q^_t = i k^3 q^ + 3 i k (q^2)^`. The
//! linear part is integrated exactly and the nonlinear part by fourth-order exponential time
//! differencing (Cox–Matthews with the contour-integral coefficients of Kassam and Trefethen).
//! Products are dealiased by the 2/3 rule.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points on the circle used for the ETDRK4 coefficients.
const CONTOUR_POINTS: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub domain_half_length: f64,
    pub modes: usize,
    pub dt: f64,
    pub t_end: f64,
    /// The 2/3 rule; must stay on.
    pub dealias: bool,
    /// Largest `|q|` tolerated in the boundary strips.
    pub wrap_tol: f64,
    /// Width of each boundary strip as a fraction of the domain.
    pub wrap_fraction: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            domain_half_length: 64.0,
            modes: 8192,
            dt: 1e-4,
            t_end: 0.05,
            dealias: true,
            wrap_tol: 1e-8,
            wrap_fraction: 0.05,
        }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.modes < 256 || !self.modes.is_power_of_two() {
            return Err(Error::param("modes", "must be a power of two and at least 256"));
        }
        for (name, v) in [("domain_half_length", self.domain_half_length), ("dt", self.dt), ("wrap_tol", self.wrap_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::param("t_end", "must be non-negative"));
        }
        if !(self.wrap_fraction > 0.0 && self.wrap_fraction < 0.5) {
            return Err(Error::param("wrap_fraction", "must lie in (0, 0.5)"));
        }
        if !self.dealias {
            return Err(Error::param("dealias", "the 2/3 rule is required"));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.domain_half_length / self.modes as f64
    }

    /// Grid `x_j = -half_length + j dx`.
    pub fn grid(&self) -> Vec<f64> {
        (0..self.modes).map(|j| -self.domain_half_length + j as f64 * self.dx()).collect()
    }

    /// Largest retained wavenumber after dealiasing.
    pub fn k_dealiased(&self) -> f64 {
        PI / self.domain_half_length * (self.modes / 3) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub q: Vec<f64>,
    pub mass: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRun {
    pub x: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl OracleRun {
    /// Largest drift of `int q` and `int q^2` from the first snapshot.
    pub fn conservation_drift(&self) -> (f64, f64) {
        let first = &self.snapshots[0];
        self.snapshots.iter().fold((0.0, 0.0), |(m, e), s| {
            (m.max((s.mass - first.mass).abs()), e.max((s.energy - first.energy).abs()))
        })
    }

    /// Trigonometric interpolation of the snapshot at index `i`.
    pub fn sample(&self, i: usize, x: f64) -> f64 {
        self.sample_many(i, &[x])[0]
    }

    /// Band-limited interpolant of snapshot `i` at each of `xs`; exact at grid points up to
    /// rounding.
    pub fn sample_many(&self, i: usize, xs: &[f64]) -> Vec<f64> {
        let n = self.x.len();
        let mut hat: Vec<C64> = self.snapshots[i].q.iter().map(|&q| C64::new(q, 0.0)).collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut hat);
        let period = n as f64 * (self.x[1] - self.x[0]);
        xs.iter()
            .map(|&x| {
                let theta = 2.0 * PI * (x - self.x[0]) / period;
                let mut sum = hat[0].re;
                for (m, c) in hat.iter().enumerate().take(n.div_ceil(2)).skip(1) {
                    let (s, co) = (theta * m as f64).sin_cos();
                    sum += 2.0 * (c.re * co - c.im * s);
                }
                if n.is_multiple_of(2) {
                    sum += hat[n / 2].re * (theta * (n / 2) as f64).cos();
                }
                sum / n as f64
            })
            .collect()
    }

    /// Same columns as the IST solution grid; IST-only diagnostics are `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(crate::hankel::SOLUTION_HEADER);
        out.push('\n');
        let n = self.x.len();
        let length = self.x[1] - self.x[0];
        let f = crate::potential::fmt_f64;
        for s in &self.snapshots {
            for (x, q) in self.x.iter().zip(&s.q) {
                out.push_str(&format!("{},{},{},nan,nan,nan,{n},{},true,ok\n", f(*x), f(s.t), f(*q), f(length * n as f64)));
            }
        }
        out
    }
}

struct Stepper {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// `3 i k` with dealiased modes zeroed.
    nonlinear: Vec<C64>,
    linear: Vec<C64>,
    coeffs: HashMap<u64, Coefficients>,
}

struct Coefficients {
    e: Vec<C64>,
    e2: Vec<C64>,
    q: Vec<C64>,
    f1: Vec<C64>,
    f2: Vec<C64>,
    f3: Vec<C64>,
}

impl Stepper {
    fn new(cfg: &OracleConfig) -> Self {
        let n = cfg.modes;
        let mut planner = FftPlanner::new();
        let scale = PI / cfg.domain_half_length;
        let cut = n / 3;
        let mut nonlinear = vec![C64::new(0.0, 0.0); n];
        let mut linear = vec![C64::new(0.0, 0.0); n];
        for j in 0..n {
            let m = if j < n / 2 { j as isize } else { j as isize - n as isize };
            let k = scale * m as f64;
            linear[j] = C64::new(0.0, k * k * k);
            if m.unsigned_abs() < cut {
                nonlinear[j] = C64::new(0.0, 3.0 * k);
            }
        }
        Self { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), nonlinear, linear, coeffs: HashMap::new() }
    }

    fn coefficients(&mut self, h: f64) {
        let linear = &self.linear;
        self.coeffs.entry(h.to_bits()).or_insert_with(|| {
            let roots: Vec<C64> = (0..CONTOUR_POINTS)
                .map(|j| C64::from_polar(1.0, PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64 * 2.0))
                .collect();
            let mut c = Coefficients { e: vec![], e2: vec![], q: vec![], f1: vec![], f2: vec![], f3: vec![] };
            for &l in linear {
                let hl = h * l;
                let (mut q, mut f1, mut f2, mut f3) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for &r in &roots {
                    let z = hl + r;
                    let ez = z.exp();
                    let z3 = z * z * z;
                    q += ((z * 0.5).exp() - 1.0) / z;
                    f1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                    f2 += (2.0 + z + ez * (z - 2.0)) / z3;
                    f3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
                }
                let w = h / CONTOUR_POINTS as f64;
                c.e.push(hl.exp());
                c.e2.push((hl * 0.5).exp());
                c.q.push(q * w);
                c.f1.push(f1 * w);
                c.f2.push(f2 * w);
                c.f3.push(f3 * w);
            }
            c
        });
    }

    /// `3 i k (q^2)^` from the spectrum `v`.
    fn nonlinear_term(&self, v: &[C64], out: &mut [C64]) {
        let n = v.len();
        let mut buf = v.to_vec();
        self.inv.process(&mut buf);
        for b in &mut buf {
            let q = b.re / n as f64;
            *b = C64::new(q * q, 0.0);
        }
        self.fwd.process(&mut buf);
        for ((o, b), nl) in out.iter_mut().zip(&buf).zip(&self.nonlinear) {
            *o = nl * b;
        }
    }

    fn step(&mut self, v: &mut [C64], h: f64) {
        self.coefficients(h);
        let c = &self.coeffs[&h.to_bits()];
        let n = v.len();
        let zero = C64::new(0.0, 0.0);
        let (mut nv, mut na, mut nb, mut nc) = (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
        self.nonlinear_term(v, &mut nv);
        let a: Vec<C64> = (0..n).map(|j| c.e2[j] * v[j] + c.q[j] * nv[j]).collect();
        self.nonlinear_term(&a, &mut na);
        let b: Vec<C64> = (0..n).map(|j| c.e2[j] * v[j] + c.q[j] * na[j]).collect();
        self.nonlinear_term(&b, &mut nb);
        let cc: Vec<C64> = (0..n).map(|j| c.e2[j] * a[j] + c.q[j] * (2.0 * nb[j] - nv[j])).collect();
        self.nonlinear_term(&cc, &mut nc);
        for j in 0..n {
            v[j] = c.e[j] * v[j] + nv[j] * c.f1[j] + 2.0 * (na[j] + nb[j]) * c.f2[j] + nc[j] * c.f3[j];
        }
    }
}

fn to_physical(inv: &Arc<dyn Fft<f64>>, v: &[C64]) -> Vec<f64> {
    let n = v.len();
    let mut buf = v.to_vec();
    inv.process(&mut buf);
    buf.iter().map(|b| b.re / n as f64).collect()
}

fn snapshot(t: f64, q: Vec<f64>, dx: f64) -> Snapshot {
    let mass = dx * q.iter().sum::<f64>();
    let energy = dx * q.iter().map(|v| v * v).sum::<f64>();
    Snapshot { t, q, mass, energy }
}

fn boundary_max(q: &[f64], fraction: f64) -> f64 {
    let strip = ((q.len() as f64 * fraction).ceil() as usize).max(1);
    q[..strip].iter().chain(&q[q.len() - strip..]).fold(0.0, |m, v| m.max(v.abs()))
}

/// Evolves `q0` (sampled on [`OracleConfig::grid`]) and records snapshots at `times` (sorted,
/// within `[0, t_end]`; `t = 0` is always recorded first).
pub fn evolve_pde(q0: &[f64], times: &[f64], cfg: &OracleConfig) -> Result<OracleRun> {
    cfg.validate()?;
    if q0.len() != cfg.modes {
        return Err(Error::param("q0", format!("expected {} samples, got {}", cfg.modes, q0.len())));
    }
    let edge = boundary_max(q0, cfg.wrap_fraction);
    if edge > cfg.wrap_tol {
        return Err(Error::WrapAround { time: 0.0, value: edge });
    }
    let sup = q0.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let limit = 0.5 / (3.0 * cfg.k_dealiased() * sup.max(1e-300));
    if cfg.dt > limit {
        return Err(Error::param("dt", format!("dt = {} exceeds the stability bound {limit:e} for sup|q0| = {sup}", cfg.dt)));
    }
    let mut targets: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    targets.sort_by(f64::total_cmp);
    if let Some(&t) = targets.last() {
        if t > cfg.t_end * (1.0 + 1e-12) {
            return Err(Error::param("times", format!("requested t = {t} beyond t_end = {}", cfg.t_end)));
        }
    }
    let mut stepper = Stepper::new(cfg);
    let mut v: Vec<C64> = q0.iter().map(|&q| C64::new(q, 0.0)).collect();
    stepper.fwd.process(&mut v);
    let dx = cfg.dx();
    let mut snapshots = vec![snapshot(0.0, q0.to_vec(), dx)];
    let mut now = 0.0;
    let check_every = 50;
    for target in targets {
        let span = target - now;
        if span <= 0.0 {
            continue;
        }
        let steps = (span / cfg.dt).ceil() as usize;
        let h = span / steps as f64;
        for i in 0..steps {
            stepper.step(&mut v, h);
            if (i + 1) % check_every == 0 || i + 1 == steps {
                let q = to_physical(&stepper.inv, &v);
                let edge = boundary_max(&q, cfg.wrap_fraction);
                if !(edge <= cfg.wrap_tol) {
                    return Err(Error::WrapAround { time: now + (i + 1) as f64 * h, value: edge });
                }
            }
        }
        now = target;
        snapshots.push(snapshot(now, to_physical(&stepper.inv, &v), dx));
    }
    Ok(OracleRun { x: cfg.grid(), snapshots })
}

/// Smoothed step of depth `h^2` with its front at `x = 0` and width `eps`. On a periodic
/// domain the well closes again near `-0.75 L` with unit width, far from the right window.
pub fn mollified_step(h: f64, eps: f64, half_length: f64) -> impl Fn(f64) -> f64 {
    let back = -0.75 * half_length;
    move |x: f64| -h * h * 0.25 * (1.0 - (x / eps).tanh()) * (1.0 + (x - back).tanh())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> OracleConfig {
        OracleConfig { domain_half_length: 30.0, modes: 1024, dt: 1e-3, t_end: 0.5, ..Default::default() }
    }

    #[test]
    fn zero_stays_zero() {
        let cfg = small();
        let run = evolve_pde(&vec![0.0; cfg.modes], &[0.1, 0.5], &cfg).unwrap();
        assert!(run.snapshots.iter().all(|s| s.q.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn soliton_travels_at_speed_four() {
        let cfg = small();
        let q0: Vec<f64> = cfg.grid().iter().map(|&x| -2.0 / x.cosh().powi(2)).collect();
        let run = evolve_pde(&q0, &[0.5], &cfg).unwrap();
        let err = run
            .x
            .iter()
            .zip(&run.snapshots[1].q)
            .map(|(&x, &q)| (q + 2.0 / (x - 2.0).cosh().powi(2)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err:e}");
    }

    #[test]
    fn rejects_data_touching_the_boundary() {
        let cfg = small();
        let q0 = vec![-1.0; cfg.modes];
        assert!(matches!(evolve_pde(&q0, &[0.1], &cfg), Err(Error::WrapAround { .. })));
    }

    #[test]
    fn rejects_odd_mode_counts() {
        let cfg = OracleConfig { modes: 1000, ..small() };
        assert!(cfg.validate().is_err());
    }
}
