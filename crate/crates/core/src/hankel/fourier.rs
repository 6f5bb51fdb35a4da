//! Table of `Phi_R(v) = (1/2pi) int R(k) e^{i(8k^3 t + k v)} dk` and its first two derivatives.
//!
//! The time-zero reflection coefficient is resampled by local Lagrange interpolation onto a midpoint grid fine
//! enough to resolve the cubic phase, the sum over the grid is evaluated on a uniform `v` grid
//! with a chirp-z transform, and values in between come from quintic Hermite interpolation.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::chirpz::chirp_z;
use crate::numeric::interp::{QuinticTable, UniformLagrange};
use crate::scattering::ScatteringData;

/// Samples per local interpolation stencil of the reflection data.
const INTERPOLATION_WIDTH: usize = 8;

/// Largest number of fine-grid points accepted.
const MAX_POINTS: usize = 1 << 23;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FourierOptions {
    /// Cutoff `K` of the `k` integral (further limited by the data grid).
    pub k_max: f64,
    /// Spacing of the `v` table.
    pub dv: f64,
    /// Fixed `k` spacing; `None` chooses one satisfying the phase condition.
    pub dk: Option<f64>,
    /// Reflection data with `sup |R|` below this is treated as reflectionless.
    pub reflection_floor: f64,
    /// Fraction of `[0, K]` at the top over which `R` is rolled off by a cosine window.
    pub taper: f64,
}

impl Default for FourierOptions {
    fn default() -> Self {
        Self { k_max: 40.0, dv: 0.005, dk: None, reflection_floor: 1e-9, taper: 0.25 }
    }
}

/// Facts about a built table, reported in manifests.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FourierCertificate {
    pub k_cut: f64,
    pub dk: f64,
    pub points: usize,
    /// `dk (24 K^2 t + max|v|)`, required to stay below `pi/4`.
    pub phase_increment: f64,
    /// Rough size of the neglected `|k| > K` part.
    pub truncation_estimate: f64,
    pub reflectionless: bool,
}

fn uniform(samples: &[(f64, C64)], dk: f64) -> bool {
    samples.windows(2).all(|w| ((w[1].0 - w[0].0) - dk).abs() <= 1e-9 * dk.max(w[1].0.abs()))
}

/// Cosine roll-off on `[K (1 - taper), K]`.
fn window(k: f64, k_cut: f64, taper: f64) -> f64 {
    let start = k_cut * (1.0 - taper);
    if k <= start || taper <= 0.0 {
        1.0
    } else {
        0.5 * (1.0 + (PI * (k - start) / (k_cut - start)).cos())
    }
}

#[derive(Clone, Debug)]
pub struct ReflectionTransform {
    table: Option<QuinticTable>,
    pub certificate: FourierCertificate,
}

impl ReflectionTransform {
    /// Builds the table for `v` in `[v_lo, v_hi]` at the data's time. `sign = -1` flips the
    /// Fourier exponent (used only as a negative control).
    pub fn build(data: &ScatteringData, v_lo: f64, v_hi: f64, opts: &FourierOptions, sign: f64) -> Result<Self> {
        let t = data.time;
        let mut samples: Vec<(f64, C64)> = data
            .reflection
            .iter()
            .filter(|s| s.k > 0.0)
            .map(|s| (s.k, s.r * C64::from_polar(1.0, -8.0 * s.k.powi(3) * t)))
            .collect();
        if samples.is_empty() {
            samples = data
                .reflection
                .iter()
                .filter(|s| s.k < 0.0)
                .map(|s| (-s.k, (s.r * C64::from_polar(1.0, -8.0 * s.k.powi(3) * t)).conj()))
                .collect();
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sup = samples.iter().map(|s| s.1.norm()).fold(0.0, f64::max);
        if samples.len() < 3 || sup < opts.reflection_floor {
            return Ok(Self {
                table: None,
                certificate: FourierCertificate { reflectionless: true, ..Default::default() },
            });
        }
        let data_dk = samples[1].0 - samples[0].0;
        let k_cut = opts.k_max.min(samples[samples.len() - 1].0 + 0.5 * data_dk);
        let vmax = v_lo.abs().max(v_hi.abs());
        let spread = 24.0 * k_cut * k_cut * t.abs() + vmax;
        let limit = 0.25 * PI / spread;
        let dk = match opts.dk {
            Some(dk) if dk >= limit => return Err(Error::PhaseResolution { dk, required: limit }),
            Some(dk) => dk,
            None => (0.9 * limit).min(data_dk),
        };
        let n = (k_cut / dk).ceil() as usize;
        if n > MAX_POINTS {
            return Err(Error::PhaseResolution { dk: k_cut / MAX_POINTS as f64, required: limit });
        }
        let dk = k_cut / n as f64;
        // Short-range data is interpolated across k = 0 through its mirror image; a left step
        // puts a |k| kink at the origin, so there only k > 0 is used.
        let values: Vec<C64> = if data.step_height > 0.0 {
            samples.iter().map(|s| s.1).collect()
        } else {
            samples.iter().rev().map(|s| s.1.conj()).chain(samples.iter().map(|s| s.1)).collect()
        };
        let start = if data.step_height > 0.0 { samples[0].0 } else { -samples[samples.len() - 1].0 };
        if !uniform(&samples, data_dk) || values.len() < INTERPOLATION_WIDTH {
            return Err(Error::param("reflection", "samples must lie on a uniform k grid"));
        }
        let r0_of = UniformLagrange::new(start, data_dk, values, INTERPOLATION_WIDTH);

        let mut g0 = Vec::with_capacity(n);
        let mut g1 = Vec::with_capacity(n);
        let mut g2 = Vec::with_capacity(n);
        for j in 0..n {
            let k = (j as f64 + 0.5) * dk;
            let r = r0_of.eval(k) * window(k, k_cut, opts.taper);
            let g = r * C64::from_polar(1.0, sign * (8.0 * k * k * k * t + k * v_lo));
            g0.push(g);
            g1.push(g * C64::new(0.0, sign * k));
            g2.push(g * (-k * k));
        }
        let m = ((v_hi - v_lo) / opts.dv).ceil() as usize + 1;
        let theta = sign * dk * opts.dv;
        let sums = chirp_z(&[g0, g1, g2], theta, m);
        let scale = dk / PI;
        let finish = |s: &Vec<C64>| -> Vec<f64> {
            s.iter()
                .enumerate()
                .map(|(i, &v)| scale * (v * C64::from_polar(1.0, 0.5 * theta * i as f64)).re)
                .collect()
        };
        let mut f = finish(&sums[0]);
        let mut f1 = finish(&sums[1]);
        // Euler–Maclaurin end correction of the midpoint sum at k = 0, where a left step leaves
        // a |k| kink: the integrand's slope there is Re(R'(0) + i sign v R(0)).
        let r0 = r0_of.eval(0.0);
        let dr0 = r0_of.derivative(0.0);
        let c = dk * dk / (24.0 * PI);
        for (i, (f, f1)) in f.iter_mut().zip(f1.iter_mut()).enumerate() {
            let v = v_lo + i as f64 * opts.dv;
            *f -= c * (dr0 + C64::new(0.0, sign * v) * r0).re;
            *f1 -= c * (C64::new(0.0, sign) * r0).re;
        }
        let table = QuinticTable { start: v_lo, step: opts.dv, f, f1, f2: finish(&sums[2]) };
        let r_end = r0_of.eval(k_cut).norm();
        let truncation_estimate = r_end / (PI * (24.0 * k_cut * k_cut * t.abs()).max(k_cut).max(1.0));
        Ok(Self {
            table: Some(table),
            certificate: FourierCertificate {
                k_cut,
                dk,
                points: n,
                phase_increment: dk * spread,
                truncation_estimate,
                reflectionless: false,
            },
        })
    }

    pub fn table(&self) -> Option<&QuinticTable> {
        self.table.as_ref()
    }

    pub fn is_reflectionless(&self) -> bool {
        self.table.is_none()
    }

    /// `(Phi, Phi', Phi'')` at `v`.
    pub fn eval(&self, v: f64) -> Result<(f64, f64, f64)> {
        match &self.table {
            None => Ok((0.0, 0.0, 0.0)),
            Some(t) if t.contains(v) => Ok(t.eval(v)),
            Some(t) => Err(Error::TableRange { v, lo: t.start, hi: t.end() }),
        }
    }
}
