//! The kernel `F(s)` of the Hankel operator, with `h(u) = F(2x + u)`.

use crate::error::{Error, Result};
use crate::numeric::interp::QuinticTable;
use crate::scattering::ScatteringData;

use super::fourier::{FourierOptions, ReflectionTransform};

/// Evolved kernel split into atoms and a tabulated continuous part (density plus reflection).
#[derive(Clone, Debug)]
pub struct HankelKernel {
    pub time: f64,
    /// The data came from a potential with a left step.
    pub steplike: bool,
    /// `(kappa, ln c(t))` for every atom with positive mass.
    pub atoms: Vec<(f64, f64)>,
    /// `(s, quadrature weight * density)` at time `t`.
    pub density: Vec<(f64, f64)>,
    pub transform: ReflectionTransform,
    continuous: Option<QuinticTable>,
}

impl HankelKernel {
    /// Kernel for `data` (already evolved to its time) valid for `F(s)` with `s` in `[lo, hi]`.
    pub fn new(data: &ScatteringData, lo: f64, hi: f64, opts: &FourierOptions, sign: f64) -> Result<Self> {
        let atoms = data
            .atoms
            .iter()
            .filter(|a| a.mass > 0.0)
            .map(|a| (a.kappa, a.mass.ln()))
            .collect();
        let density: Vec<(f64, f64)> = data
            .density
            .iter()
            .map(|d| (d.s, d.density * d.weight))
            .filter(|d| d.1 != 0.0)
            .collect();
        let transform = ReflectionTransform::build(data, lo, hi, opts, sign)?;
        let mut continuous = transform.table().cloned();
        if !density.is_empty() {
            let table = continuous.get_or_insert_with(|| {
                let m = ((hi - lo) / opts.dv).ceil() as usize + 1;
                QuinticTable { start: lo, step: opts.dv, f: vec![0.0; m], f1: vec![0.0; m], f2: vec![0.0; m] }
            });
            for i in 0..table.f.len() {
                let v = table.start + i as f64 * table.step;
                for &(r, w) in &density {
                    let e = w * (-r * v).exp();
                    table.f[i] += e;
                    table.f1[i] -= r * e;
                    table.f2[i] += r * r * e;
                }
            }
        }
        Ok(Self { time: data.time, steplike: data.step_height > 0.0, atoms, density, transform, continuous })
    }

    pub fn has_continuous_part(&self) -> bool {
        self.continuous.is_some()
    }

    /// Continuous part and its first two derivatives at `s`.
    pub fn continuous(&self, s: f64) -> Result<(f64, f64, f64)> {
        match &self.continuous {
            None => Ok((0.0, 0.0, 0.0)),
            Some(t) if t.contains(s) => Ok(t.eval(s)),
            Some(t) => Err(Error::TableRange { v: s, lo: t.start, hi: t.end() }),
        }
    }

    /// Full kernel `F(s)`.
    pub fn value(&self, s: f64) -> Result<f64> {
        let atoms: f64 = self.atoms.iter().map(|&(k, lc)| (lc - k * s).exp()).sum();
        Ok(atoms + self.continuous(s)?.0)
    }

    /// `h(u) = F(2x + u)`.
    pub fn eval(&self, x: f64, u: f64) -> Result<f64> {
        self.value(2.0 * x + u)
    }
}
