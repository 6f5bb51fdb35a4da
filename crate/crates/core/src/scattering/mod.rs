//! Direct scattering: reflection and transmission coefficients, bound states, the measure
//! `rho` for step-like potentials, time evolution of the data and its file format.

mod jost;
mod short_range;
mod spectrum;
mod steplike;

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

pub use jost::{faddeev_right, weyl_left};
pub use short_range::{bound_states, scatter_short_range, BoundState, ShortRangeScattering};
pub use spectrum::{eigenvalues, norming_constant, norming_from_wronskian, Eigenvalue};
pub use steplike::{
    analytic_split, analytic_split_check, analytic_split_check_with, is_step, m_plus,
    reflection_steplike, rho_atoms, rho_density, rho_density_extrapolated, rho_measure,
    step_height, weyl_m_minus, RhoMeasure, SplitTerms,
};

use crate::error::{Error, Result};
use crate::numeric::quad::GaussLegendre;
use crate::potential::{fmt_f64, Potential, TailKind};

/// Uniform midpoint grid `k_j = (j + 1/2) dk` on `(0, k_max]`, optionally mirrored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KGrid {
    pub k_max: f64,
    pub dk: f64,
    pub symmetric: bool,
}

impl Default for KGrid {
    fn default() -> Self {
        Self { k_max: 40.0, dk: 0.01, symmetric: true }
    }
}

impl KGrid {
    pub fn positive(&self) -> Vec<f64> {
        let n = (self.k_max / self.dk).round() as usize;
        (0..n).map(|j| (j as f64 + 0.5) * self.dk).collect()
    }

    /// All points in increasing order.
    pub fn points(&self) -> Vec<f64> {
        let pos = self.positive();
        if !self.symmetric {
            return pos;
        }
        let mut out: Vec<f64> = pos.iter().rev().map(|k| -k).collect();
        out.extend(pos);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionSample {
    pub k: f64,
    pub r: C64,
    pub t: C64,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub kappa: f64,
    pub mass: f64,
}

/// Density of `rho` at a quadrature node `s` together with the node's weight.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityNode {
    pub s: f64,
    pub density: f64,
    pub weight: f64,
}

/// Scattering data at time `time`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringData {
    pub time: f64,
    /// Split point `a` used for `rho`.
    pub split_point: f64,
    /// `h` with `q -> -h^2` at `-inf` (zero for short-range data).
    pub step_height: f64,
    /// Upper end of the support of `rho`.
    pub h0: f64,
    /// Left truncation applied to the potential before scattering, if any.
    pub truncation: Option<f64>,
    pub atoms: Vec<Atom>,
    pub reflection: Vec<ReflectionSample>,
    pub density: Vec<DensityNode>,
    /// `k` values where the Wronskian nearly vanished.
    pub flagged: Vec<f64>,
}

/// Options for [`scatter`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterOptions {
    pub grid: KGrid,
    /// Split point for `rho`; defaults to the potential's natural split point.
    pub split_point: Option<f64>,
    /// Truncation point used for rough left tails.
    pub rough_cutoff: f64,
    /// Gauss–Legendre nodes per panel for the density of `rho` (see [`density_quadrature`]).
    pub density_nodes: usize,
    /// Integrate `k < 0` directly instead of mirroring the `k > 0` half.
    pub direct_negative: bool,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        Self { grid: KGrid::default(), split_point: None, rough_cutoff: -20.0, density_nodes: 6, direct_negative: false }
    }
}

/// Nodes and weights for integrals over `(0, h]` against the density of `rho`.
///
/// With `s = h sin(theta)` the square-root edge at `s = h` becomes smooth. The `theta` range
/// `[asin(1e-6 / h), pi/2]` is covered by Gauss–Legendre panels of `per_panel` nodes that double
/// in width away from the clip until they reach `0.15`, then stay uniform; the grading keeps
/// `e^{-s sigma}` resolved for large `sigma`.
pub fn density_quadrature(h: f64, per_panel: usize) -> Vec<(f64, f64)> {
    if h <= 0.0 || per_panel == 0 {
        return Vec::new();
    }
    let theta_min = (1e-6 / h).min(1.0).asin();
    let top = std::f64::consts::FRAC_PI_2;
    let mut edges = vec![theta_min];
    let mut width = theta_min;
    while *edges.last().unwrap() < top {
        width = (2.0 * width).min(0.15);
        let next = edges.last().unwrap() + width;
        edges.push(if top - next < 0.5 * width { top } else { next.min(top) });
    }
    let rule = GaussLegendre::new(per_panel);
    let mut out = Vec::with_capacity(per_panel * (edges.len() - 1));
    for pair in edges.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let theta = a + half * (1.0 + x);
            out.push((h * theta.sin(), w * half * h * theta.cos()));
        }
    }
    out
}

/// Computes scattering data at `t = 0`.
///
/// Short-range potentials give reflection data on the full grid plus bound states; a constant
/// left step gives reflection data from the analytic split (mirrored to `k < 0`) and the
/// measure `rho`; a rough left tail is truncated at `rough_cutoff` first.
pub fn scatter(p: &Potential, opts: &ScatterOptions) -> Result<ScatteringData> {
    if let TailKind::SampledRough { .. } = p.left.kind {
        let truncated = p.truncate_left(opts.rough_cutoff);
        // R of the truncated profile oscillates like e^{2ik cutoff}; keep that resolved.
        let mut inner = opts.clone();
        inner.grid.dk = opts.grid.dk.min(0.1 / opts.rough_cutoff.abs().max(1.0));
        let mut data = scatter(&truncated, &inner)?;
        data.truncation = Some(opts.rough_cutoff);
        return Ok(data);
    }
    let split_point = opts.split_point.unwrap_or_else(|| p.natural_split_point());
    if p.is_short_range() {
        let ks = if opts.direct_negative { opts.grid.points() } else { opts.grid.positive() };
        let mut sr = scatter_short_range(p, &ks)?;
        if opts.grid.symmetric && !opts.direct_negative {
            sr.samples = mirror(sr.samples);
            let mut flagged: Vec<f64> = sr.flagged.iter().map(|k| -k).collect();
            flagged.extend(&sr.flagged);
            flagged.sort_by(f64::total_cmp);
            sr.flagged = flagged;
        }
        let atoms: Vec<Atom> = bound_states(p)?
            .into_iter()
            .map(|b| Atom { kappa: b.kappa, mass: b.norming })
            .collect();
        let h0 = atoms.iter().map(|a| a.kappa).fold(0.0, f64::max);
        return Ok(ScatteringData {
            time: 0.0,
            split_point,
            step_height: 0.0,
            h0,
            truncation: p.truncation(),
            atoms,
            reflection: sr.samples,
            density: Vec::new(),
            flagged: sr.flagged,
        });
    }
    let h = step_height(p)?;
    let pos = opts.grid.positive();
    let right = reflection_steplike(p, split_point, &pos)?;
    let reflection = if opts.grid.symmetric { mirror(right) } else { right };
    let nodes = density_quadrature(h, opts.density_nodes);
    let s_grid: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let rho = rho_measure(p, split_point, &s_grid)?;
    let density = nodes
        .iter()
        .zip(&rho.density)
        .map(|(&(s, w), &(_, d))| DensityNode { s, density: d, weight: w })
        .collect();
    let h0 = rho.atoms.iter().map(|a| a.kappa).fold(h, f64::max);
    Ok(ScatteringData {
        time: 0.0,
        split_point,
        step_height: h,
        h0,
        truncation: p.truncation(),
        atoms: rho.atoms,
        reflection,
        density,
        flagged: Vec::new(),
    })
}

/// Prepends the `k < 0` half using `R(-k) = conj R(k)` for real potentials.
fn mirror(right: Vec<ReflectionSample>) -> Vec<ReflectionSample> {
    let mut out: Vec<ReflectionSample> = right
        .iter()
        .rev()
        .map(|s| ReflectionSample { k: -s.k, r: s.r.conj(), t: s.t.conj(), residual: s.residual })
        .collect();
    out.extend(right);
    out
}

/// Time evolution: `R e^{8ik^3 t}`, atom masses `e^{8 kappa^3 t}`, density `e^{8 s^3 t}`.
pub fn evolve_data(data: &ScatteringData, t: f64) -> ScatteringData {
    let mut out = data.clone();
    out.time = data.time + t;
    for s in &mut out.reflection {
        s.r *= C64::from_polar(1.0, 8.0 * s.k.powi(3) * t);
    }
    for a in &mut out.atoms {
        a.mass *= (8.0 * a.kappa.powi(3) * t).exp();
    }
    for d in &mut out.density {
        d.density *= (8.0 * d.s.powi(3) * t).exp();
    }
    out
}

impl ScatteringData {
    /// Largest unitarity residual over grid points with `|k|` in `[lo, hi]`.
    pub fn max_unitarity_residual(&self, lo: f64, hi: f64) -> f64 {
        self.reflection
            .iter()
            .filter(|s| (lo..=hi).contains(&s.k.abs()))
            .map(|s| s.residual)
            .fold(0.0, f64::max)
    }

    /// Total mass of `rho` (atoms plus integrated density).
    pub fn rho_total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.density.iter().map(|d| d.density * d.weight).sum::<f64>()
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::from("format = kdvist-scattering/1\n");
        let opt = |v: Option<f64>| v.map_or("none".to_string(), fmt_f64);
        writeln!(out, "time = {}", fmt_f64(self.time)).unwrap();
        writeln!(out, "split_point = {}", fmt_f64(self.split_point)).unwrap();
        writeln!(out, "step_height = {}", fmt_f64(self.step_height)).unwrap();
        writeln!(out, "h0 = {}", fmt_f64(self.h0)).unwrap();
        writeln!(out, "truncation = {}", opt(self.truncation)).unwrap();
        let flagged: Vec<String> = self.flagged.iter().map(|&k| fmt_f64(k)).collect();
        writeln!(out, "flagged = {}", flagged.join(" ")).unwrap();
        out.push_str("[atoms]\nkappa,mass\n");
        for a in &self.atoms {
            writeln!(out, "{},{}", fmt_f64(a.kappa), fmt_f64(a.mass)).unwrap();
        }
        out.push_str("[reflection]\nk,re_r,im_r,re_t,im_t,unitarity_residual\n");
        for s in &self.reflection {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(s.k),
                fmt_f64(s.r.re),
                fmt_f64(s.r.im),
                fmt_f64(s.t.re),
                fmt_f64(s.t.im),
                fmt_f64(s.residual)
            )
            .unwrap();
        }
        out.push_str("[density]\ns,density,weight\n");
        for d in &self.density {
            writeln!(out, "{},{},{}", fmt_f64(d.s), fmt_f64(d.density), fmt_f64(d.weight)).unwrap();
        }
        out
    }

    pub fn from_file_string(text: &str) -> Result<Self> {
        let mut data = ScatteringData {
            time: 0.0,
            split_point: 0.0,
            step_height: 0.0,
            h0: 0.0,
            truncation: None,
            atoms: Vec::new(),
            reflection: Vec::new(),
            density: Vec::new(),
            flagged: Vec::new(),
        };
        let num = |s: &str| -> Result<f64> {
            s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: `{s}`")))
        };
        let mut section = "";
        let mut header_seen = false;
        let mut format_ok = false;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = match &line[1..line.len() - 1] {
                    "atoms" => "atoms",
                    "reflection" => "reflection",
                    "density" => "density",
                    other => return Err(Error::Parse(format!("unknown section `{other}`"))),
                };
                header_seen = false;
                continue;
            }
            if section.is_empty() {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("expected key = value, got `{line}`")))?;
                let value = value.trim();
                match key.trim() {
                    "format" => format_ok = value == "kdvist-scattering/1",
                    "time" => data.time = num(value)?,
                    "split_point" => data.split_point = num(value)?,
                    "step_height" => data.step_height = num(value)?,
                    "h0" => data.h0 = num(value)?,
                    "truncation" => {
                        data.truncation = if value == "none" { None } else { Some(num(value)?) }
                    }
                    "flagged" => {
                        data.flagged =
                            value.split_whitespace().map(num).collect::<Result<Vec<f64>>>()?
                    }
                    other => return Err(Error::Parse(format!("unknown key `{other}`"))),
                }
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let cols: Vec<f64> = line.split(',').map(num).collect::<Result<_>>()?;
            let need = match section {
                "atoms" => 2,
                "reflection" => 6,
                _ => 3,
            };
            if cols.len() != need {
                return Err(Error::Parse(format!("expected {need} columns in `{line}`")));
            }
            match section {
                "atoms" => data.atoms.push(Atom { kappa: cols[0], mass: cols[1] }),
                "reflection" => data.reflection.push(ReflectionSample {
                    k: cols[0],
                    r: C64::new(cols[1], cols[2]),
                    t: C64::new(cols[3], cols[4]),
                    residual: cols[5],
                }),
                _ => data.density.push(DensityNode { s: cols[0], density: cols[1], weight: cols[2] }),
            }
        }
        if !format_ok {
            return Err(Error::Parse("missing or unsupported format line".into()));
        }
        Ok(data)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_file_string(&std::fs::read_to_string(path)?)
    }
}
