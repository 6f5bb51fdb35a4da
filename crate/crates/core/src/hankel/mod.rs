//! Recovery of `q(x, t)` from scattering data through `det(I + H(x, t))`.
//!
//! The operator acts on `L^2(0, inf)` with kernel `h(u + v)`, `h(u) = F(2x + u)`, where
//! `F` collects the evolved atoms, the density part of the spectral measure and the Fourier
//! transform of the reflection coefficient. Three routes turn determinants into `q`:
//! analytic traces, finite differences of `log det`, and the Marchenko value `K(x, x)`.

mod fourier;
mod kernel;
mod nystrom;
mod svd;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scattering::{evolve_data, ScatteringData};

pub use fourier::{FourierCertificate, FourierOptions, ReflectionTransform};
pub use kernel::HankelKernel;
pub use nystrom::{Factored, NystromDiscretization};
pub use svd::{fit_power, singular_spectrum, PowerFit, SingularSpectrum, DATA_RELATIVE_ACCURACY};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    #[default]
    Trace,
    FiniteDiff,
    Glm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HankelOptions {
    pub fourier: FourierOptions,
    /// Starting node count; doubled until `log det` settles.
    pub nodes: usize,
    pub max_nodes: usize,
    /// Fixed truncation length; `None` picks it from the kernel decay.
    pub length: Option<f64>,
    pub max_length: f64,
    /// `|F(2x + u)|` must stay below this beyond `L`.
    pub decay_tol: f64,
    /// Accepted change of `log det` between `n/2` and `n` nodes.
    pub logdet_tol: f64,
    /// Base step of the finite-difference stencils in `x`.
    pub delta: f64,
    pub route_tol: f64,
    /// Route tolerance for data with a left step, whose `1/k^2` reflection tail limits the
    /// analytic second derivative of the kernel table.
    pub route_tol_step: f64,
    /// Evaluate all three routes and compare them.
    pub check_routes: bool,
    /// Flip the sign of the phase `8k^3 t + kv` everywhere, including the growth factors of
    /// atoms and density (negative control only).
    pub flip_sign: bool,
}

impl Default for HankelOptions {
    fn default() -> Self {
        Self {
            fourier: FourierOptions::default(),
            nodes: 64,
            max_nodes: 1024,
            length: None,
            max_length: 120.0,
            decay_tol: 1e-10,
            logdet_tol: 1e-10,
            delta: 0.01,
            route_tol: 1e-6,
            route_tol_step: 1e-4,
            check_routes: true,
            flip_sign: false,
        }
    }
}

impl HankelOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("max_length", self.max_length),
            ("decay_tol", self.decay_tol),
            ("logdet_tol", self.logdet_tol),
            ("delta", self.delta),
            ("route_tol", self.route_tol),
            ("route_tol_step", self.route_tol_step),
            ("fourier.k_max", self.fourier.k_max),
            ("fourier.dv", self.fourier.dv),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        if self.nodes < 2 || self.max_nodes < self.nodes {
            return Err(Error::param("nodes", "need 2 <= nodes <= max_nodes"));
        }
        if let Some(l) = self.length {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::param("length", "must be positive and finite"));
            }
        }
        Ok(())
    }

    fn sign(&self) -> f64 {
        if self.flip_sign {
            -1.0
        } else {
            1.0
        }
    }
}

/// Kernel of the evolved data, usable for `x` in `[x_lo, x_hi]`.
pub fn kernel_at(data0: &ScatteringData, t: f64, x_lo: f64, x_hi: f64, opts: &HankelOptions) -> Result<HankelKernel> {
    if !(t >= 0.0) {
        return Err(Error::param("t", "must be non-negative"));
    }
    let dt = t - data0.time;
    let mut data = evolve_data(data0, dt);
    if opts.flip_sign {
        for a in &mut data.atoms {
            a.mass *= (-16.0 * a.kappa.powi(3) * dt).exp();
        }
        for d in &mut data.density {
            d.density *= (-16.0 * d.s.powi(3) * dt).exp();
        }
    }
    let pad = 4.0 * opts.delta + 1.0;
    let reach = 2.0 * opts.length.unwrap_or(opts.max_length).max(opts.max_length);
    HankelKernel::new(&data, 2.0 * x_lo - pad, 2.0 * x_hi + reach + pad, &opts.fourier, opts.sign())
}

/// Truncation length at `x`: the fixed one after checking its decay certificate, or the end of
/// the last stretch where `|F(2x + u)|` exceeds the decay tolerance.
pub fn truncation_length(kernel: &HankelKernel, x: f64, opts: &HankelOptions) -> Result<f64> {
    if let Some(length) = opts.length {
        for i in 0..=200 {
            let u = length * (1.0 + i as f64 / 200.0);
            let value = kernel.eval(x, u)?;
            if value.abs() > opts.decay_tol {
                return Err(Error::DecayCertificate { u, value });
            }
        }
        return Ok(length);
    }
    let step = 0.25;
    let count = (opts.max_length / step).ceil() as usize;
    let mut last = None;
    for i in 0..=count {
        let u = i as f64 * step;
        let value = kernel.eval(x, u)?;
        if value.abs() > opts.decay_tol {
            last = Some((u, value));
        }
    }
    let length = last.map_or(1.0, |(u, _)| (u + 2.0 * step).max(1.0));
    if length > opts.max_length {
        let (u, value) = last.expect("length above one implies a sample");
        return Err(Error::DecayCertificate { u, value });
    }
    for i in 1..=200 {
        let u = length * (1.0 + i as f64 / 200.0);
        let value = kernel.eval(x, u)?;
        if value.abs() > opts.decay_tol {
            return Err(Error::DecayCertificate { u, value });
        }
    }
    Ok(length)
}

/// `log det(I + M)` and `lambda_min(I + M)` for one discretization.
pub fn fredholm_logdet(disc: &NystromDiscretization) -> Result<(f64, f64)> {
    let f = disc.factor()?;
    Ok((f.logdet, 1.0 + f.lambda_min()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PointStatus {
    Ok,
    /// `t = 0`: positivity of `I + H` is not guaranteed there.
    Advisory,
    Failed(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSolution {
    pub x: f64,
    pub t: f64,
    /// Value of the selected route.
    pub q: f64,
    pub logdet: f64,
    /// Smallest eigenvalue of `I + M`.
    pub lambda_min: f64,
    /// Largest disagreement between the routes (`NaN` when they were not compared).
    pub residual: f64,
    pub n: usize,
    pub length: f64,
    pub converged: bool,
    pub q_trace: f64,
    pub q_finite_diff: Option<f64>,
    pub q_glm: Option<f64>,
    pub status: PointStatus,
}

impl PointSolution {
    fn failed(x: f64, t: f64, err: &Error) -> Self {
        Self {
            x,
            t,
            q: f64::NAN,
            logdet: f64::NAN,
            lambda_min: f64::NAN,
            residual: f64::NAN,
            n: 0,
            length: f64::NAN,
            converged: false,
            q_trace: f64::NAN,
            q_finite_diff: None,
            q_glm: None,
            status: PointStatus::Failed(err.to_string()),
        }
    }
}

/// `q` at one point from a prepared kernel.
pub fn solve_point(kernel: &HankelKernel, x: f64, route: Route, opts: &HankelOptions) -> Result<PointSolution> {
    let t = kernel.time;
    let length = truncation_length(kernel, x, opts)?;
    let (n, converged) = settle_nodes(kernel, x, length, opts)?;
    let disc = NystromDiscretization::assemble(kernel, x, length, n, true)?;
    let centre = disc.factor()?;
    let logdet = centre.logdet;
    let lambda_min = 1.0 + centre.lambda_min();
    let (_, d2) = centre.trace_derivatives()?;
    let q_trace = -2.0 * d2;

    let want_fd = opts.check_routes || route == Route::FiniteDiff;
    let want_glm = opts.check_routes || route == Route::Glm;
    let (mut q_fd, mut q_glm) = (None, None);
    if want_fd || want_glm {
        let h = opts.delta;
        let shifts = [-4.0, -2.0, -1.0, 1.0, 2.0, 4.0];
        let mut ld = [0.0; 6];
        let mut km = [0.0; 6];
        for (i, s) in shifts.iter().enumerate() {
            let d = NystromDiscretization::assemble(kernel, x + s * h, length, n, false)?;
            let f = d.factor()?;
            ld[i] = f.logdet;
            km[i] = f.marchenko();
        }
        if want_fd {
            let second = |a: f64, b: f64, c: f64, d: f64, step: f64| (-a + 16.0 * b - 30.0 * logdet + 16.0 * c - d) / (12.0 * step * step);
            let fine = second(ld[1], ld[2], ld[3], ld[4], h);
            let coarse = second(ld[0], ld[1], ld[4], ld[5], 2.0 * h);
            q_fd = Some(-2.0 * (fine + (fine - coarse) / 15.0));
        }
        if want_glm {
            let first = |a: f64, b: f64, c: f64, d: f64, step: f64| (a - 8.0 * b + 8.0 * c - d) / (12.0 * step);
            let fine = first(km[1], km[2], km[3], km[4], h);
            let coarse = first(km[0], km[1], km[4], km[5], 2.0 * h);
            q_glm = Some(-2.0 * (fine + (fine - coarse) / 15.0));
        }
    }
    let residual = if opts.check_routes {
        let a = (q_trace - q_fd.unwrap_or(q_trace)).abs();
        let b = (q_trace - q_glm.unwrap_or(q_trace)).abs();
        a.max(b)
    } else {
        f64::NAN
    };
    let q = match route {
        Route::Trace => q_trace,
        Route::FiniteDiff => q_fd.unwrap_or(f64::NAN),
        Route::Glm => q_glm.unwrap_or(f64::NAN),
    };
    let mut status = if t == 0.0 { PointStatus::Advisory } else { PointStatus::Ok };
    let tolerance = if kernel.steplike { opts.route_tol_step } else { opts.route_tol };
    if opts.check_routes && residual > tolerance {
        let err = Error::RouteDisagreement {
            x,
            t,
            detail: format!("trace {q_trace:e}, finite_diff {:e}, glm {:e}", q_fd.unwrap_or(f64::NAN), q_glm.unwrap_or(f64::NAN)),
        };
        status = PointStatus::Failed(err.to_string());
    }
    Ok(PointSolution {
        x,
        t,
        q,
        logdet,
        lambda_min,
        residual,
        n,
        length,
        converged,
        q_trace,
        q_finite_diff: q_fd,
        q_glm,
        status,
    })
}

/// Smallest node count (doubling from `opts.nodes`) at which `log det` moves by less than the
/// tolerance between `n/2` and `n`.
fn settle_nodes(kernel: &HankelKernel, x: f64, length: f64, opts: &HankelOptions) -> Result<(usize, bool)> {
    let logdet = |n: usize| -> Result<f64> { Ok(NystromDiscretization::assemble(kernel, x, length, n, false)?.factor()?.logdet) };
    let mut n = opts.nodes;
    let mut previous = logdet(n / 2)?;
    loop {
        let current = logdet(n)?;
        if (current - previous).abs() <= opts.logdet_tol * current.abs().max(1.0) {
            return Ok((n, true));
        }
        if 2 * n > opts.max_nodes {
            return Ok((n, false));
        }
        previous = current;
        n *= 2;
    }
}

/// `q(x, t)` at a single point, checked across routes.
pub fn solve_q(data0: &ScatteringData, x: f64, t: f64, route: Route, opts: &HankelOptions) -> Result<PointSolution> {
    opts.validate()?;
    let kernel = kernel_at(data0, t, x, x, opts)?;
    let point = solve_point(&kernel, x, route, opts)?;
    if let PointStatus::Failed(_) = point.status {
        return Err(Error::RouteDisagreement {
            x,
            t,
            detail: format!(
                "trace {:e}, finite_diff {:e}, glm {:e}",
                point.q_trace,
                point.q_finite_diff.unwrap_or(f64::NAN),
                point.q_glm.unwrap_or(f64::NAN)
            ),
        });
    }
    Ok(point)
}

/// Solution samples with diagnostics, rows ordered by `t` then `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionGrid {
    pub x_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub route: Route,
    pub points: Vec<PointSolution>,
    pub fourier: Vec<(f64, FourierCertificate)>,
}

pub const SOLUTION_HEADER: &str = "x,t,q,logdet,lambda_min,residual,n,length,converged,status";

impl SolutionGrid {
    pub fn q(&self, ix: usize, it: usize) -> f64 {
        self.points[it * self.x_values.len() + ix].q
    }

    pub fn failures(&self) -> impl Iterator<Item = &PointSolution> {
        self.points.iter().filter(|p| matches!(p.status, PointStatus::Failed(_)))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SOLUTION_HEADER);
        out.push('\n');
        for p in &self.points {
            let status = match &p.status {
                PointStatus::Ok => "ok".to_string(),
                PointStatus::Advisory => "advisory".to_string(),
                PointStatus::Failed(m) => format!("\"failed: {}\"", m.replace('"', "'")),
            };
            let f = crate::potential::fmt_f64;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{status}\n",
                f(p.x),
                f(p.t),
                f(p.q),
                f(p.logdet),
                f(p.lambda_min),
                f(p.residual),
                p.n,
                f(p.length),
                p.converged
            ));
        }
        out
    }
}

/// Evaluates the grid; failures at individual points are recorded, not propagated.
pub fn solve_grid(data0: &ScatteringData, xs: &[f64], ts: &[f64], route: Route, opts: &HankelOptions) -> Result<SolutionGrid> {
    opts.validate()?;
    if xs.is_empty() || ts.is_empty() {
        return Err(Error::param("grid", "x and t grids must be non-empty"));
    }
    let x_lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut points = Vec::with_capacity(xs.len() * ts.len());
    let mut fourier = Vec::new();
    for &t in ts {
        let kernel = kernel_at(data0, t, x_lo, x_hi, opts)?;
        fourier.push((t, kernel.transform.certificate.clone()));
        let row: Vec<PointSolution> = xs
            .par_iter()
            .map(|&x| solve_point(&kernel, x, route, opts).unwrap_or_else(|e| PointSolution::failed(x, t, &e)))
            .collect();
        points.extend(row);
    }
    Ok(SolutionGrid { x_values: xs.to_vec(), t_values: ts.to_vec(), route, points, fourier })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityEntry {
    pub x: f64,
    pub t: f64,
    pub n: usize,
    /// `lambda_min(I + M)` at `n` nodes (`NaN` if the factorization failed).
    pub lambda_min: f64,
    /// Value after doubling `n`, computed for violations and for the minimizing point.
    pub refined: Option<f64>,
    pub advisory: bool,
}

impl PositivityEntry {
    /// Positive after refinement.
    pub fn holds(&self) -> bool {
        self.refined.unwrap_or(self.lambda_min) > 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub entries: Vec<PositivityEntry>,
    /// Index of the smallest `lambda_min` in `entries`.
    pub minimizer: usize,
}

impl PositivityReport {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.advisory || e.holds())
    }

    pub fn coarse_violations(&self) -> usize {
        self.entries.iter().filter(|e| !(e.lambda_min > 0.0)).count()
    }
}

/// `lambda_min(I + M)` over a grid at the node count `opts.nodes`, refining where needed.
pub fn positivity_report(data0: &ScatteringData, xs: &[f64], ts: &[f64], opts: &HankelOptions) -> Result<PositivityReport> {
    opts.validate()?;
    if xs.is_empty() || ts.is_empty() {
        return Err(Error::param("grid", "x and t grids must be non-empty"));
    }
    let x_lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x_hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut entries = Vec::new();
    for &t in ts {
        let kernel = kernel_at(data0, t, x_lo, x_hi, opts)?;
        let lam = |x: f64, length: f64, n: usize| -> f64 {
            match NystromDiscretization::assemble(&kernel, x, length, n, false).and_then(|d| fredholm_logdet(&d)) {
                Ok((_, l)) => l,
                Err(Error::Positivity { value }) => value,
                Err(_) => f64::NAN,
            }
        };
        let row: Vec<Result<PositivityEntry>> = xs
            .par_iter()
            .map(|&x| {
                let length = truncation_length(&kernel, x, opts)?;
                let n = opts.nodes;
                let lambda_min = lam(x, length, n);
                let refined = (!(lambda_min > 0.0)).then(|| lam(x, length, 2 * n));
                Ok(PositivityEntry { x, t, n, lambda_min, refined, advisory: t == 0.0 })
            })
            .collect();
        for e in row {
            entries.push(e?);
        }
    }
    let minimizer = (0..entries.len())
        .min_by(|&a, &b| entries[a].lambda_min.total_cmp(&entries[b].lambda_min))
        .expect("non-empty grid");
    if entries[minimizer].refined.is_none() {
        let e = &entries[minimizer];
        let kernel = kernel_at(data0, e.t, e.x, e.x, opts)?;
        let length = truncation_length(&kernel, e.x, opts)?;
        let refined = NystromDiscretization::assemble(&kernel, e.x, length, 2 * e.n, false)
            .and_then(|d| fredholm_logdet(&d))
            .map(|r| r.1)
            .unwrap_or(f64::NAN);
        entries[minimizer].refined = Some(refined);
    }
    Ok(PositivityReport { entries, minimizer })
}
