//! Nyström discretization on `[0, L]` and the Fredholm determinant machinery.
//!
//! The atoms are kept out of the dense matrix: with `M = M_c + Phi diag(a) Phi^T`,
//! `det(I + M) = det(I + M_c) prod(a) det(C)` where `C = diag(1/a) + Phi^T (I + M_c)^{-1} Phi`.
//! `C` is rescaled to unit diagonal so that atoms with `a = c e^{-2 kappa x}` far from one in
//! size do not spoil the factorization.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::numeric::quad::GaussLegendre;

use super::kernel::HankelKernel;

/// Atoms with `ln a` below this contribute nothing representable and are dropped.
const NEGLIGIBLE_LOG_WEIGHT: f64 = -600.0;
/// `lambda_min(M)` is computed from the full matrix only while the atom weights stay below
/// `e^{FULL_MATRIX_LOG_WEIGHT}`; beyond that the continuous-part bound is reported.
const FULL_MATRIX_LOG_WEIGHT: f64 = 30.0;

/// Discretized operator at one `(x, t)`.
#[derive(Clone, Debug)]
pub struct NystromDiscretization {
    pub x: f64,
    pub length: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Continuous part `sqrt(w_i w_j) F_c(2x + u_i + u_j)`.
    pub mc: DMatrix<f64>,
    /// First and second `x` derivatives of `mc`, when requested.
    pub mc1: Option<DMatrix<f64>>,
    pub mc2: Option<DMatrix<f64>>,
    /// `sqrt(w_i) F_c(2x + u_i)`.
    pub fc: DVector<f64>,
    /// `F_c(2x)`.
    pub hc0: f64,
    /// Columns `sqrt(w_i) e^{-kappa_j u_i}`.
    pub phi: DMatrix<f64>,
    pub kappa: Vec<f64>,
    /// `ln a_j = ln c_j - 2 kappa_j x`.
    pub log_a: Vec<f64>,
}

impl NystromDiscretization {
    /// Fills the matrices; `derivatives` adds the two `x` derivatives of the continuous part.
    pub fn assemble(kernel: &HankelKernel, x: f64, length: f64, n: usize, derivatives: bool) -> Result<Self> {
        if !(length > 0.0) || n == 0 {
            return Err(Error::param("nystrom", format!("need L > 0 and n > 0 (got L = {length}, n = {n})")));
        }
        let gl = GaussLegendre::on_interval(n, 0.0, length);
        let sw: Vec<f64> = gl.weights.iter().map(|w| w.sqrt()).collect();
        let mut mc = DMatrix::zeros(n, n);
        let mut mc1 = DMatrix::zeros(if derivatives { n } else { 0 }, if derivatives { n } else { 0 });
        let mut mc2 = mc1.clone();
        if kernel.has_continuous_part() {
            for i in 0..n {
                for j in 0..=i {
                    let (f, f1, f2) = kernel.continuous(2.0 * x + gl.nodes[i] + gl.nodes[j])?;
                    let s = sw[i] * sw[j];
                    mc[(i, j)] = s * f;
                    mc[(j, i)] = s * f;
                    if derivatives {
                        mc1[(i, j)] = 2.0 * s * f1;
                        mc1[(j, i)] = 2.0 * s * f1;
                        mc2[(i, j)] = 4.0 * s * f2;
                        mc2[(j, i)] = 4.0 * s * f2;
                    }
                }
            }
        }
        let hc0 = kernel.continuous(2.0 * x)?.0;
        let mut fc = DVector::zeros(n);
        if kernel.has_continuous_part() {
            for i in 0..n {
                fc[i] = sw[i] * kernel.continuous(2.0 * x + gl.nodes[i])?.0;
            }
        }
        let kept: Vec<(f64, f64)> = kernel
            .atoms
            .iter()
            .map(|&(k, lc)| (k, lc - 2.0 * k * x))
            .filter(|a| a.1 > NEGLIGIBLE_LOG_WEIGHT)
            .collect();
        let phi = DMatrix::from_fn(n, kept.len(), |i, j| sw[i] * (-kept[j].0 * gl.nodes[i]).exp());
        Ok(Self {
            x,
            length,
            nodes: gl.nodes,
            weights: gl.weights,
            mc,
            mc1: derivatives.then_some(mc1),
            mc2: derivatives.then_some(mc2),
            fc,
            hc0,
            phi,
            kappa: kept.iter().map(|a| a.0).collect(),
            log_a: kept.iter().map(|a| a.1).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// The full matrix `M` including the atoms.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut m = self.mc.clone();
        let n = self.n();
        for (c, la) in self.log_a.iter().enumerate() {
            let a = la.exp();
            for i in 0..n {
                for j in 0..=i {
                    let v = a * (self.phi[(i, c)] * self.phi[(j, c)]);
                    m[(i, j)] += v;
                    if i != j {
                        m[(j, i)] += v;
                    }
                }
            }
        }
        m
    }

    /// Eigen-factorization shared by every route.
    pub fn factor(&self) -> Result<Factored<'_>> {
        let eig = SymmetricEigen::new(self.mc.clone());
        let lambda_c = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if !(1.0 + lambda_c > 0.0) {
            return Err(Error::Positivity { value: 1.0 + lambda_c });
        }
        let d = eig.eigenvalues.map(|l| 1.0 / (1.0 + l));
        let logdet_c: f64 = eig.eigenvalues.iter().map(|l| l.ln_1p()).sum();
        let v = eig.eigenvectors;
        let p_rot = v.transpose() * &self.phi;
        let mut p = p_rot.clone();
        for (i, mut row) in p.row_iter_mut().enumerate() {
            row *= d[i];
        }
        let g = p_rot.transpose() * &p;
        let na = self.kappa.len();
        // s_j^2 = 1 / C_jj and the combination ln a_j + ln C_jj = ln(1 + a_j G_jj).
        let mut s = vec![0.0; na];
        let mut damp = vec![0.0; na];
        let mut log_scale = 0.0;
        for j in 0..na {
            let la = self.log_a[j];
            let gjj = g[(j, j)];
            let one_plus = if la <= 0.0 { 1.0 + la.exp() * gjj } else { la.exp() * ((-la).exp() + gjj) };
            log_scale += if la <= 0.0 { (la.exp() * gjj).ln_1p() } else { la + ((-la).exp() + gjj).ln() };
            s[j] = (la.exp() / one_plus).sqrt();
            damp[j] = 1.0 / one_plus;
        }
        let c = DMatrix::from_fn(na, na, |j, k| if j == k { 1.0 } else { s[j] * s[k] * g[(j, k)] });
        let chol = if na > 0 {
            let ch = Cholesky::new(c.clone()).ok_or_else(|| {
                let low = SymmetricEigen::new(c.clone()).eigenvalues.min();
                Error::Positivity { value: low }
            })?;
            Some(ch)
        } else {
            None
        };
        let logdet_atoms = log_scale + chol.as_ref().map_or(0.0, |ch| 2.0 * ch.l().diagonal().iter().map(|x| x.ln()).sum::<f64>());
        Ok(Factored {
            disc: self,
            lambda_c,
            logdet: logdet_c + logdet_atoms,
            v,
            d,
            p,
            s,
            damp,
            chol,
        })
    }
}

/// Eigen-factorization of `I + M_c` plus the Cholesky factor of the scaled atom block.
pub struct Factored<'a> {
    disc: &'a NystromDiscretization,
    /// Smallest eigenvalue of `M_c`.
    pub lambda_c: f64,
    pub logdet: f64,
    v: DMatrix<f64>,
    d: DVector<f64>,
    /// `D V^T Phi`.
    p: DMatrix<f64>,
    s: Vec<f64>,
    /// `1 / (1 + a_j G_jj)`.
    damp: Vec<f64>,
    chol: Option<Cholesky<f64, nalgebra::Dyn>>,
}

impl Factored<'_> {
    /// Smallest eigenvalue of the full `M` when it can be formed accurately, otherwise the lower
    /// bound from the continuous part (the atom part is positive semidefinite).
    pub fn lambda_min(&self) -> f64 {
        let disc = self.disc;
        if disc.log_a.is_empty() {
            return self.lambda_c;
        }
        if disc.log_a.iter().all(|&la| la <= FULL_MATRIX_LOG_WEIGHT) {
            SymmetricEigen::new(disc.matrix()).eigenvalues.min()
        } else {
            self.lambda_c
        }
    }

    /// `(d/dx log det, d^2/dx^2 log det)` from the analytic kernel derivatives.
    pub fn trace_derivatives(&self) -> Result<(f64, f64)> {
        let disc = self.disc;
        let (m1, m2) = match (&disc.mc1, &disc.mc2) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::param("route", "discretization was assembled without derivatives")),
        };
        let a1 = self.v.transpose() * m1 * &self.v;
        let a2 = self.v.transpose() * m2 * &self.v;
        let n = disc.n();
        let mut first = 0.0;
        let mut second = 0.0;
        for i in 0..n {
            first += self.d[i] * a1[(i, i)];
            second += self.d[i] * a2[(i, i)];
            for j in 0..n {
                second -= self.d[i] * self.d[j] * a1[(i, j)] * a1[(i, j)];
            }
        }
        let na = disc.kappa.len();
        if na == 0 {
            return Ok((first, second));
        }
        let ap = &a1 * &self.p;
        let g1 = self.p.transpose() * &ap;
        let mut dap = ap.clone();
        for (i, mut row) in dap.row_iter_mut().enumerate() {
            row *= self.d[i];
        }
        let g11 = ap.transpose() * &dap;
        let g2 = self.p.transpose() * &a2 * &self.p;
        let s = &self.s;
        let c1 = DMatrix::from_fn(na, na, |j, k| {
            let diag = if j == k { 2.0 * disc.kappa[j] * self.damp[j] } else { 0.0 };
            diag - s[j] * s[k] * g1[(j, k)]
        });
        let c2 = DMatrix::from_fn(na, na, |j, k| {
            let diag = if j == k { 4.0 * disc.kappa[j] * disc.kappa[j] * self.damp[j] } else { 0.0 };
            diag + s[j] * s[k] * (2.0 * g11[(j, k)] - g2[(j, k)])
        });
        let chol = self.chol.as_ref().expect("atom block factor");
        let x1 = chol.solve(&c1);
        let x2 = chol.solve(&c2);
        let kappa_sum: f64 = disc.kappa.iter().sum();
        first += x1.trace() - 2.0 * kappa_sum;
        second += x2.trace() - (&x1 * &x1).trace();
        Ok((first, second))
    }

    /// Marchenko value `K(x, x) = -h(0) + <h, (I + H)^{-1} h>`, equal to `d/dx log det`.
    pub fn marchenko(&self) -> f64 {
        let disc = self.disc;
        let fr = self.v.transpose() * &disc.fc;
        let mut value = -disc.hc0;
        for i in 0..disc.n() {
            value += self.d[i] * fr[i] * fr[i];
        }
        if let Some(chol) = &self.chol {
            let z = self.p.transpose() * &fr;
            let y = DVector::from_fn(z.len(), |j, _| self.s[j] * (z[j] - 1.0));
            value -= y.dot(&chol.solve(&y));
        }
        value
    }
}
