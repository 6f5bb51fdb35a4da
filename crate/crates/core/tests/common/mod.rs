//! Reference values computed independently of the library's ODE machinery.
#![allow(dead_code)]

use kdvist::Complex64 as C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Right reflection and transmission coefficients of a piecewise-constant potential given as
/// cells `(x0, x1, value)` (ordered, contiguous, zero outside), by exact propagation of
/// `psi_+ = e^{ikx}` through each cell.
pub fn piecewise_constant_scattering(cells: &[(f64, f64, f64)], k: f64) -> (C64, C64) {
    let kc = C64::new(k, 0.0);
    let right = cells.last().unwrap().1;
    let left = cells.first().unwrap().0;
    let mut psi = (I * kc * right).exp();
    let mut dpsi = I * kc * psi;
    for &(x0, x1, v) in cells.iter().rev() {
        // psi'' = (v - k^2) psi, travel from x1 to x0
        let w = (C64::new(k * k - v, 0.0)).sqrt();
        let d = x0 - x1;
        let (c, s) = ((w * d).cos(), (w * d).sin());
        let (p0, d0) = (psi, dpsi);
        psi = p0 * c + d0 * s / w;
        dpsi = -p0 * w * s + d0 * c;
    }
    // psi_- = e^{-ikx} at the left edge
    let m = C64::from_polar(1.0, -k * left);
    let dm = -I * kc * m;
    let w_minus_plus = m * dpsi - dm * psi;
    let w_conj_minus = psi.conj() * dm - dpsi.conj() * m;
    (w_conj_minus / w_minus_plus, 2.0 * I * kc / w_minus_plus)
}

/// Reflection coefficient of the pure step `q = -h^2 (x < 0)`.
pub fn pure_step_reflection(h: f64, k: f64) -> C64 {
    let eta = (k * k + h * h).sqrt();
    C64::new((k - eta) / (k + eta), 0.0)
}

/// Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    s * h / 3.0
}

/// Adaptive Simpson quadrature to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `q = -2 (ln tau)''` for the reflectionless data `(kappa_n, c_n)` at time `t`.
///
/// `tau = det(I + A)`, `A_mn = a_m / (kappa_m + kappa_n)`, expanded over subsets `S`: each
/// principal minor is a Cauchy determinant, so `tau = sum_S C_S e^{-2 x sum_S kappa}`.
pub fn soliton_q(kappa: &[f64], c: &[f64], x: f64, t: f64) -> f64 {
    let n = kappa.len();
    let (mut tau, mut d1, mut d2) = (0.0, 0.0, 0.0);
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let mut log_coeff = 0.0;
        let mut beta = 0.0;
        for &i in &idx {
            log_coeff += c[i].ln() + 8.0 * kappa[i].powi(3) * t - (2.0 * kappa[i]).ln();
            beta -= 2.0 * kappa[i];
        }
        for (p, &i) in idx.iter().enumerate() {
            for &j in &idx[p + 1..] {
                log_coeff += 2.0 * ((kappa[i] - kappa[j]).abs() / (kappa[i] + kappa[j])).ln();
            }
        }
        let term = (log_coeff + beta * x).exp();
        tau += term;
        d1 += beta * term;
        d2 += beta * beta * term;
    }
    -2.0 * (d2 / tau - (d1 / tau).powi(2))
}
