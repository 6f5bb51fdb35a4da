//! Singular values of the discretized operator and a fit of their decay.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::Error;

use super::nystrom::NystromDiscretization;

/// Fewest values above the noise floor for which a fit is attempted.
pub const MIN_FIT_VALUES: usize = 8;

/// `log s_n = log_c - c n^omega`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub log_c: f64,
    pub c: f64,
    pub omega: f64,
    pub r_squared: f64,
    /// Number of leading values used.
    pub used: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    /// Decreasing.
    pub values: Vec<f64>,
    pub noise_floor: f64,
    pub fit: Option<PowerFit>,
    pub notice: Option<String>,
}

/// Relative accuracy of kernels built from computed scattering data (the direct-scattering
/// integrator tolerance); singular values below this fraction of `s_1` are noise.
pub const DATA_RELATIVE_ACCURACY: f64 = 1e-11;

/// Singular values of the full matrix `M` with the decay fit over the values above
/// `max(1e3 eps, relative_floor) s_1`.
pub fn singular_spectrum(disc: &NystromDiscretization, relative_floor: f64) -> SingularSpectrum {
    let mut values: Vec<f64> = SymmetricEigen::new(disc.matrix()).eigenvalues.iter().map(|l| l.abs()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let s1 = values.first().copied().unwrap_or(0.0);
    let noise_floor = (1e3 * f64::EPSILON).max(relative_floor) * s1;
    let above: Vec<f64> = values.iter().copied().take_while(|&s| s > noise_floor && s > 0.0).collect();
    let (fit, notice) = if above.len() < MIN_FIT_VALUES {
        let e = Error::TooFewSingularValues { count: above.len(), needed: MIN_FIT_VALUES };
        (None, Some(e.to_string()))
    } else {
        (Some(fit_power(&above)), None)
    };
    SingularSpectrum { values, noise_floor, fit, notice }
}

/// Linear least squares in `(log_c, c)` for fixed `omega`; returns the fit and its residual sum.
fn fit_fixed(logs: &[f64], omega: f64) -> (f64, f64, f64) {
    let m = logs.len() as f64;
    let xs: Vec<f64> = (1..=logs.len()).map(|n| (n as f64).powf(omega)).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = logs.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(logs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(logs).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (intercept, -slope, ss)
}

/// Grid search over `omega` in `[0.25, 1.5]` followed by golden-section refinement.
pub fn fit_power(values: &[f64]) -> PowerFit {
    let logs: Vec<f64> = values.iter().map(|s| s.ln()).collect();
    let ss = |w: f64| fit_fixed(&logs, w).2;
    let mut best = 0.25;
    for i in 0..=125 {
        let w = 0.25 + 0.01 * i as f64;
        if ss(w) < ss(best) {
            best = w;
        }
    }
    let (mut a, mut b) = ((best - 0.01).max(0.25), (best + 0.01).min(1.5));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if ss(c) < ss(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let omega = 0.5 * (a + b);
    let (log_c, c, res) = fit_fixed(&logs, omega);
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let tot: f64 = logs.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if tot > 0.0 { 1.0 - res / tot } else { 1.0 };
    PowerFit { log_c, c, omega, r_squared, used: values.len() }
}
